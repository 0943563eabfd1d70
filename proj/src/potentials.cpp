#include "crfattr/potentials.hpp"

#include <cmath>
#include <stdexcept>

#include "crfattr/kernels.hpp"
#include "crfattr/rng.hpp"

namespace crfattr {

PotentialHead init_head(HeadKind kind, int n_states, int dim, uint64_t seed) {
  if (n_states != 2 && n_states != 4)
    throw std::invalid_argument("init_head: n_states must be 2 or 4");
  PotentialHead h;
  h.kind = kind;
  h.n_states = n_states;
  h.biases.assign(n_states, 0.0);
  if (kind == HeadKind::softplus_linear) {
    if (dim <= 0) throw std::invalid_argument("init_head: dim must be positive");
    h.dim = dim;
    h.weights.resize(static_cast<size_t>(n_states) * dim);
    Rng rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(dim));
    for (double& w : h.weights) w = rng.uniform(-s, s);
  }
  return h;
}

HeadGrad make_head_grad(const PotentialHead& head) {
  HeadGrad g;
  g.weights.assign(head.weights.size(), 0.0);
  g.biases.assign(head.biases.size(), 0.0);
  return g;
}

PotentialTable eval_head(const PotentialHead& head, std::span<const double> z) {
  PotentialTable t;
  t.n_states = head.n_states;
  if (head.kind == HeadKind::softplus_const) {
    for (int s = 0; s < head.n_states; ++s) t[s] = kernels::softplus(head.biases[s]);
    return t;
  }
  if (static_cast<int>(z.size()) != head.dim)
    throw std::invalid_argument("eval_head: feature dimension mismatch");
  for (int s = 0; s < head.n_states; ++s) {
    const double a = kernels::dot(head.weight_row(s), z.data(), z.size()) + head.biases[s];
    t[s] = kernels::softplus(a);
  }
  return t;
}

void backward_head(const PotentialHead& head, std::span<const double> z,
                   std::span<const double> upstream, HeadGrad& grad,
                   std::span<double> grad_z) {
  if (static_cast<int>(upstream.size()) != head.n_states)
    throw std::invalid_argument("backward_head: upstream dimension mismatch");
  if (head.kind == HeadKind::softplus_const) {
    for (int s = 0; s < head.n_states; ++s)
      grad.biases[s] += upstream[s] * kernels::logistic(head.biases[s]);
    return;
  }
  if (static_cast<int>(z.size()) != head.dim)
    throw std::invalid_argument("backward_head: feature dimension mismatch");
  if (!grad_z.empty() && grad_z.size() != z.size())
    throw std::invalid_argument("backward_head: grad_z dimension mismatch");
  for (int s = 0; s < head.n_states; ++s) {
    const double a = kernels::dot(head.weight_row(s), z.data(), z.size()) + head.biases[s];
    const double g = upstream[s] * kernels::logistic(a);
    grad.biases[s] += g;
    kernels::axpy(g, z.data(), grad.weights.data() + static_cast<size_t>(s) * head.dim,
                  z.size());
    if (!grad_z.empty()) kernels::axpy(g, head.weight_row(s), grad_z.data(), z.size());
  }
}

}  // namespace crfattr
