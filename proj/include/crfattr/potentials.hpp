#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace crfattr {

enum class HeadKind { softplus_linear, softplus_const };

/// Strictly positive table over the joint states of a factor scope.
/// Unary order: [x=0, x=1]. Pairwise row-major over (scope[0], scope[1]):
/// [(0,0), (0,1), (1,0), (1,1)].
struct PotentialTable {
  int n_states = 2;
  std::array<double, 4> v{};

  double operator[](int s) const { return v[s]; }
  double& operator[](int s) { return v[s]; }
};

/// Learnable head mapping a feature vector to a potential table.
/// softplus_linear: value[X] = softplus(w_X . z + b_X).
/// softplus_const:  value[X] = softplus(b_X), feature-invariant.
struct PotentialHead {
  HeadKind kind = HeadKind::softplus_const;
  int n_states = 2;          // 2 for unary, 4 for pairwise
  int dim = 0;               // feature dimension; 0 for softplus_const
  std::vector<double> weights;  // n_states x dim, row-major; empty for const
  std::vector<double> biases;   // n_states

  const double* weight_row(int s) const { return weights.data() + static_cast<size_t>(s) * dim; }
};

/// Gradient accumulator shaped like a head plus the feature input.
struct HeadGrad {
  std::vector<double> weights;
  std::vector<double> biases;
};

/// Seeded init: weights uniform on [-1/sqrt(dim), 1/sqrt(dim)], biases zero.
PotentialHead init_head(HeadKind kind, int n_states, int dim, uint64_t seed);

HeadGrad make_head_grad(const PotentialHead& head);

PotentialTable eval_head(const PotentialHead& head, std::span<const double> z);

/// Chain rule through the softplus and affine map. Accumulates (+=) parameter
/// gradients into `grad` and, when grad_z is nonempty, the feature gradient.
void backward_head(const PotentialHead& head, std::span<const double> z,
                   std::span<const double> upstream, HeadGrad& grad,
                   std::span<double> grad_z);

}  // namespace crfattr
