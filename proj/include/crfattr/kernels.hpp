#pragma once

#include <cmath>
#include <cstddef>
#include <string>

namespace crfattr::kernels {

/// Instruction sets the arithmetic kernels are implemented for. The scalar
/// variants are the reference; wider variants must agree with them up to
/// summation-order rounding and are selected at runtime.
enum class Isa { scalar, avx2 };

/// Widest variant compiled in and supported by this host.
Isa best_isa();

/// Variant currently dispatched to.
Isa active_isa();

/// Force a variant (tests, --no-simd). Throws std::invalid_argument if the
/// requested variant is not available on this host.
void set_isa(Isa isa);

std::string isa_name(Isa isa);

double dot(const double* a, const double* b, std::size_t n);

/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// x *= alpha
void scale(double* x, double alpha, std::size_t n);

/// Classical momentum step: v <- momentum*v + g; theta <- theta - lr*v.
void sgd_momentum(double* theta, double* v, const double* g, double lr,
                  double momentum, std::size_t n);

/// Stable softplus: max(a,0) + log1p(exp(-|a|)).
inline double softplus(double a) {
  return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a)));
}

/// Numerically stable logistic sigmoid.
inline double logistic(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

}  // namespace crfattr::kernels
