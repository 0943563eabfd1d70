#include "crfattr/kernels.hpp"

#include <stdexcept>

namespace crfattr::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void sgd_momentum_scalar(double* theta, double* v, const double* g, double lr,
                         double momentum, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = momentum * v[i] + g[i];
    theta[i] -= lr * v[i];
  }
}

#if defined(CRFATTR_HAVE_AVX2_TU)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_avx2(double* x, double alpha, std::size_t n);
void sgd_momentum_avx2(double* theta, double* v, const double* g, double lr,
                       double momentum, std::size_t n);
bool avx2_supported();
#endif

}  // namespace detail

namespace {

struct Dispatch {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  void (*sgd)(double*, double*, const double*, double, double, std::size_t);
  Isa isa;
};

constexpr Dispatch kScalar{detail::dot_scalar, detail::axpy_scalar,
                           detail::scale_scalar, detail::sgd_momentum_scalar,
                           Isa::scalar};

#if defined(CRFATTR_HAVE_AVX2_TU)
constexpr Dispatch kAvx2{detail::dot_avx2, detail::axpy_avx2,
                         detail::scale_avx2, detail::sgd_momentum_avx2,
                         Isa::avx2};
#endif

Dispatch pick_best() {
#if defined(CRFATTR_HAVE_AVX2_TU)
  if (detail::avx2_supported()) return kAvx2;
#endif
  return kScalar;
}

Dispatch& active() {
  static Dispatch d = pick_best();
  return d;
}

}  // namespace

Isa best_isa() {
#if defined(CRFATTR_HAVE_AVX2_TU)
  if (detail::avx2_supported()) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa active_isa() { return active().isa; }

void set_isa(Isa isa) {
  if (isa == Isa::scalar) {
    active() = kScalar;
    return;
  }
#if defined(CRFATTR_HAVE_AVX2_TU)
  if (isa == Isa::avx2 && detail::avx2_supported()) {
    active() = kAvx2;
    return;
  }
#endif
  throw std::invalid_argument("kernels: requested ISA not available: " +
                              isa_name(isa));
}

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}

void scale(double* x, double alpha, std::size_t n) {
  active().scale(x, alpha, n);
}

void sgd_momentum(double* theta, double* v, const double* g, double lr,
                  double momentum, std::size_t n) {
  active().sgd(theta, v, g, lr, momentum, n);
}

}  // namespace crfattr::kernels
