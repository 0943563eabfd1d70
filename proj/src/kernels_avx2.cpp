// AVX2/FMA variants of the arithmetic kernels. Compiled with -mavx2 -mfma for
// this translation unit only; callers go through the runtime dispatch table.

#include <immintrin.h>

#include <cstddef>

namespace crfattr::kernels::detail {

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_avx2(double* x, double alpha, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

void sgd_momentum_avx2(double* theta, double* v, const double* g, double lr,
                       double momentum, std::size_t n) {
  const __m256d vm = _mm256_set1_pd(momentum);
  const __m256d vlr = _mm256_set1_pd(-lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vel = _mm256_fmadd_pd(vm, _mm256_loadu_pd(v + i), _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(v + i, vel);
    const __m256d th = _mm256_fmadd_pd(vlr, vel, _mm256_loadu_pd(theta + i));
    _mm256_storeu_pd(theta + i, th);
  }
  for (; i < n; ++i) {
    v[i] = std::fma(momentum, v[i], g[i]);
    theta[i] = std::fma(-lr, v[i], theta[i]);
  }
}

}  // namespace crfattr::kernels::detail
