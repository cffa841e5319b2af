// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "onom/simd/kernels.hpp"

namespace onom::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

double squared_distance(const double* a, const double* b, std::size_t n) {
  if (n < 4) return scalar::squared_distance(a, b, n);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
  if (n < 4) return scalar::dot(a, b, n);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void squared_distances_to_rows(const double* q, const double* rows, std::size_t count,
                               std::size_t n, double* out) {
  if (n == 2) {
    // 2-D layouts dominate the clustering stages: process two rows per
    // register, same operation order as the scalar kernel.
    const __m256d qq = _mm256_setr_pd(q[0], q[1], q[0], q[1]);
    std::size_t j = 0;
    for (; j + 2 <= count; j += 2) {
      const __m256d d = _mm256_sub_pd(qq, _mm256_loadu_pd(rows + 2 * j));
      const __m256d sq = _mm256_mul_pd(d, d);
      alignas(32) double lanes[4];
      _mm256_store_pd(lanes, sq);
      out[j] = (0.0 + lanes[0]) + lanes[1];
      out[j + 1] = (0.0 + lanes[2]) + lanes[3];
    }
    for (; j < count; ++j) out[j] = scalar::squared_distance(q, rows + 2 * j, 2);
    return;
  }
  for (std::size_t j = 0; j < count; ++j) out[j] = squared_distance(q, rows + j * n, n);
}

}  // namespace onom::simd::avx2
