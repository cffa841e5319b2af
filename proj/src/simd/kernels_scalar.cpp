#include "onom/simd/kernels.hpp"

namespace onom::simd::scalar {

double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void squared_distances_to_rows(const double* q, const double* rows, std::size_t count,
                               std::size_t n, double* out) {
  for (std::size_t j = 0; j < count; ++j) out[j] = squared_distance(q, rows + j * n, n);
}

}  // namespace onom::simd::scalar
