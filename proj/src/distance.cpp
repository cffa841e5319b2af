#include "onom/distance.hpp"

#include <algorithm>
#include <cmath>

#include "onom/error.hpp"
#include "onom/simd/kernels.hpp"

namespace onom {

std::string_view metric_name(Metric m) { return m == Metric::cosine ? "cosine" : "euclidean"; }

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw Error("unknown metric '" + std::string(name) + "' (expected euclidean or cosine)");
}

Matrix prepare_points(const Matrix& points, Metric metric) {
  Matrix out = points;
  if (metric == Metric::cosine) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double norm = std::sqrt(simd::dot(row_span(out, i), row_span(out, i)));
      if (norm > 0.0) out.row(i) /= norm;
    }
  }
  return out;
}

void distances_from(const Matrix& prepared, Eigen::Index i, Metric metric, std::span<double> out) {
  const auto q = row_span(prepared, i);
  const std::span<const double> rows{prepared.data(), static_cast<std::size_t>(prepared.size())};
  if (metric == Metric::euclidean) {
    simd::squared_distances_to_rows(q, rows, out);
    for (double& d : out) d = std::sqrt(d);
    return;
  }
  for (Eigen::Index j = 0; j < prepared.rows(); ++j) {
    out[static_cast<std::size_t>(j)] = std::max(0.0, 1.0 - simd::dot(q, row_span(prepared, j)));
  }
  out[static_cast<std::size_t>(i)] = 0.0;
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (metric == Metric::euclidean) return std::sqrt(simd::squared_distance(a, b));
  return std::max(0.0, 1.0 - simd::dot(a, b));
}

}  // namespace onom
