#pragma once

#include <span>
#include <string>
#include <string_view>

#include "onom/matrix.hpp"

namespace onom {

enum class Metric { euclidean, cosine };

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);

/// Returns rows ready for distances_from: unchanged for euclidean, scaled to
/// unit norm for cosine (zero rows stay zero and sit at distance 1 from all).
Matrix prepare_points(const Matrix& points, Metric metric);

/// out[j] = distance(prepared row i, prepared row j) for every row j.
void distances_from(const Matrix& prepared, Eigen::Index i, Metric metric, std::span<double> out);

/// Both points must already have gone through prepare_points.
double distance(std::span<const double> a, std::span<const double> b, Metric metric);

}  // namespace onom
