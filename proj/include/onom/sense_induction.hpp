#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onom/corpus.hpp"
#include "onom/distance.hpp"
#include "onom/manifold.hpp"
#include "onom/matrix.hpp"

namespace onom {

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;                // k x dim
  double sse = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> sse_history;  // after seeding, then after every Lloyd step
};

/// k-means++ seeding then Lloyd iterations until the assignment stops
/// changing or max_iter is reached. Ties go to the lower centroid index; an
/// emptied cluster takes the point farthest from its current centroid. With
/// n_init > 1 the lowest-SSE run wins (earliest on ties).
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 300, std::size_t n_init = 10);

/// Hyperplane w.x + b = 0; label 1 lies on the positive side.
struct LinearBoundary {
  Vector w;
  double b = 0.0;
  double objective = 0.0;
  std::vector<double> objective_history;  // pocket objective per epoch

  double decision(std::span<const double> x) const;
};

struct SvmConfig {
  double lambda = 1e-3;
  std::size_t epochs = 2000;
  double eta0 = 0.01;
  std::uint64_t seed = 42;
};

/// Soft-margin linear SVM by averaged stochastic subgradient descent on the
/// hinge objective over standardized features, mapped back to input units.
/// Keeps the averaged iterate with the lowest objective seen at epoch ends.
LinearBoundary linear_boundary(const Matrix& points, std::span<const int> labels,
                               const SvmConfig& cfg = {});

struct SenseParams {
  std::size_t k = 2;
  std::size_t n_neighbors = 15;
  Metric metric = Metric::euclidean;
  std::size_t max_iter = 300;
  std::size_t n_init = 10;
  LayoutConfig layout;  // n_components is forced to 2
};

struct SenseModel {
  std::vector<std::string> ids;
  Matrix points;  // n x 2
  std::vector<int> labels;
  Matrix centroids;
  std::optional<LinearBoundary> boundary;  // only for k = 2
};

/// umap_reduce to 2-D, k-means, and a linear boundary when k = 2.
SenseModel induce_senses(const EmbeddedCorpus& corpus, const SenseParams& params,
                         std::uint64_t seed);

struct ClusterProfile {
  int label = 0;
  std::size_t size = 0;
  double share = 0.0;  // exact fraction
  int percent = 0;     // share rounded to a whole percentage
  std::vector<std::pair<std::string, std::size_t>> objects;  // descending count, ties lexicographic
};

using ObjectProfile = std::vector<ClusterProfile>;

ObjectProfile profile_clusters(std::span<const int> labels,
                               std::span<const std::optional<std::string>> objects,
                               std::size_t top_n = 5);

/// "id<TAB>x<TAB>y<TAB>label" rows with a header.
std::string sense_points_tsv(const SenseModel& model);
/// Centroids and boundary.
std::string sense_model_json(const SenseModel& model);
/// [{"cluster", "size", "share", "percent": "51%", "objects": [{"lemma", "count"}]}]
std::string object_profile_json(const ObjectProfile& profile);
/// Scatter plot coloured by cluster, with the boundary line when present.
std::string sense_scatter_svg(const SenseModel& model, double width = 640, double height = 480);

}  // namespace onom
