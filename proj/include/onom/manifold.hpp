#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "onom/distance.hpp"
#include "onom/matrix.hpp"

namespace onom {

/// Exact k nearest neighbours, stored row-major: point i owns slots
/// [i*k, (i+1)*k), sorted by ascending distance then ascending index.
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> distances;

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {indices.data() + i * k, k};
  }
  std::span<const double> neighbor_distances(std::size_t i) const {
    return {distances.data() + i * k, k};
  }
};

KnnGraph knn_exact(const Matrix& vectors, std::size_t k, Metric metric);

/// Per-point smooth-kNN calibration and the directed membership weights it
/// induces (same layout as KnnGraph::distances).
struct DirectedMemberships {
  std::vector<double> rho;
  std::vector<double> sigma;
  std::vector<double> weights;
};

DirectedMemberships smooth_knn(const KnnGraph& knn, double local_connectivity = 1.0);

struct FuzzyEdge {
  std::uint32_t i;  // i < j
  std::uint32_t j;
  double weight;    // in (0, 1]
};

/// Symmetric fuzzy neighbourhood graph; each undirected edge is stored once,
/// sorted by (i, j).
struct FuzzyGraph {
  std::size_t n = 0;
  std::vector<FuzzyEdge> edges;

  /// 0 when the pair is not connected.
  double weight(std::uint32_t a, std::uint32_t b) const;
};

/// Fuzzy union w1 + w2 - w1*w2 of the directed memberships.
FuzzyGraph build_fuzzy_graph(const KnnGraph& knn, double local_connectivity = 1.0);

inline double fuzzy_union(double w1, double w2) {
  if (w1 == 1.0 || w2 == 1.0) return 1.0;  // exact, rounding would drift off 1
  const double u = w1 + w2 - w1 * w2;
  return u > 1.0 ? 1.0 : u;
}

struct CurveParams {
  double a = 0.0;
  double b = 0.0;
  bool converged = false;
};

/// Least-squares fit of 1/(1 + a x^(2b)) to the min_dist/spread target curve
/// (Levenberg-Marquardt from (1, 1), 300 grid points on (0, 3*spread]).
CurveParams fit_ab(double min_dist, double spread);

struct LayoutConfig {
  std::size_t n_components = 2;
  double min_dist = 0.1;
  double spread = 1.0;
  // Fitted from min_dist/spread when unset.
  std::optional<double> a;
  std::optional<double> b;
  std::size_t n_epochs = 500;
  std::size_t negative_sample_rate = 5;
  std::uint64_t seed = 42;
  // Hogwild-style edge updates across thread_count() workers. Not reproducible.
  bool parallel = false;

  /// Throws onom::Error on invalid settings.
  void validate() const;
};

/// SGD on the fuzzy cross-entropy between graph and layout. Returns init
/// unchanged when n_epochs is 0.
Matrix optimize_layout(const FuzzyGraph& graph, const Matrix& init, const LayoutConfig& cfg);

/// Leading principal components of the centred data, each axis rescaled to
/// [-10, 10], plus a +-1e-4 seeded jitter so coincident points can separate.
Matrix pca_init(const Matrix& vectors, std::size_t n_components, std::uint64_t seed);

/// knn_exact -> build_fuzzy_graph -> pca_init -> optimize_layout.
Matrix umap_reduce(const Matrix& vectors, std::size_t n_neighbors, const LayoutConfig& cfg,
                   Metric metric);

}  // namespace onom
