#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onom/matrix.hpp"

namespace onom {

/// Euclidean distance from each point to its min_samples-th nearest other point.
std::vector<double> core_distances(const Matrix& vectors, std::size_t min_samples);

struct MstEdge {
  std::uint32_t a;  // a < b
  std::uint32_t b;
  double weight;
};

struct Mst {
  std::size_t n = 0;
  std::vector<MstEdge> edges;  // in the order Prim added them

  /// Sum of edge weights accumulated in ascending weight order, so any two
  /// minimum spanning trees of the same graph report the same value.
  double total_weight() const;
};

/// Prim's algorithm over the implicit mutual-reachability matrix
/// max(core(a), core(b), |a - b|). Ties go to the lower (vertex, parent) pair.
Mst mutual_reachability_mst(const Matrix& vectors, std::span<const double> core);

// Condensed cluster hierarchy. Node 0 is the root (the whole data set,
// lambda_birth 0). Lambda is 1/distance; zero distances are floored at half
// the smallest positive MST weight so that lambdas stay finite.
//
// When the root's first event (at its lowest lambda) only sheds groups
// smaller than min_cluster_size, the surviving part becomes a child cluster
// born at that lambda instead of continuing as the root. The root then stands
// for the whole data set and the shed points are outliers unless the root
// itself wins the stability selection.
struct CondensedNode {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  double lambda_birth = 0.0;
  double lambda_death = 0.0;
  std::size_t size = 0;
  std::vector<std::size_t> children;
  double stability = 0.0;
};

struct CondensedTree {
  std::size_t n_points = 0;
  std::size_t min_cluster_size = 0;
  std::vector<CondensedNode> nodes;
  std::vector<std::size_t> point_node;   // node each point falls out of
  std::vector<double> point_lambda;      // lambda at which it falls out

  /// True for nodes large enough to be reported as a cluster.
  bool selectable(std::size_t node) const { return nodes[node].size >= min_cluster_size; }
};

CondensedTree condense_tree(const Mst& mst, std::size_t min_cluster_size);

/// Excess-of-mass selection: flags per node, no selected node has a selected
/// ancestor, and total stability is maximal.
std::vector<bool> select_clusters(const CondensedTree& tree);

struct ClusterLabels {
  std::vector<int> labels;         // -1 for outliers, else 0..n_clusters-1
  std::vector<double> membership;  // 0 for outliers
  std::size_t n_clusters = 0;
  std::vector<std::size_t> cluster_nodes;  // condensed-tree node per label
};

ClusterLabels extract_clusters(const CondensedTree& tree);

struct HdbscanParams {
  std::size_t min_cluster_size = 5;
  std::optional<std::size_t> min_samples;  // defaults to min_cluster_size
};

/// core_distances -> mutual_reachability_mst -> condense_tree -> extract_clusters.
/// min_samples is capped at n - 1.
ClusterLabels hdbscan(const Matrix& vectors, const HdbscanParams& params);

/// TSV rows "id<TAB>label<TAB>membership" with a header line.
std::string cluster_labels_tsv(std::span<const std::string> ids, const ClusterLabels& labels);

}  // namespace onom
