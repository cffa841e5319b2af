#include "onom/density_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "onom/error.hpp"
#include "onom/parallel.hpp"
#include "onom/simd/kernels.hpp"

namespace onom {

std::vector<double> core_distances(const Matrix& vectors, std::size_t min_samples) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (min_samples < 1 || min_samples >= n) {
    throw Error("core distances: need 1 <= min_samples < n (min_samples=" +
                std::to_string(min_samples) + ", n=" + std::to_string(n) + ")");
  }
  std::vector<double> core(n);
  const std::span<const double> rows{vectors.data(), static_cast<std::size_t>(vectors.size())};
  parallel_for(0, n, [&](std::size_t i) {
    std::vector<double> d(n);
    simd::squared_distances_to_rows(row_span(vectors, static_cast<Eigen::Index>(i)), rows, d);
    d[i] = d.back();
    d.pop_back();  // drop self
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), d.end());
    core[i] = std::sqrt(d[min_samples - 1]);
  });
  return core;
}

double Mst::total_weight() const {
  std::vector<double> w;
  w.reserve(edges.size());
  for (const auto& e : edges) w.push_back(e.weight);
  std::sort(w.begin(), w.end());
  return std::accumulate(w.begin(), w.end(), 0.0);
}

Mst mutual_reachability_mst(const Matrix& vectors, std::span<const double> core) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (core.size() != n) throw Error("core distance count does not match point count");
  Mst mst;
  mst.n = n;
  if (n < 2) return mst;
  const std::span<const double> rows{vectors.data(), static_cast<std::size_t>(vectors.size())};
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> key(n, inf);
  std::vector<std::uint32_t> parent(n, 0);
  std::vector<bool> in_tree(n, false);
  std::vector<double> d(n);

  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t added = 1; added < n; ++added) {
    simd::squared_distances_to_rows(row_span(vectors, static_cast<Eigen::Index>(current)), rows, d);
    std::size_t next = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double reach = std::max({core[current], core[v], std::sqrt(d[v])});
      if (reach < key[v] || (reach == key[v] && current < parent[v])) {
        key[v] = reach;
        parent[v] = static_cast<std::uint32_t>(current);
      }
      if (next == n || key[v] < key[next]) next = v;
    }
    in_tree[next] = true;
    const auto a = std::min<std::uint32_t>(parent[next], static_cast<std::uint32_t>(next));
    const auto b = std::max<std::uint32_t>(parent[next], static_cast<std::uint32_t>(next));
    mst.edges.push_back({a, b, key[next]});
    current = next;
  }
  return mst;
}

namespace {

struct Dendrogram {
  // Internal node k (k >= n) merges left[k-n] and right[k-n] at distance[k-n].
  std::size_t n = 0;
  std::vector<std::size_t> left, right, size, first_point;
  std::vector<double> distance;

  std::size_t root() const { return 2 * n - 2; }
  std::size_t node_size(std::size_t v) const { return v < n ? 1 : size[v - n]; }
  std::size_t min_point(std::size_t v) const { return v < n ? v : first_point[v - n]; }
  bool is_leaf(std::size_t v) const { return v < n; }
};

Dendrogram single_linkage(const Mst& mst) {
  std::vector<MstEdge> edges = mst.edges;
  std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
  });
  const std::size_t n = mst.n;
  Dendrogram dg;
  dg.n = n;
  std::vector<std::size_t> uf(2 * n - 1);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](std::size_t x) {
    while (uf[x] != x) {
      uf[x] = uf[uf[x]];
      x = uf[x];
    }
    return x;
  };
  for (const auto& e : edges) {
    const std::size_t ra = find(e.a);
    const std::size_t rb = find(e.b);
    const std::size_t node = n + dg.left.size();
    // The side holding the lower point index goes left, so labels follow input order.
    const bool a_first = dg.min_point(ra) < dg.min_point(rb);
    dg.left.push_back(a_first ? ra : rb);
    dg.right.push_back(a_first ? rb : ra);
    dg.first_point.push_back(std::min(dg.min_point(ra), dg.min_point(rb)));
    dg.distance.push_back(e.weight);
    dg.size.push_back(dg.node_size(ra) + dg.node_size(rb));
    uf[ra] = node;
    uf[rb] = node;
  }
  return dg;
}

void collect_leaves(const Dendrogram& dg, std::size_t v, std::vector<std::size_t>& out) {
  std::vector<std::size_t> stack{v};
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    if (dg.is_leaf(x)) {
      out.push_back(x);
    } else {
      stack.push_back(dg.right[x - dg.n]);
      stack.push_back(dg.left[x - dg.n]);
    }
  }
}

}  // namespace

CondensedTree condense_tree(const Mst& mst, std::size_t min_cluster_size) {
  if (min_cluster_size < 2) throw Error("min_cluster_size must be at least 2");
  const std::size_t n = mst.n;
  if (n >= 1 && mst.edges.size() + 1 != n) throw Error("MST must have n - 1 edges");

  CondensedTree tree;
  tree.n_points = n;
  tree.min_cluster_size = min_cluster_size;
  tree.point_node.assign(n, 0);
  tree.point_lambda.assign(n, 0.0);
  tree.nodes.push_back({0, std::nullopt, 0.0, 0.0, n, {}, 0.0});
  if (n < 2) return tree;

  double min_positive = std::numeric_limits<double>::infinity();
  for (const auto& e : mst.edges) {
    if (e.weight > 0.0) min_positive = std::min(min_positive, e.weight);
  }
  const double floor = std::isfinite(min_positive) ? 0.5 * min_positive : 1.0;
  auto lambda_of = [floor](double dist) { return 1.0 / std::max(dist, floor); };

  const Dendrogram dg = single_linkage(mst);

  auto shed = [&](std::size_t dnode, std::size_t cluster, double lambda) {
    std::vector<std::size_t> leaves;
    collect_leaves(dg, dnode, leaves);
    for (auto p : leaves) {
      tree.point_node[p] = cluster;
      tree.point_lambda[p] = lambda;
    }
  };
  auto new_cluster = [&](std::size_t parent, double lambda, std::size_t size) {
    const std::size_t id = tree.nodes.size();
    tree.nodes.push_back({id, parent, lambda, lambda, size, {}, 0.0});
    tree.nodes[parent].children.push_back(id);
    return id;
  };

  bool root_open = true;  // root has not yet handed over to a main child
  struct Work {
    std::size_t dnode;
    std::size_t cluster;
  };
  std::vector<Work> stack{{dg.root(), 0}};
  while (!stack.empty()) {
    auto [dnode, cluster] = stack.back();
    stack.pop_back();
    if (dg.is_leaf(dnode)) {
      // Only reachable for a lone point carried down as a cluster; mcs >= 2 forbids it.
      shed(dnode, cluster, tree.nodes[cluster].lambda_birth);
      continue;
    }
    const std::size_t k = dnode - n;
    const double lambda = lambda_of(dg.distance[k]);
    const std::size_t l = dg.left[k], r = dg.right[k];
    const bool big_l = dg.node_size(l) >= min_cluster_size;
    const bool big_r = dg.node_size(r) >= min_cluster_size;
    tree.nodes[cluster].lambda_death = std::max(tree.nodes[cluster].lambda_death, lambda);

    if (big_l && big_r) {
      const std::size_t cl = new_cluster(cluster, lambda, dg.node_size(l));
      const std::size_t cr = new_cluster(cluster, lambda, dg.node_size(r));
      if (cluster == 0) root_open = false;
      stack.push_back({r, cr});
      stack.push_back({l, cl});
    } else if (!big_l && !big_r) {
      shed(l, cluster, lambda);
      shed(r, cluster, lambda);
    } else {
      const std::size_t big = big_l ? l : r;
      shed(big_l ? r : l, cluster, lambda);
      std::size_t next_cluster = cluster;
      if (cluster == 0 && root_open && !dg.is_leaf(big) &&
          dg.distance[big - n] < dg.distance[k]) {
        next_cluster = new_cluster(0, lambda, dg.node_size(big));
        root_open = false;
      }
      stack.push_back({big, next_cluster});
    }
  }

  for (std::size_t p = 0; p < n; ++p) {
    auto& node = tree.nodes[tree.point_node[p]];
    node.stability += tree.point_lambda[p] - node.lambda_birth;
    node.lambda_death = std::max(node.lambda_death, tree.point_lambda[p]);
  }
  for (auto& node : tree.nodes) {
    for (auto c : node.children) {
      node.stability += static_cast<double>(tree.nodes[c].size) *
                        (tree.nodes[c].lambda_birth - node.lambda_birth);
    }
  }
  return tree;
}

std::vector<bool> select_clusters(const CondensedTree& tree) {
  const std::size_t m = tree.nodes.size();
  std::vector<bool> chosen(m, false);
  std::vector<double> best(m, 0.0);
  // Children always carry larger ids than their parent.
  for (std::size_t i = m; i-- > 0;) {
    const auto& node = tree.nodes[i];
    double below = 0.0;
    for (auto c : node.children) below += best[c];
    if (tree.selectable(i) && (node.children.empty() || node.stability >= below)) {
      chosen[i] = true;
      best[i] = node.stability;
    } else {
      best[i] = below;
    }
  }
  // Keep only the topmost chosen node on every root-to-leaf path.
  std::vector<bool> selected(m, false);
  std::vector<bool> covered(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& parent = tree.nodes[i].parent;
    covered[i] = parent && (covered[*parent] || selected[*parent]);
    selected[i] = chosen[i] && !covered[i];
  }
  return selected;
}

ClusterLabels extract_clusters(const CondensedTree& tree) {
  const std::vector<bool> selected = select_clusters(tree);
  const std::size_t m = tree.nodes.size();
  ClusterLabels out;
  std::vector<int> node_label(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    if (selected[i]) {
      node_label[i] = static_cast<int>(out.n_clusters++);
      out.cluster_nodes.push_back(i);
    } else if (const auto& parent = tree.nodes[i].parent) {
      node_label[i] = node_label[*parent];  // parents precede children
    }
  }
  const std::size_t n = tree.n_points;
  out.labels.assign(n, -1);
  out.membership.assign(n, 0.0);
  std::vector<double> max_lambda(out.n_clusters, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const int label = node_label[tree.point_node[p]];
    out.labels[p] = label;
    if (label >= 0) {
      auto& mx = max_lambda[static_cast<std::size_t>(label)];
      mx = std::max(mx, tree.point_lambda[p]);
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (out.labels[p] < 0) continue;
    const double mx = max_lambda[static_cast<std::size_t>(out.labels[p])];
    out.membership[p] = mx > 0.0 ? std::clamp(tree.point_lambda[p] / mx, 0.0, 1.0) : 1.0;
  }
  return out;
}

ClusterLabels hdbscan(const Matrix& vectors, const HdbscanParams& params) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (n < 2) throw Error("hdbscan needs at least 2 points");
  const std::size_t min_samples =
      std::min(params.min_samples.value_or(params.min_cluster_size), n - 1);
  const auto core = core_distances(vectors, std::max<std::size_t>(1, min_samples));
  const Mst mst = mutual_reachability_mst(vectors, core);
  return extract_clusters(condense_tree(mst, params.min_cluster_size));
}

std::string cluster_labels_tsv(std::span<const std::string> ids, const ClusterLabels& labels) {
  if (ids.size() != labels.labels.size()) throw Error("id count does not match label count");
  std::string out = "id\tlabel\tmembership\n";
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, "\t%d\t%.6f\n", labels.labels[i], labels.membership[i]);
    out += ids[i];
    out += buf;
  }
  return out;
}

}  // namespace onom
