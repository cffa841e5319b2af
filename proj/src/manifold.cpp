#include "onom/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "onom/error.hpp"
#include "onom/parallel.hpp"
#include "onom/rng.hpp"

namespace onom {

KnnGraph knn_exact(const Matrix& vectors, std::size_t k, Metric metric) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (k < 1 || k >= n) {
    throw Error("knn: need 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  const Matrix prepared = prepare_points(vectors, metric);
  KnnGraph g;
  g.n = n;
  g.k = k;
  g.indices.resize(n * k);
  g.distances.resize(n * k);
  parallel_for(0, n, [&](std::size_t i) {
    std::vector<double> dist(n);
    distances_from(prepared, static_cast<Eigen::Index>(i), metric, dist);
    std::vector<std::uint32_t> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(static_cast<std::uint32_t>(j));
    }
    auto closer = [&](std::uint32_t x, std::uint32_t y) {
      return dist[x] < dist[y] || (dist[x] == dist[y] && x < y);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      closer);
    for (std::size_t s = 0; s < k; ++s) {
      g.indices[i * k + s] = order[s];
      g.distances[i * k + s] = dist[order[s]];
    }
  });
  return g;
}

DirectedMemberships smooth_knn(const KnnGraph& knn, double local_connectivity) {
  if (!(local_connectivity > 0.0)) throw Error("local_connectivity must be positive");
  const std::size_t n = knn.n;
  const std::size_t k = knn.k;
  const double target = std::log2(static_cast<double>(k));

  double global_mean = 0.0;
  for (double d : knn.distances) global_mean += d;
  global_mean /= static_cast<double>(knn.distances.size());

  DirectedMemberships out;
  out.rho.assign(n, 0.0);
  out.sigma.assign(n, 1.0);
  out.weights.assign(n * k, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto d = knn.neighbor_distances(i);
    std::vector<double> nonzero;
    for (double x : d) {
      if (x > 0.0) nonzero.push_back(x);
    }
    // rho: distance to the local_connectivity-th nearest distinct neighbour.
    double rho = 0.0;
    if (static_cast<double>(nonzero.size()) >= local_connectivity) {
      const auto index = static_cast<std::size_t>(std::floor(local_connectivity));
      const double frac = local_connectivity - static_cast<double>(index);
      if (index > 0) {
        rho = nonzero[index - 1];
        if (frac > 1e-5 && index < nonzero.size()) rho += frac * (nonzero[index] - nonzero[index - 1]);
      } else {
        rho = frac * nonzero[0];
      }
    } else if (!nonzero.empty()) {
      rho = nonzero.back();
    }

    double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(k);
    if (mean <= 0.0) mean = global_mean;
    double lo = 1e-3 * mean;
    double hi = d.back();
    if (hi < lo) hi = lo;

    auto membership_sum = [&](double sigma) {
      double s = 0.0;
      for (double x : d) s += std::exp(-std::max(0.0, x - rho) / sigma);
      return s;
    };
    double sigma = hi;
    if (lo <= 0.0) {
      sigma = 1.0;  // every neighbour sits at distance rho; weights are all 1
    } else {
      double a = lo;
      double b = hi;
      for (int step = 0; step < 64; ++step) {
        const double mid = 0.5 * (a + b);
        if (membership_sum(mid) > target) {
          b = mid;
        } else {
          a = mid;
        }
      }
      sigma = 0.5 * (a + b);
    }
    out.rho[i] = rho;
    out.sigma[i] = sigma;
    for (std::size_t s = 0; s < k; ++s) {
      out.weights[i * k + s] = std::exp(-std::max(0.0, d[s] - rho) / sigma);
    }
  }
  return out;
}

double FuzzyGraph::weight(std::uint32_t a, std::uint32_t b) const {
  if (a > b) std::swap(a, b);
  const auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{a, b},
                                   [](const FuzzyEdge& e, const std::pair<std::uint32_t, std::uint32_t>& key) {
                                     return std::pair{e.i, e.j} < key;
                                   });
  return (it != edges.end() && it->i == a && it->j == b) ? it->weight : 0.0;
}

FuzzyGraph build_fuzzy_graph(const KnnGraph& knn, double local_connectivity) {
  const DirectedMemberships m = smooth_knn(knn, local_connectivity);
  struct Half {
    std::uint32_t i, j;
    bool forward;  // true when the directed edge runs i -> j
    double w;
  };
  std::vector<Half> halves;
  halves.reserve(knn.indices.size());
  for (std::size_t p = 0; p < knn.n; ++p) {
    for (std::size_t s = 0; s < knn.k; ++s) {
      const double w = m.weights[p * knn.k + s];
      if (w <= 0.0) continue;
      const auto q = knn.indices[p * knn.k + s];
      const auto src = static_cast<std::uint32_t>(p);
      halves.push_back(src < q ? Half{src, q, true, w} : Half{q, src, false, w});
    }
  }
  std::sort(halves.begin(), halves.end(), [](const Half& x, const Half& y) {
    return std::tie(x.i, x.j, x.forward) < std::tie(y.i, y.j, y.forward);
  });
  FuzzyGraph g;
  g.n = knn.n;
  for (std::size_t h = 0; h < halves.size();) {
    double fwd = 0.0;
    double bwd = 0.0;
    std::size_t e = h;
    for (; e < halves.size() && halves[e].i == halves[h].i && halves[e].j == halves[h].j; ++e) {
      (halves[e].forward ? fwd : bwd) = halves[e].w;
    }
    g.edges.push_back({halves[h].i, halves[h].j, fuzzy_union(fwd, bwd)});
    h = e;
  }
  return g;
}

CurveParams fit_ab(double min_dist, double spread) {
  if (!(spread > 0.0)) throw Error("spread must be positive");
  if (!(min_dist >= 0.0)) throw Error("min_dist must be nonnegative");
  constexpr int kPoints = 300;
  std::vector<double> xs(kPoints), ys(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * spread * static_cast<double>(i + 1) / kPoints;
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto sse_at = [&](double a, double b) {
    double s = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      s += r * r;
    }
    return s;
  };

  double a = 1.0, b = 1.0;
  double sse = sse_at(a, b);
  double lambda = 1e-3;
  CurveParams out;
  for (int iter = 0; iter < 200; ++iter) {
    // Normal equations of the damped Gauss-Newton step.
    double jaa = 0, jab = 0, jbb = 0, ga = 0, gb = 0;
    for (int i = 0; i < kPoints; ++i) {
      const double p = std::pow(xs[i], 2.0 * b);
      const double den = 1.0 + a * p;
      const double f = 1.0 / den;
      const double r = f - ys[i];
      const double da = -p / (den * den);
      const double db = -a * p * 2.0 * std::log(xs[i]) / (den * den);
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    bool accepted = false;
    while (lambda < 1e12) {
      const double m00 = jaa * (1.0 + lambda);
      const double m11 = jbb * (1.0 + lambda);
      const double det = m00 * m11 - jab * jab;
      if (det == 0.0) {
        lambda *= 10.0;
        continue;
      }
      const double step_a = -(m11 * ga - jab * gb) / det;
      const double step_b = -(m00 * gb - jab * ga) / det;
      const double na = a + step_a;
      const double nb = b + step_b;
      const double nsse = (na > 0.0 && nb > 0.0) ? sse_at(na, nb) : INFINITY;
      if (nsse < sse) {
        const bool tiny = (sse - nsse) <= 1e-15 * std::max(sse, 1e-300) &&
                          std::abs(step_a) <= 1e-12 * a && std::abs(step_b) <= 1e-12 * b;
        a = na;
        b = nb;
        sse = nsse;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (tiny) out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No improving step at any damping: a (local) minimum.
    if (!accepted || out.converged) {
      out.converged = true;
      break;
    }
  }
  out.a = a;
  out.b = b;
  return out;
}

void LayoutConfig::validate() const {
  if (n_components < 1) throw Error("n_components must be positive");
  if (!(spread > 0.0)) throw Error("spread must be positive");
  if (!(min_dist >= 0.0)) throw Error("min_dist must be nonnegative");
  if (!(min_dist < 4.0 * spread)) throw Error("min_dist must be below 4 * spread");
  if (negative_sample_rate < 1) throw Error("negative_sample_rate must be positive");
  if (a && !(std::isfinite(*a) && *a > 0.0)) throw Error("curve parameter a must be positive");
  if (b && !(std::isfinite(*b) && *b > 0.0)) throw Error("curve parameter b must be positive");
}

namespace {

constexpr double clip4(double g) { return g > 4.0 ? 4.0 : (g < -4.0 ? -4.0 : g); }

struct DirectedEdge {
  std::uint32_t head;
  std::uint32_t tail;
  double epochs_per_sample;
};

// Coordinate access shared by the sequential and hogwild paths. The parallel
// path goes through atomic_ref so concurrent updates are races on values, not
// undefined behaviour.
template <bool Atomic>
struct Coords {
  double* data;
  std::size_t dim;

  double get(std::size_t p, std::size_t c) const {
    if constexpr (Atomic) {
      return std::atomic_ref<double>(data[p * dim + c]).load(std::memory_order_relaxed);
    } else {
      return data[p * dim + c];
    }
  }
  void add(std::size_t p, std::size_t c, double v) const {
    if constexpr (Atomic) {
      std::atomic_ref<double> ref(data[p * dim + c]);
      ref.store(ref.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
    } else {
      data[p * dim + c] += v;
    }
  }
};

template <bool Atomic>
void process_edge(const Coords<Atomic>& y, const DirectedEdge& e, std::size_t n, double a,
                  double b, double alpha, std::size_t n_neg, Rng& rng, std::vector<double>& cur,
                  std::vector<double>& other) {
  const std::size_t dim = y.dim;
  const std::uint32_t j = e.head;
  for (std::size_t c = 0; c < dim; ++c) {
    cur[c] = y.get(j, c);
    other[c] = y.get(e.tail, c);
  }
  double dist_sq = 0.0;
  for (std::size_t c = 0; c < dim; ++c) dist_sq += (cur[c] - other[c]) * (cur[c] - other[c]);
  if (dist_sq > 0.0) {
    const double coeff =
        -2.0 * a * b * std::pow(dist_sq, b - 1.0) / (a * std::pow(dist_sq, b) + 1.0);
    for (std::size_t c = 0; c < dim; ++c) {
      const double g = clip4(coeff * (cur[c] - other[c]));
      cur[c] += g * alpha;
      y.add(j, c, g * alpha);
      y.add(e.tail, c, -g * alpha);
    }
  }
  for (std::size_t s = 0; s < n_neg; ++s) {
    const auto k = static_cast<std::uint32_t>(rng.below(n));
    if (k == j) continue;
    for (std::size_t c = 0; c < dim; ++c) other[c] = y.get(k, c);
    double d2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) d2 += (cur[c] - other[c]) * (cur[c] - other[c]);
    const double coeff =
        d2 > 0.0 ? 2.0 * b / ((0.001 + d2) * (a * std::pow(d2, b) + 1.0)) : 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double g = coeff > 0.0 ? clip4(coeff * (cur[c] - other[c])) : 4.0;
      cur[c] += g * alpha;
      y.add(j, c, g * alpha);
    }
  }
}

}  // namespace

Matrix optimize_layout(const FuzzyGraph& graph, const Matrix& init, const LayoutConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(init.rows()) != graph.n) {
    throw Error("layout init has " + std::to_string(init.rows()) + " rows for a graph of " +
                std::to_string(graph.n) + " points");
  }
  if (!init.allFinite()) throw Error("layout init must be finite");
  Matrix y = init;
  if (cfg.n_epochs == 0 || graph.edges.empty()) return y;

  double a = 0.0, b = 0.0;
  if (cfg.a && cfg.b) {
    a = *cfg.a;
    b = *cfg.b;
  } else {
    const CurveParams fitted = fit_ab(cfg.min_dist, cfg.spread);
    a = cfg.a.value_or(fitted.a);
    b = cfg.b.value_or(fitted.b);
  }

  double max_w = 0.0;
  for (const auto& e : graph.edges) max_w = std::max(max_w, e.weight);
  const double n_epochs = static_cast<double>(cfg.n_epochs);
  std::vector<DirectedEdge> edges;
  for (const auto& e : graph.edges) {
    // Edges that would be sampled less than once over the run are dropped.
    if (e.weight < max_w / n_epochs) continue;
    const double eps = max_w / e.weight;
    edges.push_back({e.i, e.j, eps});
    edges.push_back({e.j, e.i, eps});
  }
  const std::size_t m = edges.size();
  std::vector<double> next_sample(m), per_negative(m), next_negative(m);
  for (std::size_t i = 0; i < m; ++i) {
    next_sample[i] = edges[i].epochs_per_sample;
    per_negative[i] = edges[i].epochs_per_sample / static_cast<double>(cfg.negative_sample_rate);
    next_negative[i] = per_negative[i];
  }

  const std::size_t n = graph.n;
  const std::size_t dim = static_cast<std::size_t>(y.cols());

  auto run_range = [&](auto coords, std::size_t lo, std::size_t hi, std::size_t epoch, Rng& rng) {
    std::vector<double> cur(dim), other(dim);
    const double alpha = 1.0 - static_cast<double>(epoch) / n_epochs;
    const double now = static_cast<double>(epoch);
    for (std::size_t i = lo; i < hi; ++i) {
      if (next_sample[i] > now) continue;
      const auto n_neg =
          static_cast<std::size_t>(std::max(0.0, (now - next_negative[i]) / per_negative[i]));
      process_edge(coords, edges[i], n, a, b, alpha, n_neg, rng, cur, other);
      next_sample[i] += edges[i].epochs_per_sample;
      next_negative[i] += static_cast<double>(n_neg) * per_negative[i];
    }
  };

  const unsigned workers = cfg.parallel ? std::max(1u, thread_count()) : 1u;
  if (workers == 1) {
    Rng rng(derive_seed(cfg.seed, "layout"));
    const Coords<false> coords{y.data(), dim};
    for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) run_range(coords, 0, m, epoch, rng);
  } else {
    const Coords<true> coords{y.data(), dim};
    const std::size_t chunk = (m + workers - 1) / workers;
    for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
      parallel_for(0, workers, [&](std::size_t w) {
        Rng rng(derive_seed(cfg.seed ^ (epoch * 0x9e3779b97f4a7c15ULL + w), "layout"));
        run_range(coords, w * chunk, std::min(m, (w + 1) * chunk), epoch, rng);
      });
    }
  }
  return y;
}

Matrix pca_init(const Matrix& vectors, std::size_t n_components, std::uint64_t seed) {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index d = vectors.cols();
  const auto nc = static_cast<Eigen::Index>(n_components);
  Matrix centered = vectors.rowwise() - vectors.colwise().mean();
  Matrix coords = Matrix::Zero(n, nc);

  if (d <= n) {
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::Index take = std::min(nc, d);
    for (Eigen::Index c = 0; c < take; ++c) {
      coords.col(c) = centered * eig.eigenvectors().col(d - 1 - c);
    }
  } else {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::Index take = std::min(nc, n);
    for (Eigen::Index c = 0; c < take; ++c) {
      const double lambda = std::max(0.0, eig.eigenvalues()(n - 1 - c));
      coords.col(c) = eig.eigenvectors().col(n - 1 - c) * std::sqrt(lambda);
    }
  }

  Rng rng(derive_seed(seed, "pca-init"));
  for (Eigen::Index c = 0; c < nc; ++c) {
    auto col = coords.col(c);
    // Eigenvector signs are arbitrary; pin the largest-magnitude entry positive.
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(col(i)) > std::abs(col(arg))) arg = i;
    }
    if (col(arg) < 0.0) col = -col;
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
      col = ((col.array() - lo) * (20.0 / (hi - lo)) - 10.0).matrix();
    } else {
      col.setZero();
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < nc; ++c) coords(i, c) += (2.0 * rng.uniform() - 1.0) * 1e-4;
  }
  return coords;
}

Matrix umap_reduce(const Matrix& vectors, std::size_t n_neighbors, const LayoutConfig& cfg,
                   Metric metric) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (n < n_neighbors + 1) {
    throw Error("umap: need at least n_neighbors + 1 = " + std::to_string(n_neighbors + 1) +
                " points, got " + std::to_string(n));
  }
  if (!vectors.allFinite()) throw Error("umap: input vectors must be finite");
  const KnnGraph knn = knn_exact(vectors, n_neighbors, metric);
  const FuzzyGraph graph = build_fuzzy_graph(knn);
  const Matrix init = pca_init(vectors, cfg.n_components, cfg.seed);
  return optimize_layout(graph, init, cfg);
}

}  // namespace onom
