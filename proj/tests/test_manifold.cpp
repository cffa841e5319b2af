#include <doctest.h>

#include <cmath>

#include "onom/error.hpp"
#include "onom/manifold.hpp"
#include "oracles.hpp"

using namespace onom;

namespace {

Matrix line(std::initializer_list<double> xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

Matrix random_points(Rng& rng, std::size_t n, std::size_t d, bool lattice) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      // Lattice coordinates create many exact distance ties.
      m(i, c) = lattice ? static_cast<double>(rng.below(4)) : rng.normal();
    }
  }
  return m;
}

}  // namespace

TEST_CASE("knn_exact small cases") {
  const auto two = knn_exact(line({0, 5}), 1, Metric::euclidean);
  CHECK(two.neighbors(0)[0] == 1);
  CHECK(two.neighbors(1)[0] == 0);

  const auto g = knn_exact(line({0, 1, 3}), 2, Metric::euclidean);
  CHECK(g.neighbors(1)[0] == 0);
  CHECK(g.neighbors(1)[1] == 2);
  CHECK(g.neighbor_distances(1)[0] == 1.0);
  CHECK(g.neighbor_distances(1)[1] == 2.0);

  CHECK_THROWS_AS(knn_exact(line({0, 1, 3}), 3, Metric::euclidean), Error);
  CHECK_THROWS_AS(knn_exact(line({0, 1, 3}), 0, Metric::euclidean), Error);
}

TEST_CASE("knn_exact agrees with an exhaustive sort") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    const std::size_t d = 1 + rng.below(8);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(n - 1, 12));
    const bool lattice = trial % 3 == 0;
    const Matrix x = random_points(rng, n, d, lattice);
    const auto metric = (trial % 2 == 0 || lattice) ? Metric::euclidean : Metric::cosine;
    const auto g = knn_exact(x, k, metric);
    for (std::size_t i = 0; i < n; ++i) {
      const auto order = metric == Metric::euclidean ? oracle::full_sort(x, i, oracle::euclid)
                                                     : oracle::full_sort(x, i, oracle::cosine);
      for (std::size_t s = 0; s < k; ++s) {
        if (lattice) {
          REQUIRE(g.neighbors(i)[s] == order[s]);
        } else {
          // Cosine through normalised rows may reorder true near-ties.
          const double got = metric == Metric::euclidean
                                 ? oracle::euclid(x, static_cast<Eigen::Index>(i), g.neighbors(i)[s])
                                 : oracle::cosine(x, static_cast<Eigen::Index>(i), g.neighbors(i)[s]);
          const double want = metric == Metric::euclidean
                                  ? oracle::euclid(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(order[s]))
                                  : oracle::cosine(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(order[s]));
          REQUIRE(got == doctest::Approx(want).epsilon(1e-12));
          REQUIRE(g.neighbor_distances(i)[s] == doctest::Approx(want).epsilon(1e-9));
        }
        REQUIRE(g.neighbors(i)[s] != i);
        if (s > 0) REQUIRE(g.neighbor_distances(i)[s - 1] <= g.neighbor_distances(i)[s]);
      }
    }
  }
}

TEST_CASE("fuzzy union formula") {
  CHECK(fuzzy_union(0.5, 0.5) == 0.75);
  CHECK(fuzzy_union(1.0, 0.0) == 1.0);
  CHECK(fuzzy_union(0.0, 1.0) == 1.0);
}

TEST_CASE("fuzzy graph invariants") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + rng.below(80);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(n - 1, 15));
    const Matrix x = random_points(rng, n, 1 + rng.below(5), trial % 4 == 0);
    const auto knn = knn_exact(x, k, Metric::euclidean);
    const auto m = smooth_knn(knn);
    for (std::size_t i = 0; i < n; ++i) {
      double top = 0.0;
      for (std::size_t s = 0; s < k; ++s) top = std::max(top, m.weights[i * k + s]);
      CHECK(top == 1.0);
      CHECK(m.weights[i * k] == 1.0);  // nearest neighbour sits at rho
    }
    const auto g = build_fuzzy_graph(knn);
    std::vector<double> best(n, 0.0);
    for (const auto& e : g.edges) {
      CHECK(e.i < e.j);
      CHECK(e.weight > 0.0);
      CHECK(e.weight <= 1.0);
      CHECK(g.weight(e.i, e.j) == g.weight(e.j, e.i));
      best[e.i] = std::max(best[e.i], e.weight);
      best[e.j] = std::max(best[e.j], e.weight);
    }
    for (double w : best) CHECK(w == 1.0);
  }
}

TEST_CASE("smooth_knn calibrates the membership sum to log2(k)") {
  Rng rng(31);
  const Matrix x = random_points(rng, 60, 3, false);
  const std::size_t k = 10;
  const auto knn = knn_exact(x, k, Metric::euclidean);
  const auto m = smooth_knn(knn);
  for (std::size_t i = 0; i < knn.n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += m.weights[i * k + j];
    CHECK(s == doctest::Approx(std::log2(10.0)).epsilon(1e-6));
  }
}

TEST_CASE("fit_ab") {
  // Independent least-squares oracle (scipy curve_fit on the same grid):
  // (0.1, 1.0) -> a = 1.57694191, b = 0.89506194
  const auto p = fit_ab(0.1, 1.0);
  CHECK(p.converged);
  CHECK(p.a == doctest::Approx(1.577).epsilon(0.01 / 1.577));
  CHECK(p.b == doctest::Approx(0.895).epsilon(0.01 / 0.895));
  CHECK(p.a == doctest::Approx(1.57694191).epsilon(1e-5));
  CHECK(p.b == doctest::Approx(0.89506194).epsilon(1e-5));

  const auto q = fit_ab(0.0, 1.0);
  double sq = 0.0;
  for (int i = 1; i <= 300; ++i) {
    const double x = 3.0 * i / 300.0;
    const double r = 1.0 / (1.0 + q.a * std::pow(x, 2.0 * q.b)) - std::exp(-x);
    sq += r * r;
  }
  CHECK(std::sqrt(sq / 300.0) < 0.05);

  const auto wide = fit_ab(0.0, 2.0);
  const double half1 = std::pow(q.a, -1.0 / (2.0 * q.b));
  const double half2 = std::pow(wide.a, -1.0 / (2.0 * wide.b));
  CHECK(half2 / half1 == doctest::Approx(2.0).epsilon(1e-3));

  CHECK_THROWS_AS(fit_ab(0.1, 0.0), Error);
}

TEST_CASE("optimize_layout: a single edge settles inside the equilibrium band") {
  FuzzyGraph g;
  g.n = 2;
  g.edges = {{0, 1, 1.0}};
  Matrix init(2, 2);
  init << -5.0, 0.0, 5.0, 0.0;
  LayoutConfig cfg;
  const Matrix y = optimize_layout(g, init, cfg);
  const double d = (y.row(0) - y.row(1)).norm();
  CHECK(d >= cfg.min_dist / 2.0);
  CHECK(d <= 2.0 * cfg.spread);
}

TEST_CASE("optimize_layout: disconnected blobs stay apart") {
  const auto [x, labels] = oracle::blobs({{0, 0, 0}, {0.5, 0.5, 0.5}}, 50, 0.2, 5);
  // Neighbourhood graph built per blob so no edge crosses between them.
  FuzzyGraph g;
  g.n = 100;
  for (int blob = 0; blob < 2; ++blob) {
    const Matrix part = x.middleRows(blob * 50, 50);
    const auto sub = build_fuzzy_graph(knn_exact(part, 8, Metric::euclidean));
    for (auto e : sub.edges) {
      e.i += static_cast<std::uint32_t>(blob * 50);
      e.j += static_cast<std::uint32_t>(blob * 50);
      g.edges.push_back(e);
    }
  }
  const Matrix init = pca_init(x, 2, 3);
  LayoutConfig cfg;
  cfg.n_epochs = 300;
  const Matrix y = optimize_layout(g, init, cfg);
  const Eigen::RowVector2d c0 = y.topRows(50).colwise().mean();
  const Eigen::RowVector2d c1 = y.bottomRows(50).colwise().mean();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < 100; ++i) {
    radius = std::max(radius, (y.row(i) - (i < 50 ? c0 : c1)).norm());
  }
  CHECK((c0 - c1).norm() > radius);
}

TEST_CASE("optimize_layout: zero epochs and reproducibility") {
  Rng rng(2);
  const Matrix x = random_points(rng, 40, 4, false);
  const auto g = build_fuzzy_graph(knn_exact(x, 6, Metric::euclidean));
  const Matrix init = pca_init(x, 2, 9);
  LayoutConfig cfg;
  cfg.n_epochs = 0;
  CHECK(optimize_layout(g, init, cfg) == init);
  cfg.n_epochs = 120;
  const Matrix y1 = optimize_layout(g, init, cfg);
  const Matrix y2 = optimize_layout(g, init, cfg);
  CHECK(y1 == y2);
  CHECK(y1.allFinite());
  cfg.seed = 43;
  CHECK(optimize_layout(g, init, cfg) != y1);
}

TEST_CASE("pca_init spans [-10, 10] per axis") {
  Rng rng(4);
  const Matrix x = random_points(rng, 30, 5, false);
  const Matrix y = pca_init(x, 2, 1);
  for (Eigen::Index c = 0; c < 2; ++c) {
    CHECK(y.col(c).minCoeff() == doctest::Approx(-10.0).epsilon(1e-4));
    CHECK(y.col(c).maxCoeff() == doctest::Approx(10.0).epsilon(1e-4));
  }
  // Wide data goes through the Gram route.
  const Matrix wide = random_points(rng, 12, 40, false);
  CHECK(pca_init(wide, 3, 1).allFinite());
}

TEST_CASE("umap_reduce preserves neighbourhoods on easy data") {
  Rng rng(12);
  const Matrix x = random_points(rng, 80, 3, false);
  LayoutConfig cfg;
  cfg.n_components = 3;
  const Matrix y = umap_reduce(x, 10, cfg, Metric::euclidean);
  CHECK(oracle::trustworthiness(x, y, 5) >= 0.95);
}

TEST_CASE("umap_reduce keeps well-separated clusters separable") {
  const auto [x, truth] = oracle::blobs({{0, 0, 0, 0, 0}, {5, 0, 0, 0, 0}, {0, 5, 5, 0, 0}}, 30,
                                        0.01, 8);
  LayoutConfig cfg;
  const Matrix y = umap_reduce(x, 10, cfg, Metric::euclidean);
  double min_center = INFINITY;
  std::vector<Eigen::RowVector2d> centers;
  for (int c = 0; c < 3; ++c) centers.push_back(y.middleRows(c * 30, 30).colwise().mean());
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) min_center = std::min(min_center, (centers[a] - centers[b]).norm());
  }
  const auto groups = oracle::single_linkage_cut(y, min_center / 2.0);
  CHECK(*std::max_element(groups.begin(), groups.end()) == 2);
  CHECK(oracle::adjusted_rand(groups, truth) == 1.0);
}

TEST_CASE("umap_reduce preconditions") {
  Rng rng(1);
  const Matrix x = random_points(rng, 10, 3, false);
  CHECK_THROWS_AS(umap_reduce(x, 10, LayoutConfig{}, Metric::euclidean), Error);
  LayoutConfig bad;
  bad.spread = 0.0;
  CHECK_THROWS_AS(umap_reduce(x, 3, bad, Metric::euclidean), Error);
}
