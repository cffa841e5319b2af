#include "onom/sense_induction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "onom/error.hpp"
#include "onom/rng.hpp"
#include "onom/svg.hpp"

namespace onom {

namespace {

double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double d = a(i, c) - b(j, c);
    s += d * d;
  }
  return s;
}

struct Assignment {
  std::vector<int> labels;
  double sse = 0.0;
};

// Nearest centroid per point (lower index on ties). Emptied clusters take the
// point farthest from its centroid, which becomes their new centre.
Assignment assign(const Matrix& x, Matrix& centroids) {
  const Eigen::Index n = x.rows(), k = centroids.rows();
  Assignment a;
  a.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < k; ++c) {
      const double d = sq_dist(x, i, centroids, c);
      if (d < best) {
        best = d;
        a.labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
      }
    }
    dist[static_cast<std::size_t>(i)] = best;
    ++sizes[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)])];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (sizes[static_cast<std::size_t>(a.labels[i])] > 1 && dist[i] > far_d) {
        far_d = dist[i];
        far = i;
      }
    }
    --sizes[static_cast<std::size_t>(a.labels[far])];
    a.labels[far] = static_cast<int>(c);
    ++sizes[static_cast<std::size_t>(c)];
    dist[far] = 0.0;
    centroids.row(c) = x.row(static_cast<Eigen::Index>(far));
  }
  for (double d : dist) a.sse += d;
  return a;
}

Matrix means(const Matrix& x, const std::vector<int>& labels, Eigen::Index k) {
  Matrix c = Matrix::Zero(k, x.cols());
  std::vector<double> count(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    c.row(l) += x.row(i);
    count[static_cast<std::size_t>(l)] += 1.0;
  }
  for (Eigen::Index j = 0; j < k; ++j) c.row(j) /= count[static_cast<std::size_t>(j)];
  return c;
}

Matrix seed_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  Matrix c(static_cast<Eigen::Index>(k), x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.below(n)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(x, static_cast<Eigen::Index>(i), c, static_cast<Eigen::Index>(j - 1)));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] == 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > r) break;
      }
    } else {
      pick = rng.below(n);
    }
    c.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(pick));
  }
  return c;
}

KMeansResult kmeans_once(const Matrix& x, std::size_t k, Rng& rng, std::size_t max_iter) {
  KMeansResult r;
  Matrix centroids = seed_plus_plus(x, k, rng);
  Assignment a = assign(x, centroids);
  r.sse_history.push_back(a.sse);
  const auto kk = static_cast<Eigen::Index>(k);
  while (r.iterations < max_iter) {
    ++r.iterations;
    centroids = means(x, a.labels, kk);
    Assignment next = assign(x, centroids);
    const bool same = next.labels == a.labels;
    a = std::move(next);
    r.sse_history.push_back(a.sse);
    if (same) {
      r.converged = true;
      break;
    }
  }
  r.labels = std::move(a.labels);
  r.centroids = means(x, r.labels, kk);
  r.sse = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) r.sse += sq_dist(x, i, r.centroids, r.labels[static_cast<std::size_t>(i)]);
  if (r.sse < r.sse_history.back()) r.sse_history.push_back(r.sse);
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                    std::size_t n_init) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1) throw Error("k must be at least 1");
  if (k > n) throw Error("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " points");
  if (max_iter < 1) throw Error("max_iter must be at least 1");
  if (n_init < 1) throw Error("n_init must be at least 1");
  if (!points.allFinite()) throw Error("k-means input must be finite");
  KMeansResult best;
  for (std::size_t run = 0; run < n_init; ++run) {
    Rng rng(derive_seed(seed, "kmeans-" + std::to_string(run)));
    KMeansResult r = kmeans_once(points, k, rng, max_iter);
    if (run == 0 || r.sse < best.sse) best = std::move(r);
  }
  return best;
}

double LinearBoundary::decision(std::span<const double> x) const {
  double s = b;
  for (Eigen::Index i = 0; i < w.size(); ++i) s += w(i) * x[static_cast<std::size_t>(i)];
  return s;
}

LinearBoundary linear_boundary(const Matrix& points, std::span<const int> labels,
                               const SvmConfig& cfg) {
  const Eigen::Index n = points.rows(), dim = points.cols();
  if (static_cast<std::size_t>(n) != labels.size()) throw Error("label count does not match point count");
  if (!(cfg.lambda > 0.0) || !(cfg.eta0 > 0.0) || cfg.epochs < 1) throw Error("invalid SVM settings");
  bool has0 = false, has1 = false;
  for (int l : labels) {
    if (l == 0) has0 = true;
    else if (l == 1) has1 = true;
    else throw Error("SVM labels must be 0 or 1");
  }
  if (!has0 || !has1) throw Error("SVM needs both labels present");

  Vector mean = points.colwise().mean().transpose();
  Vector scale(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double var = (points.col(j).array() - mean(j)).square().mean();
    scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Matrix z(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) z(i, j) = (points(i, j) - mean(j)) / scale(j);
  }
  std::vector<double> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  auto objective = [&](const Vector& w, double b) {
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * (z.row(i).dot(w) + b));
    }
    return 0.5 * cfg.lambda * w.squaredNorm() + hinge / static_cast<double>(n);
  };

  Rng rng(cfg.seed);
  const double t0 = 1.0 / (cfg.lambda * cfg.eta0);
  Vector w = Vector::Zero(dim), w_avg = Vector::Zero(dim), w_best = Vector::Zero(dim);
  double b = 0.0, b_avg = 0.0, b_best = 0.0;
  double best = objective(w_best, b_best);
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  LinearBoundary out;
  double t = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (auto i : order) {
      const auto row = static_cast<Eigen::Index>(i);
      const double eta = 1.0 / (cfg.lambda * (t + t0));
      const double margin = y[i] * (z.row(row).dot(w) + b);
      w *= 1.0 - eta * cfg.lambda;
      if (margin < 1.0) {
        w += eta * y[i] * z.row(row).transpose();
        b += eta * y[i];
      }
      t += 1.0;
      w_avg += (w - w_avg) / t;
      b_avg += (b - b_avg) / t;
    }
    const double obj = objective(w_avg, b_avg);
    if (obj < best) {
      best = obj;
      w_best = w_avg;
      b_best = b_avg;
    }
    out.objective_history.push_back(best);
  }
  out.objective = best;
  out.w.resize(dim);
  out.b = b_best;
  for (Eigen::Index j = 0; j < dim; ++j) {
    out.w(j) = w_best(j) / scale(j);
    out.b -= w_best(j) * mean(j) / scale(j);
  }
  return out;
}

SenseModel induce_senses(const EmbeddedCorpus& corpus, const SenseParams& params,
                         std::uint64_t seed) {
  const std::size_t n = corpus.size();
  if (n < params.k) throw Error("corpus has fewer instances than k");
  LayoutConfig layout = params.layout;
  layout.n_components = 2;
  layout.seed = seed;
  SenseModel model;
  for (const auto& d : corpus.docs) model.ids.push_back(d.id);
  model.points = umap_reduce(corpus.vectors, params.n_neighbors, layout, params.metric);
  auto km = kmeans(model.points, params.k, derive_seed(seed, "senses"), params.max_iter, params.n_init);
  model.labels = std::move(km.labels);
  model.centroids = std::move(km.centroids);
  if (params.k == 2) {
    SvmConfig svm;
    svm.seed = derive_seed(seed, "svm");
    model.boundary = linear_boundary(model.points, model.labels, svm);
  }
  return model;
}

ObjectProfile profile_clusters(std::span<const int> labels,
                               std::span<const std::optional<std::string>> objects,
                               std::size_t top_n) {
  if (labels.size() != objects.size()) throw Error("objects are not aligned with the instances");
  if (labels.empty()) throw Error("no instances to profile");
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw Error("profile labels must be non-negative");
    k = std::max(k, l + 1);
  }
  std::vector<std::map<std::string, std::size_t>> counts(static_cast<std::size_t>(k));
  ObjectProfile out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& c = out[static_cast<std::size_t>(labels[i])];
    ++c.size;
    if (objects[i]) ++counts[static_cast<std::size_t>(labels[i])][*objects[i]];
  }
  const double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].label = static_cast<int>(c);
    out[c].share = static_cast<double>(out[c].size) / n;
    out[c].percent = static_cast<int>(std::lround(100.0 * out[c].share));
    std::vector<std::pair<std::string, std::size_t>> list(counts[c].begin(), counts[c].end());
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (list.size() > top_n) list.resize(top_n);
    out[c].objects = std::move(list);
  }
  return out;
}

std::string sense_points_tsv(const SenseModel& model) {
  std::string out = "id\tx\ty\tlabel\n";
  char buf[96];
  for (Eigen::Index i = 0; i < model.points.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\t%d\n", model.points(i, 0), model.points(i, 1),
                  model.labels[static_cast<std::size_t>(i)]);
    out += model.ids[static_cast<std::size_t>(i)];
    out += buf;
  }
  return out;
}

std::string sense_model_json(const SenseModel& model) {
  nlohmann::ordered_json j;
  j["k"] = model.centroids.rows();
  j["centroids"] = nlohmann::ordered_json::array();
  for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) {
    j["centroids"].push_back({model.centroids(c, 0), model.centroids(c, 1)});
  }
  if (model.boundary) {
    j["boundary"] = {{"w", {model.boundary->w(0), model.boundary->w(1)}},
                     {"b", model.boundary->b},
                     {"objective", model.boundary->objective}};
  } else {
    j["boundary"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string object_profile_json(const ObjectProfile& profile) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& c : profile) {
    nlohmann::ordered_json entry;
    entry["cluster"] = c.label;
    entry["size"] = c.size;
    entry["share"] = c.share;
    entry["percent"] = std::to_string(c.percent) + "%";
    entry["objects"] = nlohmann::ordered_json::array();
    for (const auto& [lemma, count] : c.objects) entry["objects"].push_back({{"lemma", lemma}, {"count", count}});
    out.push_back(std::move(entry));
  }
  return out.dump(2) + "\n";
}

std::string sense_scatter_svg(const SenseModel& model, double width, double height) {
  const Matrix& p = model.points;
  double x0 = p.col(0).minCoeff(), x1 = p.col(0).maxCoeff();
  double y0 = p.col(1).minCoeff(), y1 = p.col(1).maxCoeff();
  const double px = std::max(x1 - x0, 1e-9) * 0.05, py = std::max(y1 - y0, 1e-9) * 0.05;
  x0 -= px;
  x1 += px;
  y0 -= py;
  y1 += py;
  const double margin = 40.0;
  auto sx = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
  auto sy = [&](double y) { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); };

  SvgWriter svg(width, height);
  svg.rect(0, 0, width, height, "#ffffff");
  svg.rect(margin, margin, width - 2 * margin, height - 2 * margin, "none", "#999999");
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    svg.circle(sx(p(i, 0)), sy(p(i, 1)), 3.0, palette_color(static_cast<std::size_t>(model.labels[static_cast<std::size_t>(i)])));
  }
  for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) {
    svg.circle(sx(model.centroids(c, 0)), sy(model.centroids(c, 1)), 7.0, "none", "#000000", 2.0);
  }
  if (model.boundary) {
    const double wx = model.boundary->w(0), wy = model.boundary->w(1), b = model.boundary->b;
    // Intersections of w.x + b = 0 with the plot box.
    std::vector<std::pair<double, double>> hits;
    if (wy != 0.0) {
      for (double x : {x0, x1}) {
        const double y = -(wx * x + b) / wy;
        if (y >= y0 && y <= y1) hits.emplace_back(x, y);
      }
    }
    if (wx != 0.0) {
      for (double y : {y0, y1}) {
        const double x = -(wy * y + b) / wx;
        if (x >= x0 && x <= x1) hits.emplace_back(x, y);
      }
    }
    if (hits.size() >= 2) {
      svg.line(sx(hits[0].first), sy(hits[0].second), sx(hits[1].first), sy(hits[1].second), "#333333",
               1.5, "6 4");
    }
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(model.centroids.rows()), 0);
  for (int l : model.labels) ++sizes[static_cast<std::size_t>(l)];
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const long pct = std::lround(100.0 * static_cast<double>(sizes[c]) / static_cast<double>(model.labels.size()));
    const double y = margin + 16.0 * static_cast<double>(c + 1);
    svg.circle(width - margin - 110.0, y - 4.0, 4.0, palette_color(c));
    svg.text(width - margin - 100.0, y, "cluster " + std::to_string(c) + " (" + std::to_string(pct) + "%)", 12.0);
  }
  return svg.finish();
}

}  // namespace onom
