#include "onom/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "onom/error.hpp"
#include "onom/parallel.hpp"

namespace onom {

namespace {

constexpr std::size_t kGridSize = 16;
constexpr std::size_t kCandidates = 1024;
constexpr double kMaxJitter = 1e-2;

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) /
                                       static_cast<double>(n - 1));
  }
  return g;
}

double radical_inverse(std::size_t index, std::size_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::array<double, 4> shifted(std::size_t index, const std::array<double, 4>& shift) {
  auto h = halton(index);
  for (std::size_t d = 0; d < 4; ++d) {
    h[d] += shift[d];
    if (h[d] >= 1.0) h[d] -= 1.0;
  }
  return h;
}

std::array<double, 4> draw_shift(Rng& rng) {
  return {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
}

}  // namespace

void SearchSpace::validate() const {
  static const char* names[] = {"n_neighbors", "n_components", "min_cluster_size", "min_samples"};
  const auto r = ranges();
  for (std::size_t i = 0; i < 4; ++i) {
    if (r[i].low > r[i].high) throw Error(std::string("empty range for ") + names[i]);
    if (r[i].low < 1) throw Error(std::string(names[i]) + " must be at least 1");
  }
  if (n_neighbors.low < 2) throw Error("n_neighbors must be at least 2");
  if (min_cluster_size.low < 2) throw Error("min_cluster_size must be at least 2");
  if (min_samples.low > min_cluster_size.low) {
    throw Error("min_samples lower bound exceeds min_cluster_size lower bound");
  }
}

bool SearchSpace::contains(const HyperParams& p) const {
  const auto r = ranges();
  const auto v = p.values();
  for (std::size_t i = 0; i < 4; ++i) {
    if (v[i] < r[i].low || v[i] > r[i].high) return false;
  }
  return p.min_samples <= p.min_cluster_size;
}

std::array<double, 4> SearchSpace::normalize(const HyperParams& p) const {
  const auto r = ranges();
  const auto v = p.values();
  std::array<double, 4> u{};
  for (std::size_t i = 0; i < 4; ++i) {
    u[i] = r[i].high == r[i].low
               ? 0.5
               : static_cast<double>(v[i] - r[i].low) / static_cast<double>(r[i].high - r[i].low);
  }
  return u;
}

HyperParams SearchSpace::denormalize(std::span<const double, 4> u) const {
  const auto r = ranges();
  std::array<int, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double x = static_cast<double>(r[i].low) +
                     std::clamp(u[i], 0.0, 1.0) * static_cast<double>(r[i].high - r[i].low);
    v[i] = std::clamp(static_cast<int>(std::lround(x)), r[i].low, r[i].high);
  }
  v[3] = std::max(min_samples.low, std::min(v[3], v[2]));
  return HyperParams::from_values(v);
}

double matern52(double r, double length) {
  const double s = std::sqrt(5.0) * r / length;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

std::array<double, 4> halton(std::size_t index) {
  return {radical_inverse(index, 2), radical_inverse(index, 3), radical_inverse(index, 5),
          radical_inverse(index, 7)};
}

GpSurrogate::GpSurrogate(Matrix x, std::vector<double> y, double jitter) : x_(std::move(x)) {
  standardize(y);
  const std::size_t n = y.size();
  const auto lengths = log_grid(0.05, 2.0, kGridSize);
  const auto signals = log_grid(0.1, 10.0, kGridSize);
  constexpr double half_log_2pi = 0.91893853320467274178;
  double best = -std::numeric_limits<double>::infinity();
  double best_length = 0.0, best_signal = 0.0, best_jitter = 0.0;
  bool any = false;
  for (double length : lengths) {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double used = 0.0;
    if (!factor(correlation(length), jitter, llt, used)) continue;
    any = true;
    const Eigen::VectorXd z = llt.matrixL().solve(y_);
    const double quad = z.squaredNorm();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < llt.matrixLLT().rows(); ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
    for (double s : signals) {
      const double ll = -0.5 * quad / s - 0.5 * (static_cast<double>(n) * std::log(s) + log_det) -
                        static_cast<double>(n) * half_log_2pi;
      if (ll > best) {
        best = ll;
        best_length = length;
        best_signal = s;
        best_jitter = used;
      }
    }
  }
  if (!any) throw Error("GP fit failed: kernel matrix not positive definite up to jitter 1e-2");
  Eigen::LLT<Eigen::MatrixXd> llt;
  double used = 0.0;
  factor(correlation(best_length), best_jitter, llt, used);
  finish(best_length, best_signal, std::move(llt), used);
}

GpSurrogate::GpSurrogate(Matrix x, std::vector<double> y, double length_scale,
                         double signal_variance, double jitter)
    : x_(std::move(x)) {
  if (!(length_scale > 0.0) || !(signal_variance > 0.0)) {
    throw Error("GP hyperparameters must be positive");
  }
  standardize(y);
  Eigen::LLT<Eigen::MatrixXd> llt;
  double used = 0.0;
  if (!factor(correlation(length_scale), jitter, llt, used)) {
    throw Error("GP fit failed: kernel matrix not positive definite up to jitter 1e-2");
  }
  finish(length_scale, signal_variance, std::move(llt), used);
}

void GpSurrogate::standardize(const std::vector<double>& y) {
  if (y.size() < 2) throw Error("GP needs at least 2 observations");
  if (static_cast<std::size_t>(x_.rows()) != y.size()) throw Error("GP inputs and scores differ in length");
  for (double v : y) {
    if (!std::isfinite(v)) throw Error("GP scores must be finite");
  }
  const double n = static_cast<double>(y.size());
  y_mean_ = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - y_mean_) * (v - y_mean_);
  y_scale_ = std::sqrt(ss / n);
  if (!(y_scale_ > 0.0)) y_scale_ = 1.0;
  y_.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) y_(static_cast<Eigen::Index>(i)) = (y[i] - y_mean_) / y_scale_;
}

Eigen::MatrixXd GpSurrogate::correlation(double length) const {
  const Eigen::Index n = x_.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      k(i, j) = k(j, i) = matern52((x_.row(i) - x_.row(j)).norm(), length);
    }
  }
  return k;
}

bool GpSurrogate::factor(const Eigen::MatrixXd& k0, double jitter, Eigen::LLT<Eigen::MatrixXd>& out,
                         double& used) const {
  for (double j = jitter; j <= kMaxJitter * (1.0 + 1e-9); j *= 10.0) {
    Eigen::MatrixXd k = k0;
    k.diagonal().array() += j;
    out.compute(k);
    if (out.info() == Eigen::Success) {
      used = j;
      return true;
    }
  }
  return false;
}

void GpSurrogate::finish(double length, double signal, Eigen::LLT<Eigen::MatrixXd> llt,
                         double jitter) {
  length_ = length;
  signal_ = signal;
  jitter_ = jitter;
  llt_ = std::move(llt);
  alpha_ = llt_.solve(y_);
}

GpSurrogate::Posterior GpSurrogate::posterior(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != x_.cols()) throw Error("GP query has wrong dimension");
  const Eigen::Index n = x_.rows();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < x_.cols(); ++d) {
      const double diff = x_(i, d) - x[static_cast<std::size_t>(d)];
      s += diff * diff;
    }
    k(i) = matern52(std::sqrt(s), length_);
  }
  const double mean_std = k.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(k);
  const double var_std = std::max(0.0, signal_ * (1.0 - v.squaredNorm()));
  return {y_mean_ + y_scale_ * mean_std, var_std * y_scale_ * y_scale_};
}

GpSurrogate gp_fit(const std::vector<Trial>& trials, const SearchSpace& space, double jitter) {
  if (trials.size() < 2) throw Error("GP needs at least 2 trials");
  Matrix x(static_cast<Eigen::Index>(trials.size()), 4);
  std::vector<double> y;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto u = space.normalize(trials[i].params);
    for (std::size_t d = 0; d < 4; ++d) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = u[d];
    y.push_back(trials[i].failed ? kFailedScore : trials[i].score);
  }
  return GpSurrogate(std::move(x), std::move(y), jitter);
}

double expected_improvement(double mean, double variance, double best) {
  if (variance < 0.0) throw Error("variance must be non-negative");
  const double sigma = std::sqrt(variance);
  if (sigma == 0.0) return std::max(mean - best, 0.0);
  const double z = (mean - best) / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::max(0.0, sigma * (z * cdf + pdf));
}

HyperParams propose_next(const GpSurrogate& gp, const SearchSpace& space,
                         const std::vector<Trial>& history, Rng& rng) {
  std::set<HyperParams> seen;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : history) {
    seen.insert(t.params);
    best = std::max(best, t.failed ? kFailedScore : t.score);
  }
  const auto shift = draw_shift(rng);
  // EI is scored at the rounded, clamped point that would actually be run.
  std::vector<HyperParams> cands(kCandidates);
  std::vector<double> ei(kCandidates);
  for (std::size_t i = 0; i < kCandidates; ++i) cands[i] = space.denormalize(shifted(i + 1, shift));
  parallel_for(0, kCandidates, [&](std::size_t i) {
    const auto post = gp.posterior(space.normalize(cands[i]));
    ei[i] = expected_improvement(post.mean, post.variance, best);
  });
  std::vector<std::size_t> order(kCandidates);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });
  for (auto i : order) {
    if (!seen.contains(cands[i])) return cands[i];
  }
  // Every candidate lands on an observed point: fall back to random ones.
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const std::array<double, 4> u = draw_shift(rng);
    const HyperParams p = space.denormalize(u);
    if (!seen.contains(p)) return p;
  }
  throw Error("search space exhausted");
}

OptimizeResult optimize(const Objective& objective, const SearchSpace& space, std::size_t budget,
                        std::size_t n_init, std::uint64_t seed, std::vector<Trial> resume,
                        const std::function<void(const Trial&)>& on_trial) {
  space.validate();
  if (n_init < 2 || budget < n_init) throw Error("need budget >= n_init >= 2");
  if (resume.size() > budget) throw Error("history is longer than the budget");
  for (std::size_t i = 0; i < resume.size(); ++i) {
    if (resume[i].index != i) throw Error("history indices must run 0, 1, 2, ...");
    if (!space.contains(resume[i].params)) throw Error("history trial " + std::to_string(i) + " is outside the search space");
  }
  OptimizeResult result;
  result.history = std::move(resume);
  Rng init_rng(derive_seed(seed, "hyperopt-init"));
  const auto init_shift = draw_shift(init_rng);

  while (result.history.size() < budget) {
    const std::size_t index = result.history.size();
    HyperParams params;
    if (index < n_init) {
      params = space.denormalize(shifted(index + 1, init_shift));
    } else {
      Rng rng(derive_seed(seed, "hyperopt-propose-" + std::to_string(index)));
      params = propose_next(gp_fit(result.history, space), space, result.history, rng);
    }
    Trial trial{index, params, kFailedScore, false};
    try {
      trial.score = objective(params);
      if (!std::isfinite(trial.score)) throw Error("non-finite score");
    } catch (const std::exception&) {
      trial.score = kFailedScore;
      trial.failed = true;
    }
    result.history.push_back(trial);
    if (on_trial) on_trial(trial);
  }
  const Trial* best = nullptr;
  for (const auto& t : result.history) {
    if (!t.failed && (best == nullptr || t.score > best->score)) best = &t;
  }
  if (best == nullptr) throw Error("objective failed on every trial");
  result.best = *best;
  return result;
}

std::string trial_to_json(const Trial& trial) {
  nlohmann::ordered_json j;
  j["index"] = trial.index;
  j["params"] = {{"n_neighbors", trial.params.n_neighbors},
                 {"n_components", trial.params.n_components},
                 {"min_cluster_size", trial.params.min_cluster_size},
                 {"min_samples", trial.params.min_samples}};
  j["score"] = trial.score;
  j["failed"] = trial.failed;
  return j.dump();
}

Trial trial_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    Trial t;
    t.index = j.at("index").get<std::size_t>();
    const auto& p = j.at("params");
    t.params = {p.at("n_neighbors").get<int>(), p.at("n_components").get<int>(),
                p.at("min_cluster_size").get<int>(), p.at("min_samples").get<int>()};
    t.score = j.at("score").get<double>();
    t.failed = j.at("failed").get<bool>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad history line: ") + e.what());
  }
}

std::vector<Trial> load_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string());
  std::vector<Trial> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(trial_from_json(line));
  }
  return out;
}

}  // namespace onom
