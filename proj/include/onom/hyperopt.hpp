#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>

#include "onom/matrix.hpp"
#include "onom/rng.hpp"

namespace onom {

struct IntRange {
  int low;
  int high;
};

struct HyperParams {
  int n_neighbors = 15;
  int n_components = 5;
  int min_cluster_size = 10;
  int min_samples = 10;

  std::array<int, 4> values() const { return {n_neighbors, n_components, min_cluster_size, min_samples}; }
  static HyperParams from_values(const std::array<int, 4>& v) { return {v[0], v[1], v[2], v[3]}; }
  auto operator<=>(const HyperParams&) const = default;
};

struct SearchSpace {
  IntRange n_neighbors{5, 50};
  IntRange n_components{2, 20};
  IntRange min_cluster_size{5, 100};
  IntRange min_samples{1, 100};

  std::array<IntRange, 4> ranges() const { return {n_neighbors, n_components, min_cluster_size, min_samples}; }
  /// Throws onom::Error on empty ranges or when min_samples cannot stay
  /// below min_cluster_size.
  void validate() const;
  bool contains(const HyperParams& p) const;
  /// Maps to the unit cube; a degenerate range maps to 0.5.
  std::array<double, 4> normalize(const HyperParams& p) const;
  /// Rounds to the nearest integers inside the bounds, then clamps
  /// min_samples to at most min_cluster_size.
  HyperParams denormalize(std::span<const double, 4> u) const;
};

struct Trial {
  std::size_t index = 0;
  HyperParams params;
  double score = 0.0;
  bool failed = false;
};

inline constexpr double kFailedScore = -1.0;

/// Isotropic Matern-5/2 Gaussian process on standardized scores.
class GpSurrogate {
 public:
  struct Posterior {
    double mean;
    double variance;
  };

  /// Picks length scale and signal variance by maximum marginal likelihood over
  /// a 16x16 log grid. x holds one unit-cube point per row.
  GpSurrogate(Matrix x, std::vector<double> y, double jitter = 1e-10);
  /// Fixed hyperparameters, in standardized units.
  GpSurrogate(Matrix x, std::vector<double> y, double length_scale, double signal_variance,
              double jitter = 1e-10);

  /// Mean and variance in the units of the observed scores.
  Posterior posterior(std::span<const double> x) const;

  double length_scale() const { return length_; }
  double signal_variance() const { return signal_; }
  double jitter() const { return jitter_; }
  double y_mean() const { return y_mean_; }
  double y_scale() const { return y_scale_; }
  const Matrix& inputs() const { return x_; }

 private:
  void standardize(const std::vector<double>& y);
  Eigen::MatrixXd correlation(double length) const;
  // Cholesky of K0 + jitter*I with escalation; updates jitter_.
  bool factor(const Eigen::MatrixXd& k0, double jitter, Eigen::LLT<Eigen::MatrixXd>& out,
              double& used) const;
  void finish(double length, double signal, Eigen::LLT<Eigen::MatrixXd> llt, double jitter);

  Matrix x_;
  Eigen::VectorXd y_;  // standardized
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double length_ = 1.0;
  double signal_ = 1.0;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // (K0 + jitter I)^-1 y
};

double matern52(double r, double length);

/// GP over all trials, failed ones included at their recorded score.
GpSurrogate gp_fit(const std::vector<Trial>& trials, const SearchSpace& space,
                   double jitter = 1e-10);

/// Maximization-form expected improvement.
double expected_improvement(double mean, double variance, double best);

/// Point i (1-based) of the Halton sequence in bases 2, 3, 5, 7.
std::array<double, 4> halton(std::size_t index);

/// Best-EI point among 1024 shifted Halton candidates that does not repeat an
/// observed trial; a uniform random unobserved point when all repeat.
HyperParams propose_next(const GpSurrogate& gp, const SearchSpace& space,
                         const std::vector<Trial>& history, Rng& rng);

using Objective = std::function<double(const HyperParams&)>;

struct OptimizeResult {
  Trial best;
  std::vector<Trial> history;
};

/// n_init shifted Halton trials, then one GP-guided proposal per trial up to
/// budget. An objective that throws or returns a non-finite value is recorded
/// as failed with score -1. Passing an earlier history resumes the run; the
/// outcome matches an uninterrupted run with the same seed.
OptimizeResult optimize(const Objective& objective, const SearchSpace& space, std::size_t budget,
                        std::size_t n_init, std::uint64_t seed,
                        std::vector<Trial> resume = {},
                        const std::function<void(const Trial&)>& on_trial = {});

/// {"index", "params": {...}, "score", "failed"} on one line.
std::string trial_to_json(const Trial& trial);
Trial trial_from_json(std::string_view line);
std::vector<Trial> load_history(const std::filesystem::path& path);

}  // namespace onom
