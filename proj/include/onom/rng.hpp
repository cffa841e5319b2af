#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace onom {

/// Mixes a label into a base seed so that each pipeline stage draws from its
/// own stream: derive_seed(42, "umap") never changes between releases.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

/// Seeded generator with portable conversions. The std distributions are
/// implementation-defined, so every draw goes through the helpers below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  double normal();

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace onom
