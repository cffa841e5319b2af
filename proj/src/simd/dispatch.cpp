#include <atomic>
#include <cstdlib>
#include <string>

#include "onom/error.hpp"
#include "onom/simd/kernels.hpp"

namespace onom::simd {

namespace {

constexpr KernelTable kScalar{scalar::squared_distance, scalar::dot,
                              scalar::squared_distances_to_rows};
#if defined(ONOM_HAVE_AVX2)
constexpr KernelTable kAvx2{avx2::squared_distance, avx2::dot, avx2::squared_distances_to_rows};
#endif
#if defined(ONOM_HAVE_NEON)
constexpr KernelTable kNeon{neon::squared_distance, neon::dot, neon::squared_distances_to_rows};
#endif

Isa detect() {
#if defined(ONOM_HAVE_AVX2)
  if (isa_supported(Isa::avx2)) return Isa::avx2;
#endif
#if defined(ONOM_HAVE_NEON)
  return Isa::neon;
#endif
  return Isa::scalar;
}

Isa initial_isa() {
  if (const char* env = std::getenv("ONOM_ISA")) {
    const std::string v = env;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (v == isa_name(isa) && isa_supported(isa)) return isa;
    }
  }
  return detect();
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&kernels_for(initial_isa())};
  return table;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(ONOM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(ONOM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error("ISA '" + std::string(isa_name(isa)) + "' is not available on this machine");
  }
  active().store(isa, std::memory_order_relaxed);
  active_table().store(&kernels_for(isa), std::memory_order_relaxed);
}

const KernelTable& kernels_for(Isa isa) {
  switch (isa) {
#if defined(ONOM_HAVE_AVX2)
    case Isa::avx2: return kAvx2;
#endif
#if defined(ONOM_HAVE_NEON)
    case Isa::neon: return kNeon;
#endif
    default: return kScalar;
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active_table().load(std::memory_order_relaxed)->squared_distance(a.data(), b.data(),
                                                                           a.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active_table().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void squared_distances_to_rows(std::span<const double> query, std::span<const double> rows,
                               std::span<double> out) {
  active_table().load(std::memory_order_relaxed)
      ->squared_distances_to_rows(query.data(), rows.data(), out.size(), query.size(), out.data());
}

}  // namespace onom::simd
