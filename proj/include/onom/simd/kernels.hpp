#pragma once

// Distance and reduction kernels used by every pairwise inner loop in the
// toolkit (k-NN, core distances, Prim, k-means assignment).
//
// Each kernel has a scalar reference implementation plus optional AVX2+FMA
// (x86-64) and NEON (aarch64) variants. The variant is chosen once at startup
// from CPU feature detection; ONOM_ISA=scalar|avx2|neon in the environment or
// force_isa() overrides it. Variants agree with the scalar reference to a few
// ulps; inputs shorter than one vector register take the scalar path in
// every variant, so low-dimensional results are bit-identical across ISAs.

#include <cstddef>
#include <span>
#include <string_view>

namespace onom::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// True when the running CPU (and this build) can execute `isa`.
bool isa_supported(Isa isa);

/// Switches the dispatch target; throws onom::Error when unsupported.
void force_isa(Isa isa);

struct KernelTable {
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // out[j] = ||q - rows[j]||^2 for j in [0, count), rows contiguous with stride n.
  void (*squared_distances_to_rows)(const double* q, const double* rows, std::size_t count,
                                    std::size_t n, double* out);
};

/// Kernel table for a specific ISA (for equivalence testing).
const KernelTable& kernels_for(Isa isa);

double squared_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);
void squared_distances_to_rows(std::span<const double> query, std::span<const double> rows,
                               std::span<double> out);

namespace scalar {
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void squared_distances_to_rows(const double* q, const double* rows, std::size_t count,
                               std::size_t n, double* out);
}  // namespace scalar

#if defined(ONOM_HAVE_AVX2)
namespace avx2 {
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void squared_distances_to_rows(const double* q, const double* rows, std::size_t count,
                               std::size_t n, double* out);
}  // namespace avx2
#endif

#if defined(ONOM_HAVE_NEON)
namespace neon {
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void squared_distances_to_rows(const double* q, const double* rows, std::size_t count,
                               std::size_t n, double* out);
}  // namespace neon
#endif

}  // namespace onom::simd
