#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the CUSUM bootstrap and the signature means.
//
// Every kernel has a scalar reference and, where the target supports it, an AVX2
// variant selected at runtime. The scalar code defines the floating-point
// evaluation order; vector variants reproduce it exactly, so results are
// bit-identical regardless of which ISA the dispatcher picks.

namespace fids::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  /// Sum in four interleaved partial accumulators, combined as (a0+a1)+(a2+a3), then the tail.
  double (*sum)(const double* x, std::size_t n);
  /// out[i] = y[i] - offset.
  void (*deviations)(const double* y, std::size_t n, double offset, double* out);
  /// Range max(S) - min(S) of the running sum S_0 = 0, S_i = S_{i-1} + d[i-1], i = 0..n.
  double (*prefix_range)(const double* d, std::size_t n);
  /// Four prefix ranges at once over lane-interleaved input: d[4*i + lane].
  void (*prefix_range_x4)(const double* interleaved, std::size_t n, double* out4);
};

bool isa_available(Isa isa) noexcept;

/// Kernel table for a specific ISA. Throws fids::ConfigError if the ISA is not available.
const KernelTable& table(Isa isa);

/// ISA in use. Chosen on first call: AVX2 when the CPU supports it, unless the
/// environment variable FIDS_SIMD is set to "scalar".
Isa active_isa() noexcept;
const KernelTable& active() noexcept;

/// Overrides the runtime choice (tests, benchmarking). Throws if unavailable.
void force_isa(Isa isa);

inline double sum(std::span<const double> x) noexcept { return active().sum(x.data(), x.size()); }

inline double mean(std::span<const double> x) noexcept {
  return x.empty() ? 0.0 : sum(x) / static_cast<double>(x.size());
}

inline double prefix_range(std::span<const double> d) noexcept {
  return active().prefix_range(d.data(), d.size());
}

namespace scalar {
double sum(const double* x, std::size_t n);
void deviations(const double* y, std::size_t n, double offset, double* out);
double prefix_range(const double* d, std::size_t n);
void prefix_range_x4(const double* interleaved, std::size_t n, double* out4);
} // namespace scalar

#if defined(FIDS_HAVE_AVX2)
namespace avx2 {
double sum(const double* x, std::size_t n);
void deviations(const double* y, std::size_t n, double offset, double* out);
double prefix_range(const double* d, std::size_t n);
void prefix_range_x4(const double* interleaved, std::size_t n, double* out4);
} // namespace avx2
#endif

} // namespace fids::kernels
