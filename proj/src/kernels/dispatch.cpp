#include "fids/error.hpp"
#include "fids/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace fids::kernels {
namespace {

constexpr KernelTable kScalarTable{scalar::sum, scalar::deviations, scalar::prefix_range,
                                   scalar::prefix_range_x4};
#if defined(FIDS_HAVE_AVX2)
constexpr KernelTable kAvx2Table{avx2::sum, avx2::deviations, avx2::prefix_range, avx2::prefix_range_x4};
#endif

Isa detect() noexcept {
  if (const char* env = std::getenv("FIDS_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::Scalar;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& selected() noexcept {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

} // namespace

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) noexcept {
  switch (isa) {
  case Isa::Scalar:
    return true;
  case Isa::Avx2:
#if defined(FIDS_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) {
    throw ConfigError("kernel ISA '" + std::string(isa_name(isa)) + "' is not available on this build/CPU");
  }
#if defined(FIDS_HAVE_AVX2)
  if (isa == Isa::Avx2) {
    return kAvx2Table;
  }
#endif
  return kScalarTable;
}

Isa active_isa() noexcept { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

const KernelTable& active() noexcept {
#if defined(FIDS_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) {
    return kAvx2Table;
  }
#endif
  return kScalarTable;
}

void force_isa(Isa isa) {
  table(isa);
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

} // namespace fids::kernels
