#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace fids {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 (Steele, Lea & Flood 2014). The output sequence is fully specified by the
/// 64-bit state, so seeded runs reproduce on every platform and compiler.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t bounded(std::uint64_t bound) noexcept {
    auto x = (*this)();
    auto m = static_cast<uint128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<uint128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate (Marsaglia polar method; consumes a variable number of draws).
  double normal() noexcept;

private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a root seed and a tuple of integers.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = SplitMix64::mix(root ^ 0x6A09E667F3BCC909ULL);
  for (auto p : parts) {
    h = SplitMix64::mix(h ^ (p + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
  }
  return h;
}

inline double SplitMix64::normal() noexcept {
  // std::normal_distribution is implementation-defined; the polar method is not.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

} // namespace fids
