#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fids::cusum {

/// Cumulative sum of deviations from the sample mean.
struct CusumTrace {
  std::vector<double> s; ///< S_0..S_n, S_0 = 0
  double mean = 0.0;
  double s_max = 0.0;
  double s_min = 0.0;
  double s_diff = 0.0; ///< s_max - s_min
};

enum class Decision { Decrease, Increase, NoChange };

std::string_view decision_name(Decision d) noexcept;

struct ChangeReport {
  Decision decision = Decision::NoChange;
  /// 1-based: the last sample before the change. Set iff decision != NoChange.
  std::optional<std::size_t> change_index;
  double confidence_pct = 0.0;
  CusumTrace trace;
  std::size_t bootstrap_count = 0;
};

struct Config {
  std::size_t n_boot = 1000;
  double confidence_threshold_pct = 95.0;
  std::uint64_t seed = 42;
  std::size_t min_segment = 4;
};

/// Throws ConfigError on n_boot < 100, threshold outside [0,100], or min_segment < 4.
void validate(const Config& config);

/// Throws InputError if y has fewer than 2 values or a non-finite value.
CusumTrace cusum_trace(std::span<const double> y);

/// Percentage of n_boot random reorderings of y whose trace range is strictly smaller than
/// the original range. Ranges within 1e-12 of the total absolute deviation count as ties.
/// Resample r draws its permutation from a stream seeded by derive_seed(seed, {r}).
double bootstrap_confidence(std::span<const double> y, std::size_t n_boot, std::uint64_t seed);

ChangeReport detect_change(std::span<const double> y, const Config& config = {});

/// Binary segmentation: after a confirmed change at K, recurse on y[0, K) and y[K, n) until
/// no change or the segment is shorter than min_segment. Change indices are global, reports
/// are in index order, and each segment uses a seed derived from the root seed and its bounds.
std::vector<ChangeReport> detect_changes_multi(std::span<const double> y, const Config& config = {});

/// `{"metric", "decision", "k", "confidence_pct", "s_diff"}`.
nlohmann::ordered_json to_json(const ChangeReport& report, std::string_view metric);

/// Tie band used by the confidence count: ranges within this distance of each other are equal.
double tie_tolerance(std::span<const double> deviations) noexcept;

} // namespace fids::cusum
