#pragma once

#include "fids/metrics.hpp"
#include "fids/pipeline.hpp"
#include "fids/simulator.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fids::eval {

/// 5x5 counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
public:
  void add(TrafficClass truth, TrafficClass predicted) noexcept;

  std::size_t at(TrafficClass truth, TrafficClass predicted) const noexcept;
  std::size_t row_total(TrafficClass truth) const noexcept;
  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;

  /// trace / total; 0 on an empty matrix.
  double accuracy() const noexcept;
  /// Detection rate of one class; empty when the class has no windows.
  std::optional<double> recall(TrafficClass c) const noexcept;
  /// Normal windows flagged as any attack / normal windows.
  std::optional<double> false_positive_rate() const noexcept;
  /// Attack windows flagged as any attack / attack windows.
  std::optional<double> true_positive_rate() const noexcept;

  const std::array<std::array<std::size_t, kNumClasses>, kNumClasses>& counts() const noexcept { return counts_; }

private:
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts_{};
};

struct VerdictLogEntry {
  std::size_t window = 0;
  TrafficClass truth = TrafficClass::Normal;
  TrafficClass predicted = TrafficClass::Normal;
  double raw_output = 0.0; ///< fuzzy output, or the baseline's peak exceedance ratio
};

struct EvalReport {
  std::string detector;
  ConfusionMatrix matrix;
  std::vector<VerdictLogEntry> log;
  double detection_seconds = 0.0; ///< wall clock; only in the human-readable table
};

/// Static per-metric thresholds at fixed multiples of the nominal baseline means. A trigger
/// metric fires when at least `min_exceedances` samples in the window exceed its threshold;
/// the window takes the class of the firing trigger with the largest peak/threshold ratio.
/// Triggers: iow_i -> HTTP, iod_i -> database, np_i -> SYN flood, ion_i -> DNS flood.
class BaselineDetector {
public:
  explicit BaselineDetector(const sim::BaselineProfile& nominal = sim::default_baseline(), double multiple = 2.0,
                            std::size_t min_exceedances = 3);

  struct Result {
    TrafficClass predicted = TrafficClass::Normal;
    double peak_ratio = 0.0;
  };

  Result classify(const Window& window) const;

  double threshold(Metric m) const noexcept;
  double multiple() const noexcept { return multiple_; }
  std::size_t min_exceedances() const noexcept { return min_exceedances_; }

private:
  std::array<double, kNumBaseMetrics> thresholds_{};
  double multiple_;
  std::size_t min_exceedances_;
};

EvalReport evaluate_pipeline(const std::vector<pipeline::WindowResult>& results, double detection_seconds);
EvalReport evaluate_baseline(const MetricSeries& series, const BaselineDetector& detector, std::size_t window_len,
                             std::size_t stride);

/// Machine report: matrix, rates (null where undefined), and the verdict log. No timing.
nlohmann::ordered_json to_json(const EvalReport& report);
/// Fixed-width table with matrix, rates and the detection-stage timing.
std::string to_table(const EvalReport& report);

} // namespace fids::eval
