#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fids {

/// Traffic class encoding: 0 normal, 1 HTTP flood, 2 database flood, 3 TCP SYN flood, 4 DNS flood.
enum class TrafficClass : std::uint8_t { Normal = 0, Http = 1, Database = 2, SynFlood = 3, DnsFlood = 4 };

inline constexpr int kNumClasses = 5;

std::string_view class_name(TrafficClass c) noexcept;
/// Throws InputError for values outside 0..4.
TrafficClass class_from_int(int value);

/// The 17 per-sample measurements, plus derived channels that can be extracted from a window.
enum class Metric : std::uint8_t {
  AvgRequestTime, // a.k.a. time spent on page (TSP)
  IowI,
  IowO,
  IodI,
  IodO,
  IonI,
  IonO,
  CpuW,
  CpuD,
  CpuN,
  MemW,
  RSyn,
  RAck,
  RSynAck,
  NpI,
  NpO,
  Nhop,
  // Derived: r_syn / max(r_ack, 1e-9).
  SynAckRatio,
};

inline constexpr std::size_t kNumBaseMetrics = 17;

/// The 17 stored metrics in canonical column order.
std::span<const Metric> base_metrics() noexcept;

std::string_view metric_name(Metric m) noexcept;
/// Accepts the canonical names and "tsp" as an alias of avg_request_time.
/// Throws InputError listing valid identifiers otherwise.
Metric parse_metric(std::string_view name);

struct MetricSample {
  double timestamp = 0.0;
  double avg_request_time = 0.0;
  double iow_i = 0.0, iow_o = 0.0;
  double iod_i = 0.0, iod_o = 0.0;
  double ion_i = 0.0, ion_o = 0.0;
  double cpu_w = 0.0, cpu_d = 0.0, cpu_n = 0.0;
  double mem_w = 0.0;
  double r_syn = 0.0, r_ack = 0.0, r_synack = 0.0;
  double np_i = 0.0, np_o = 0.0;
  std::uint64_t nhop = 0;

  double value(Metric m) const noexcept;
  /// Stores into a stored metric; nhop is rounded to the nearest count. Derived metrics are ignored.
  void set(Metric m, double v) noexcept;

  friend bool operator==(const MetricSample&, const MetricSample&) = default;
};

/// Tolerance for r_syn + r_ack + r_synack <= 1.
inline constexpr double kRatioSumTolerance = 1e-9;

/// Validates one sample's field domains. Throws RangeError naming `row` and the field.
void validate_sample(const MetricSample& s, std::size_t row);

/// Immutable, validated sequence of samples with optional per-sample labels.
class MetricSeries {
public:
  MetricSeries() = default;
  /// Validates ranges, strict timestamp ordering, and label length.
  explicit MetricSeries(std::vector<MetricSample> samples, std::optional<std::vector<TrafficClass>> labels = {});

  std::span<const MetricSample> samples() const noexcept { return samples_; }
  bool has_labels() const noexcept { return labels_.has_value(); }
  std::span<const TrafficClass> labels() const noexcept {
    return labels_ ? std::span<const TrafficClass>(*labels_) : std::span<const TrafficClass>{};
  }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  friend bool operator==(const MetricSeries&, const MetricSeries&) = default;

private:
  std::vector<MetricSample> samples_;
  std::optional<std::vector<TrafficClass>> labels_;
};

/// Half-open range [start, end) over a series. A Window is a view: the series must outlive it.
class Window {
public:
  Window(const MetricSeries& series, std::size_t start, std::size_t end);

  std::size_t start() const noexcept { return start_; }
  std::size_t end() const noexcept { return end_; }
  std::size_t size() const noexcept { return end_ - start_; }
  std::span<const MetricSample> samples() const noexcept { return samples_; }
  /// Majority ground-truth label (ties go to the smaller class id); empty when unlabeled.
  std::optional<TrafficClass> label() const noexcept { return label_; }

private:
  std::span<const MetricSample> samples_;
  std::size_t start_;
  std::size_t end_;
  std::optional<TrafficClass> label_;
};

inline constexpr std::size_t kMinWindowLen = 4;

/// Deterministic tiling; a trailing partial window is discarded. Throws ConfigError when
/// window_len < 4 or stride < 1.
std::vector<Window> slice_windows(const MetricSeries& series, std::size_t window_len, std::size_t stride);

/// Per-metric value vector of a window in sample order.
std::vector<double> extract_channel(const Window& window, Metric metric);
std::vector<double> extract_channel(const Window& window, std::string_view metric);

enum class SeriesFormat { Csv, Jsonl };

/// Throws InputError for anything but "csv" / "jsonl".
SeriesFormat parse_format(std::string_view name);
/// Picks the format from the extension (.jsonl / .json -> Jsonl, anything else Csv).
SeriesFormat format_for_path(const std::filesystem::path& path) noexcept;

std::string canonical_csv_header(bool with_label);

MetricSeries load_series(const std::filesystem::path& path, SeriesFormat format);
inline MetricSeries load_series(const std::filesystem::path& path) { return load_series(path, format_for_path(path)); }

/// Floating values use the shortest representation that round-trips exactly.
void save_series(const MetricSeries& series, const std::filesystem::path& path, SeriesFormat format);

std::string to_csv(const MetricSeries& series);
MetricSeries parse_csv(std::string_view text);
std::string to_jsonl(const MetricSeries& series);
MetricSeries parse_jsonl(std::string_view text);

} // namespace fids
