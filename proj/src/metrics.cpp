#include "fids/metrics.hpp"

#include "fids/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fids {
namespace {

constexpr std::array<Metric, kNumBaseMetrics> kBaseMetrics{
    Metric::AvgRequestTime, Metric::IowI, Metric::IowO, Metric::IodI, Metric::IodO, Metric::IonI,
    Metric::IonO,           Metric::CpuW, Metric::CpuD, Metric::CpuN, Metric::MemW, Metric::RSyn,
    Metric::RAck,           Metric::RSynAck, Metric::NpI, Metric::NpO, Metric::Nhop};

constexpr std::array<std::string_view, kNumBaseMetrics + 1> kMetricNames{
    "avg_request_time", "iow_i", "iow_o", "iod_i", "iod_o", "ion_i", "ion_o", "cpu_w",   "cpu_d",
    "cpu_n",            "mem_w", "r_syn", "r_ack", "r_synack", "np_i", "np_o", "nhop", "syn_ack_ratio"};

constexpr double kRatioFloor = 1e-9;

enum class Domain { NonNegative, Percent, Ratio, Count };

Domain domain_of(Metric m) noexcept {
  switch (m) {
  case Metric::CpuW:
  case Metric::CpuD:
  case Metric::CpuN:
  case Metric::MemW:
    return Domain::Percent;
  case Metric::RSyn:
  case Metric::RAck:
  case Metric::RSynAck:
    return Domain::Ratio;
  case Metric::Nhop:
    return Domain::Count;
  default:
    return Domain::NonNegative;
  }
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text, std::size_t row, std::string_view field) {
  // from_chars rejects a leading '+', which other writers may emit.
  if (!text.empty() && text.front() == '+') {
    text.remove_prefix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw RangeError(row, std::string(field),
                     "row " + std::to_string(row) + ": field '" + std::string(field) + "' is not a number: '" +
                         std::string(text) + "'");
  }
  return v;
}

void set_field(MetricSample& s, std::string_view name, double v, std::size_t row) {
  if (name == "timestamp") {
    s.timestamp = v;
    return;
  }
  const Metric m = parse_metric(name);
  if (m == Metric::Nhop) {
    if (!(v >= 0.0) || std::floor(v) != v) {
      throw RangeError(row, "nhop",
                       "row " + std::to_string(row) + ": field 'nhop' must be a non-negative integer, got " +
                           format_double(v));
    }
  }
  s.set(m, v);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = line.find(sep, pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) {
      break;
    }
    pos = next + 1;
  }
  return out;
}

std::vector<std::string_view> required_columns() {
  std::vector<std::string_view> cols{"timestamp"};
  for (auto m : kBaseMetrics) {
    cols.push_back(metric_name(m));
  }
  return cols;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

std::string_view class_name(TrafficClass c) noexcept {
  switch (c) {
  case TrafficClass::Normal:
    return "normal";
  case TrafficClass::Http:
    return "http";
  case TrafficClass::Database:
    return "database";
  case TrafficClass::SynFlood:
    return "syn_flood";
  case TrafficClass::DnsFlood:
    return "dns_flood";
  }
  return "unknown";
}

TrafficClass class_from_int(int value) {
  if (value < 0 || value >= kNumClasses) {
    throw InputError("class label must be in 0..4, got " + std::to_string(value));
  }
  return static_cast<TrafficClass>(value);
}

std::span<const Metric> base_metrics() noexcept { return kBaseMetrics; }

std::string_view metric_name(Metric m) noexcept { return kMetricNames[static_cast<std::size_t>(m)]; }

Metric parse_metric(std::string_view name) {
  if (name == "tsp") {
    return Metric::AvgRequestTime;
  }
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (kMetricNames[i] == name) {
      return static_cast<Metric>(i);
    }
  }
  std::string valid;
  for (auto n : kMetricNames) {
    valid += valid.empty() ? "" : ", ";
    valid += n;
  }
  throw InputError("unknown metric '" + std::string(name) + "'; valid identifiers: " + valid + " (alias: tsp)");
}

double MetricSample::value(Metric m) const noexcept {
  switch (m) {
  case Metric::AvgRequestTime:
    return avg_request_time;
  case Metric::IowI:
    return iow_i;
  case Metric::IowO:
    return iow_o;
  case Metric::IodI:
    return iod_i;
  case Metric::IodO:
    return iod_o;
  case Metric::IonI:
    return ion_i;
  case Metric::IonO:
    return ion_o;
  case Metric::CpuW:
    return cpu_w;
  case Metric::CpuD:
    return cpu_d;
  case Metric::CpuN:
    return cpu_n;
  case Metric::MemW:
    return mem_w;
  case Metric::RSyn:
    return r_syn;
  case Metric::RAck:
    return r_ack;
  case Metric::RSynAck:
    return r_synack;
  case Metric::NpI:
    return np_i;
  case Metric::NpO:
    return np_o;
  case Metric::Nhop:
    return static_cast<double>(nhop);
  case Metric::SynAckRatio:
    return r_syn / std::max(r_ack, kRatioFloor);
  }
  return 0.0;
}

void MetricSample::set(Metric m, double v) noexcept {
  switch (m) {
  case Metric::AvgRequestTime:
    avg_request_time = v;
    break;
  case Metric::IowI:
    iow_i = v;
    break;
  case Metric::IowO:
    iow_o = v;
    break;
  case Metric::IodI:
    iod_i = v;
    break;
  case Metric::IodO:
    iod_o = v;
    break;
  case Metric::IonI:
    ion_i = v;
    break;
  case Metric::IonO:
    ion_o = v;
    break;
  case Metric::CpuW:
    cpu_w = v;
    break;
  case Metric::CpuD:
    cpu_d = v;
    break;
  case Metric::CpuN:
    cpu_n = v;
    break;
  case Metric::MemW:
    mem_w = v;
    break;
  case Metric::RSyn:
    r_syn = v;
    break;
  case Metric::RAck:
    r_ack = v;
    break;
  case Metric::RSynAck:
    r_synack = v;
    break;
  case Metric::NpI:
    np_i = v;
    break;
  case Metric::NpO:
    np_o = v;
    break;
  case Metric::Nhop:
    nhop = v > 0.0 ? static_cast<std::uint64_t>(std::llround(v)) : 0;
    break;
  case Metric::SynAckRatio:
    break;
  }
}

void validate_sample(const MetricSample& s, std::size_t row) {
  auto fail = [row](std::string_view field, double v, std::string_view rule) {
    throw RangeError(row, std::string(field),
                     "row " + std::to_string(row) + ": field '" + std::string(field) + "' = " + format_double(v) +
                         " violates " + std::string(rule));
  };
  if (!std::isfinite(s.timestamp) || s.timestamp < 0.0) {
    fail("timestamp", s.timestamp, "timestamp >= 0");
  }
  for (auto m : kBaseMetrics) {
    const double v = s.value(m);
    if (!std::isfinite(v)) {
      fail(metric_name(m), v, "finite value");
    }
    switch (domain_of(m)) {
    case Domain::Percent:
      if (v < 0.0 || v > 100.0) {
        fail(metric_name(m), v, "range [0,100]");
      }
      break;
    case Domain::Ratio:
      if (v < 0.0 || v > 1.0) {
        fail(metric_name(m), v, "range [0,1]");
      }
      break;
    case Domain::NonNegative:
    case Domain::Count:
      if (v < 0.0) {
        fail(metric_name(m), v, "value >= 0");
      }
      break;
    }
  }
  const double flags = s.r_syn + s.r_ack + s.r_synack;
  if (flags > 1.0 + kRatioSumTolerance) {
    fail("r_syn+r_ack+r_synack", flags, "sum <= 1");
  }
}

MetricSeries::MetricSeries(std::vector<MetricSample> samples, std::optional<std::vector<TrafficClass>> labels)
    : samples_(std::move(samples)), labels_(std::move(labels)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    validate_sample(samples_[i], i);
    if (i > 0 && !(samples_[i].timestamp > samples_[i - 1].timestamp)) {
      throw OrderingError(i, "timestamps must be strictly increasing: row " + std::to_string(i) + " has " +
                                 format_double(samples_[i].timestamp) + " after " +
                                 format_double(samples_[i - 1].timestamp));
    }
  }
  if (labels_ && labels_->size() != samples_.size()) {
    throw InputError("label count " + std::to_string(labels_->size()) + " does not match sample count " +
                     std::to_string(samples_.size()));
  }
}

Window::Window(const MetricSeries& series, std::size_t start, std::size_t end) : start_(start), end_(end) {
  if (end <= start || end > series.size()) {
    throw InputError("invalid window [" + std::to_string(start) + ", " + std::to_string(end) + ") over series of " +
                     std::to_string(series.size()) + " samples");
  }
  samples_ = series.samples().subspan(start, end - start);
  if (series.has_labels()) {
    std::array<std::size_t, kNumClasses> counts{};
    for (auto c : series.labels().subspan(start, end - start)) {
      ++counts[static_cast<std::size_t>(c)];
    }
    const auto it = std::max_element(counts.begin(), counts.end());
    label_ = static_cast<TrafficClass>(it - counts.begin());
  }
}

std::vector<Window> slice_windows(const MetricSeries& series, std::size_t window_len, std::size_t stride) {
  if (window_len < kMinWindowLen) {
    throw ConfigError("window length must be >= " + std::to_string(kMinWindowLen) + ", got " +
                      std::to_string(window_len));
  }
  if (stride < 1) {
    throw ConfigError("stride must be >= 1");
  }
  std::vector<Window> out;
  for (std::size_t start = 0; start + window_len <= series.size(); start += stride) {
    out.emplace_back(series, start, start + window_len);
  }
  return out;
}

std::vector<double> extract_channel(const Window& window, Metric metric) {
  std::vector<double> y;
  y.reserve(window.size());
  for (const auto& s : window.samples()) {
    y.push_back(s.value(metric));
  }
  return y;
}

std::vector<double> extract_channel(const Window& window, std::string_view metric) {
  return extract_channel(window, parse_metric(metric));
}

SeriesFormat parse_format(std::string_view name) {
  if (name == "csv") {
    return SeriesFormat::Csv;
  }
  if (name == "jsonl") {
    return SeriesFormat::Jsonl;
  }
  throw InputError("unknown series format '" + std::string(name) + "'; expected csv or jsonl");
}

SeriesFormat format_for_path(const std::filesystem::path& path) noexcept {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? SeriesFormat::Jsonl : SeriesFormat::Csv;
}

std::string canonical_csv_header(bool with_label) {
  std::string header;
  for (auto col : required_columns()) {
    header += header.empty() ? "" : ",";
    header += col;
  }
  if (with_label) {
    header += ",label";
  }
  return header;
}

std::string to_csv(const MetricSeries& series) {
  std::string out = canonical_csv_header(series.has_labels());
  out += '\n';
  const auto labels = series.labels();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series.samples()[i];
    out += format_double(s.timestamp);
    for (auto m : kBaseMetrics) {
      out += ',';
      out += m == Metric::Nhop ? std::to_string(s.nhop) : format_double(s.value(m));
    }
    if (series.has_labels()) {
      out += ',';
      out += std::to_string(static_cast<int>(labels[i]));
    }
    out += '\n';
  }
  return out;
}

MetricSeries parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty()) {
      lines.push_back(line);
    }
  }
  if (lines.empty()) {
    throw SchemaError("timestamp", "empty CSV: missing header");
  }
  const auto header = split(lines.front(), ',');
  auto find_col = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::pair<std::string_view, std::size_t>> columns;
  for (auto col : required_columns()) {
    auto idx = find_col(col);
    if (!idx) {
      throw SchemaError(std::string(col), "missing column '" + std::string(col) + "'");
    }
    columns.emplace_back(col, *idx);
  }
  const auto label_col = find_col("label");

  std::vector<MetricSample> samples;
  std::vector<TrafficClass> labels;
  samples.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t row = r - 1;
    const auto cells = split(lines[r], ',');
    if (cells.size() != header.size()) {
      throw SchemaError("", "row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                " fields, got " + std::to_string(cells.size()));
    }
    MetricSample s;
    for (const auto& [name, idx] : columns) {
      set_field(s, name, parse_double(cells[idx], row, name), row);
    }
    validate_sample(s, row);
    samples.push_back(s);
    if (label_col) {
      const double v = parse_double(cells[*label_col], row, "label");
      if (std::floor(v) != v || v < 0 || v >= kNumClasses) {
        throw RangeError(row, "label", "row " + std::to_string(row) + ": label must be an integer in 0..4");
      }
      labels.push_back(static_cast<TrafficClass>(static_cast<int>(v)));
    }
  }
  if (label_col) {
    return MetricSeries(std::move(samples), std::move(labels));
  }
  return MetricSeries(std::move(samples));
}

std::string to_jsonl(const MetricSeries& series) {
  std::string out;
  const auto labels = series.labels();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series.samples()[i];
    nlohmann::ordered_json j;
    j["timestamp"] = s.timestamp;
    for (auto m : kBaseMetrics) {
      if (m == Metric::Nhop) {
        j["nhop"] = s.nhop;
      } else {
        j[std::string(metric_name(m))] = s.value(m);
      }
    }
    if (series.has_labels()) {
      j["label"] = static_cast<int>(labels[i]);
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

MetricSeries parse_jsonl(std::string_view text) {
  std::vector<MetricSample> samples;
  std::vector<TrafficClass> labels;
  std::optional<bool> labeled;
  std::size_t row = 0;
  for (auto line : split(text, '\n')) {
    if (line.empty()) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("", "row " + std::to_string(row) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) {
      throw SchemaError("", "row " + std::to_string(row) + ": expected a JSON object");
    }
    MetricSample s;
    for (auto col : required_columns()) {
      const auto it = j.find(std::string(col));
      if (it == j.end()) {
        throw SchemaError(std::string(col), "row " + std::to_string(row) + ": missing key '" + std::string(col) + "'");
      }
      if (!it->is_number()) {
        throw RangeError(row, std::string(col),
                         "row " + std::to_string(row) + ": field '" + std::string(col) + "' is not a number");
      }
      set_field(s, col, it->get<double>(), row);
    }
    validate_sample(s, row);
    samples.push_back(s);
    const auto lit = j.find("label");
    const bool has_label = lit != j.end() && !lit->is_null();
    if (labeled && *labeled != has_label) {
      throw SchemaError("label", "row " + std::to_string(row) + ": label present on some rows but not others");
    }
    labeled = has_label;
    if (has_label) {
      if (!lit->is_number_integer() || lit->get<int>() < 0 || lit->get<int>() >= kNumClasses) {
        throw RangeError(row, "label", "row " + std::to_string(row) + ": label must be an integer in 0..4");
      }
      labels.push_back(static_cast<TrafficClass>(lit->get<int>()));
    }
    ++row;
  }
  if (labeled.value_or(false)) {
    return MetricSeries(std::move(samples), std::move(labels));
  }
  return MetricSeries(std::move(samples));
}

MetricSeries load_series(const std::filesystem::path& path, SeriesFormat format) {
  const auto text = read_file(path);
  try {
    return format == SeriesFormat::Csv ? parse_csv(text) : parse_jsonl(text);
  } catch (const SchemaError& e) {
    throw SchemaError(e.column(), path.string() + ": " + e.what());
  } catch (const RangeError& e) {
    throw RangeError(e.row(), e.field(), path.string() + ": " + e.what());
  } catch (const OrderingError& e) {
    throw OrderingError(e.index(), path.string() + ": " + e.what());
  }
}

void save_series(const MetricSeries& series, const std::filesystem::path& path, SeriesFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InputError("cannot write '" + path.string() + "'");
  }
  out << (format == SeriesFormat::Csv ? to_csv(series) : to_jsonl(series));
  if (!out) {
    throw InputError("write failed for '" + path.string() + "'");
  }
}

} // namespace fids
