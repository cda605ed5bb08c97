#include "fids/evaluation.hpp"

#include "fids/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fids::eval {
namespace {

constexpr std::array<std::pair<Metric, TrafficClass>, 4> kTriggers{{
    {Metric::IowI, TrafficClass::Http},
    {Metric::IodI, TrafficClass::Database},
    {Metric::NpI, TrafficClass::SynFlood},
    {Metric::IonI, TrafficClass::DnsFlood},
}};

std::size_t ci(TrafficClass c) noexcept { return static_cast<std::size_t>(c); }

nlohmann::ordered_json optional_rate(std::optional<double> v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string fmt_rate(std::optional<double> v) {
  if (!v) {
    return "n/a";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

} // namespace

void ConfusionMatrix::add(TrafficClass truth, TrafficClass predicted) noexcept { ++counts_[ci(truth)][ci(predicted)]; }

std::size_t ConfusionMatrix::at(TrafficClass truth, TrafficClass predicted) const noexcept {
  return counts_[ci(truth)][ci(predicted)];
}

std::size_t ConfusionMatrix::row_total(TrafficClass truth) const noexcept {
  std::size_t s = 0;
  for (auto v : counts_[ci(truth)]) {
    s += v;
  }
  return s;
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t s = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    s += row_total(static_cast<TrafficClass>(c));
  }
  return s;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t s = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    s += counts_[c][c];
  }
  return s;
}

double ConfusionMatrix::accuracy() const noexcept {
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
}

std::optional<double> ConfusionMatrix::recall(TrafficClass c) const noexcept {
  const auto row = row_total(c);
  if (row == 0) {
    return std::nullopt;
  }
  return static_cast<double>(counts_[ci(c)][ci(c)]) / static_cast<double>(row);
}

std::optional<double> ConfusionMatrix::false_positive_rate() const noexcept {
  const auto normals = row_total(TrafficClass::Normal);
  if (normals == 0) {
    return std::nullopt;
  }
  return static_cast<double>(normals - counts_[0][0]) / static_cast<double>(normals);
}

std::optional<double> ConfusionMatrix::true_positive_rate() const noexcept {
  std::size_t attacks = 0;
  std::size_t flagged = 0;
  for (std::size_t t = 1; t < kNumClasses; ++t) {
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      attacks += counts_[t][p];
      flagged += p != 0 ? counts_[t][p] : 0;
    }
  }
  if (attacks == 0) {
    return std::nullopt;
  }
  return static_cast<double>(flagged) / static_cast<double>(attacks);
}

BaselineDetector::BaselineDetector(const sim::BaselineProfile& nominal, double multiple, std::size_t min_exceedances)
    : multiple_(multiple), min_exceedances_(min_exceedances) {
  if (!(multiple > 0.0) || min_exceedances < 1) {
    throw ConfigError("baseline detector needs a positive multiple and at least one exceedance");
  }
  for (auto m : base_metrics()) {
    const double t = multiple * nominal[static_cast<std::size_t>(m)].mean;
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw ConfigError("baseline threshold for '" + std::string(metric_name(m)) + "' must be finite and positive");
    }
    thresholds_[static_cast<std::size_t>(m)] = t;
  }
}

double BaselineDetector::threshold(Metric m) const noexcept { return thresholds_[static_cast<std::size_t>(m)]; }

BaselineDetector::Result BaselineDetector::classify(const Window& window) const {
  Result best;
  for (const auto& [metric, cls] : kTriggers) {
    const double limit = threshold(metric);
    std::size_t over = 0;
    double peak = 0.0;
    for (const auto& s : window.samples()) {
      const double v = s.value(metric);
      over += v > limit ? 1 : 0;
      peak = std::max(peak, v / limit);
    }
    if (over >= min_exceedances_ && peak > best.peak_ratio) {
      best.predicted = cls;
      best.peak_ratio = peak;
    }
  }
  return best;
}

EvalReport evaluate_pipeline(const std::vector<pipeline::WindowResult>& results, double detection_seconds) {
  EvalReport report;
  report.detector = "fuzzy_pipeline";
  report.detection_seconds = detection_seconds;
  for (const auto& r : results) {
    if (!r.truth) {
      throw InputError("evaluation needs labeled windows");
    }
    report.matrix.add(*r.truth, r.verdict.predicted_class);
    report.log.push_back({r.index, *r.truth, r.verdict.predicted_class, r.verdict.raw_output});
  }
  return report;
}

EvalReport evaluate_baseline(const MetricSeries& series, const BaselineDetector& detector, std::size_t window_len,
                             std::size_t stride) {
  if (!series.has_labels()) {
    throw InputError("evaluation needs a labeled series");
  }
  EvalReport report;
  report.detector = "static_threshold_baseline";
  const auto t0 = std::chrono::steady_clock::now();
  const auto windows = slice_windows(series, window_len, stride);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto res = detector.classify(windows[i]);
    report.matrix.add(*windows[i].label(), res.predicted);
    report.log.push_back({i, *windows[i].label(), res.predicted, res.peak_ratio});
  }
  report.detection_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["detector"] = r.detector;
  j["windows"] = r.matrix.total();
  j["accuracy"] = r.matrix.accuracy();
  j["false_positive_rate"] = optional_rate(r.matrix.false_positive_rate());
  j["true_positive_rate"] = optional_rate(r.matrix.true_positive_rate());
  auto& recall = j["recall"] = nlohmann::ordered_json::object();
  for (int c = 0; c < kNumClasses; ++c) {
    const auto cls = static_cast<TrafficClass>(c);
    recall[std::string(class_name(cls))] = optional_rate(r.matrix.recall(cls));
  }
  j["confusion_matrix"] = r.matrix.counts();
  auto& log = j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& e : r.log) {
    log.push_back({{"window", e.window},
                   {"truth", static_cast<int>(e.truth)},
                   {"predicted", static_cast<int>(e.predicted)},
                   {"raw_output", e.raw_output}});
  }
  return j;
}

std::string to_table(const EvalReport& r) {
  std::ostringstream os;
  char line[160];
  os << "detector: " << r.detector << "\n";
  std::snprintf(line, sizeof line, "%-12s", "true\\pred");
  os << line;
  for (int c = 0; c < kNumClasses; ++c) {
    std::snprintf(line, sizeof line, "%11s", std::string(class_name(static_cast<TrafficClass>(c))).c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "%10s\n", "recall");
  os << line;
  for (int t = 0; t < kNumClasses; ++t) {
    const auto truth = static_cast<TrafficClass>(t);
    std::snprintf(line, sizeof line, "%-12s", std::string(class_name(truth)).c_str());
    os << line;
    for (int p = 0; p < kNumClasses; ++p) {
      std::snprintf(line, sizeof line, "%11zu", r.matrix.at(truth, static_cast<TrafficClass>(p)));
      os << line;
    }
    std::snprintf(line, sizeof line, "%10s\n", fmt_rate(r.matrix.recall(truth)).c_str());
    os << line;
  }
  os << "windows:             " << r.matrix.total() << "\n";
  os << "accuracy:            " << fmt_rate(r.matrix.accuracy()) << "\n";
  os << "false positive rate: " << fmt_rate(r.matrix.false_positive_rate()) << "\n";
  os << "true positive rate:  " << fmt_rate(r.matrix.true_positive_rate()) << "\n";
  std::snprintf(line, sizeof line, "detection time:      %.6f s\n", r.detection_seconds);
  os << line;
  return os.str();
}

} // namespace fids::eval
