#include "fids/pipeline.hpp"

#include "fids/error.hpp"

#include <algorithm>

namespace fids::pipeline {

signatures::AttackScoreVector window_scores(const Window& window, const signatures::SignatureConfig& config) {
  const auto vectors = signatures::eval_all(window, config);
  return signatures::score(vectors);
}

WindowResult analyze_window(const Window& window, std::size_t index, const fuzzy::FuzzyModel& model,
                            const signatures::SignatureConfig& config, const Window* reference) {
  WindowResult r;
  r.index = index;
  r.start = window.start();
  r.end = window.end();
  r.start_time = window.samples().front().timestamp;
  r.end_time = window.samples().back().timestamp;
  r.truth = window.label();
  if (reference) {
    r.reference_start = reference->start();
  }
  r.indicators = signatures::eval_all(window, config, reference);
  r.scores = signatures::score(r.indicators);
  r.verdict = fuzzy::infer(model, r.scores);
  return r;
}

std::vector<WindowResult> detect(const MetricSeries& series, const fuzzy::FuzzyModel& model,
                                 const PipelineConfig& config) {
  signatures::validate(config.signatures);
  const auto windows = slice_windows(series, config.window_len, config.stride);
  std::vector<WindowResult> out;
  out.reserve(windows.size());
  const Window* reference = nullptr;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out.push_back(analyze_window(windows[i], i, model, config.signatures, reference));
    // Overlapping windows would share samples with their reference.
    if (config.carry_reference && out.back().verdict.predicted_class == TrafficClass::Normal &&
        config.stride >= config.window_len) {
      reference = &windows[i];
    }
  }
  return out;
}

std::vector<fuzzy::LabeledScores> scored_dataset(const MetricSeries& series, const PipelineConfig& config) {
  if (!series.has_labels()) {
    throw InputError("series has no labels; training and evaluation need a labeled corpus");
  }
  signatures::validate(config.signatures);
  std::vector<fuzzy::LabeledScores> out;
  for (const auto& w : slice_windows(series, config.window_len, config.stride)) {
    out.push_back({fuzzy::to_input(window_scores(w, config.signatures)), *w.label()});
  }
  return out;
}

nlohmann::ordered_json to_json(const WindowResult& r) {
  nlohmann::ordered_json j;
  j["window"] = r.index;
  j["start"] = r.start;
  j["end"] = r.end;
  j["start_time"] = r.start_time;
  j["end_time"] = r.end_time;
  j["class"] = static_cast<int>(r.verdict.predicted_class);
  j["label"] = class_name(r.verdict.predicted_class);
  j["raw_output"] = r.verdict.raw_output;
  j["degenerate"] = r.verdict.degenerate;
  if (r.truth) {
    j["truth"] = static_cast<int>(*r.truth);
  }
  j["reference_start"] = r.reference_start ? nlohmann::ordered_json(*r.reference_start) : nlohmann::ordered_json();
  j["scores"] = signatures::to_json(r.scores);
  auto& indicators = j["indicators"] = nlohmann::ordered_json::array();
  auto& changes = j["changes"] = nlohmann::ordered_json::array();
  std::vector<Metric> reported;
  for (const auto& v : r.indicators) {
    indicators.push_back({{"attack", signatures::attack_name(v.attack_type)},
                          {"states", v.states()},
                          {"score", v.score()}});
    for (const auto& ind : v.indicators) {
      if (const auto* ch = std::get_if<signatures::ChangeEvidence>(&ind.evidence)) {
        if (std::find(reported.begin(), reported.end(), ch->metric) == reported.end()) {
          reported.push_back(ch->metric);
          auto c = cusum::to_json(ch->report, metric_name(ch->metric));
          c["segment_start"] = ch->segment_start;
          changes.push_back(std::move(c));
        }
      }
    }
  }
  return j;
}

} // namespace fids::pipeline
