#pragma once

#include "fids/fuzzy.hpp"
#include "fids/metrics.hpp"
#include "fids/signatures.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace fids::pipeline {

struct PipelineConfig {
  signatures::SignatureConfig signatures{};
  std::size_t window_len = 30;
  std::size_t stride = 30;
  /// Test change-based indicators against the most recent window classified Normal. Suits a
  /// continuous series; turn off when windows are independent runs (corpus training/evaluation).
  bool carry_reference = true;
};

/// Everything computed for one window: indicators, scores, and the fuzzy verdict.
struct WindowResult {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  std::optional<TrafficClass> truth;
  std::optional<std::size_t> reference_start; ///< start of the reference window, if one was used
  std::array<signatures::IndicatorVector, 4> indicators;
  signatures::AttackScoreVector scores;
  fuzzy::Verdict verdict;
};

signatures::AttackScoreVector window_scores(const Window& window, const signatures::SignatureConfig& config);

WindowResult analyze_window(const Window& window, std::size_t index, const fuzzy::FuzzyModel& model,
                            const signatures::SignatureConfig& config, const Window* reference = nullptr);

/// Windows -> indicators -> scores -> verdicts, in window order.
std::vector<WindowResult> detect(const MetricSeries& series, const fuzzy::FuzzyModel& model,
                                 const PipelineConfig& config);

/// Labeled attack-score dataset for training (majority label per window, each window on its
/// own, as in a corpus of independent runs). Throws
/// InputError when the series carries no labels.
std::vector<fuzzy::LabeledScores> scored_dataset(const MetricSeries& series, const PipelineConfig& config);

/// One verdict line: window bounds, class, raw output, scores, indicator states, change reports.
nlohmann::ordered_json to_json(const WindowResult& r);

} // namespace fids::pipeline
