#pragma once

#include "fids/evaluation.hpp"
#include "fids/fuzzy.hpp"
#include "fids/pipeline.hpp"
#include "fids/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace fids::cli {

/// Exit codes: 0 ok / no attack, 1 error, 2 attack detected (detect only).
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAttack = 2;

/// Flags shared by every subcommand. Unset flags fall back to the config file, then defaults.
struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = ".";
  std::optional<std::size_t> window_len;
  std::optional<std::size_t> stride;
  std::optional<double> theta;
  std::optional<double> confidence;
  std::optional<std::size_t> n_boot;
};

/// Reads a TOML (.toml) or JSON (anything else) file into a JSON document.
nlohmann::json load_structured_file(const std::filesystem::path& path);

struct RunConfig {
  std::uint64_t seed = 42;
  sim::CorpusConfig simulator;
  pipeline::PipelineConfig pipeline;
  fuzzy::TrainConfig training;
  double baseline_multiple = 2.0;
  std::size_t baseline_min_exceedances = 3;
  bool window_len_set = false; ///< window length came from a flag or the config file
  bool stride_set = false;
};

/// Merges defaults, the optional config file and explicit flags (flags win).
RunConfig resolve(const CommonOptions& options);

/// Writes corpus.csv and manifest.json to options.out. With `manifest`, regenerates
/// exactly the corpus that manifest describes.
int cmd_simulate(const CommonOptions& options, const std::optional<std::filesystem::path>& manifest,
                 std::ostream& out);

/// Writes one JSON verdict per window to `<out>/verdicts.jsonl` when `to_file`, else to `out`.
int cmd_detect(const CommonOptions& options, const std::filesystem::path& series,
               const std::filesystem::path& model, bool to_file, std::ostream& out);

/// Writes model.json (or `model_path`), history.csv and train_summary.json.
int cmd_train(const CommonOptions& options, const std::filesystem::path& corpus,
              const std::optional<std::filesystem::path>& model_path, std::ostream& out);

/// Writes eval_report.json, eval_report.txt and verdicts.csv; prints the tables.
int cmd_evaluate(const CommonOptions& options, const std::filesystem::path& corpus,
                 const std::filesystem::path& model, std::ostream& out);

/// Sets the spdlog level from FIDS_LOG (trace, debug, info, warn, error, off). Default warn.
void configure_logging();

} // namespace fids::cli
