#include "fids/commands.hpp"

#include "fids/error.hpp"
#include "fids/kernels.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <tomlplusplus/toml.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fids::cli {
namespace {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw InputError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) {
    throw InputError("cannot write '" + path.string() + "'");
  }
}

template <typename T>
void read_opt(const nlohmann::json& section, const char* key, T& target, const char* where) {
  const auto it = section.find(key);
  if (it == section.end()) {
    return;
  }
  try {
    target = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config [") + where + "]: bad value for '" + key + "'");
  }
}

void reject_unknown(const nlohmann::json& section, std::initializer_list<const char*> keys, const char* where) {
  if (!section.is_object()) {
    throw ConfigError(std::string("config [") + where + "] must be a table/object");
  }
  for (const auto& [key, _] : section.items()) {
    bool known = false;
    for (auto k : keys) {
      known = known || key == k;
    }
    if (!known) {
      throw ConfigError(std::string("config [") + where + "]: unknown key '" + key + "'");
    }
  }
}

std::string csv_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::size_t corpus_window_len(const RunConfig& rc, const sim::LoadedCorpus& corpus) {
  return rc.window_len_set ? rc.pipeline.window_len : corpus.config.window_len;
}

pipeline::PipelineConfig corpus_pipeline(const RunConfig& rc, const sim::LoadedCorpus& corpus) {
  auto p = rc.pipeline;
  p.window_len = corpus_window_len(rc, corpus);
  // Corpus windows are independent runs at different loads.
  p.carry_reference = false;
  if (!rc.stride_set) {
    p.stride = p.window_len;
  }
  return p;
}

} // namespace

nlohmann::json load_structured_file(const fs::path& path) {
  const auto text = read_text(path);
  if (path.extension() == ".toml") {
    try {
      const auto table = toml::parse(text, path.string());
      std::ostringstream ss;
      ss << toml::json_formatter{table};
      return nlohmann::json::parse(ss.str());
    } catch (const toml::parse_error& e) {
      throw ConfigError("invalid TOML in '" + path.string() + "': " + std::string(e.description()));
    }
  }
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig rc;
  nlohmann::json file = nlohmann::json::object();
  if (o.config) {
    file = load_structured_file(*o.config);
    reject_unknown(file, {"seed", "simulator", "signatures", "pipeline", "training", "baseline"}, "top level");
  }
  read_opt(file, "seed", rc.seed, "top level");
  if (o.seed) {
    rc.seed = *o.seed;
  }

  if (const auto it = file.find("simulator"); it != file.end()) {
    rc.simulator = sim::config_from_json(*it);
  }
  const bool simulator_seed = file.contains("simulator") && file["simulator"].contains("seed");
  if (o.seed || file.contains("seed") || !simulator_seed) {
    rc.simulator.seed = rc.seed;
  }

  auto& sig = rc.pipeline.signatures;
  if (const auto it = file.find("signatures"); it != file.end()) {
    reject_unknown(*it, {"theta", "syn_ack_imbalance_ratio", "n_boot", "confidence_pct", "min_segment"},
                   "signatures");
    read_opt(*it, "theta", sig.theta, "signatures");
    read_opt(*it, "syn_ack_imbalance_ratio", sig.syn_ack_imbalance_ratio, "signatures");
    read_opt(*it, "n_boot", sig.cusum.n_boot, "signatures");
    read_opt(*it, "confidence_pct", sig.cusum.confidence_threshold_pct, "signatures");
    read_opt(*it, "min_segment", sig.cusum.min_segment, "signatures");
  }
  if (const auto it = file.find("pipeline"); it != file.end()) {
    reject_unknown(*it, {"window_len", "stride"}, "pipeline");
    rc.window_len_set = it->contains("window_len");
    rc.stride_set = it->contains("stride");
    read_opt(*it, "window_len", rc.pipeline.window_len, "pipeline");
    read_opt(*it, "stride", rc.pipeline.stride, "pipeline");
  }
  if (const auto it = file.find("training"); it != file.end()) {
    reject_unknown(*it, {"epochs", "learning_rate", "train_fraction", "tolerance", "mf_per_input"}, "training");
    read_opt(*it, "epochs", rc.training.epochs, "training");
    read_opt(*it, "learning_rate", rc.training.learning_rate, "training");
    read_opt(*it, "train_fraction", rc.training.train_fraction, "training");
    read_opt(*it, "tolerance", rc.training.tolerance, "training");
    read_opt(*it, "mf_per_input", rc.training.mf_per_input, "training");
  }
  if (const auto it = file.find("baseline"); it != file.end()) {
    reject_unknown(*it, {"multiple", "min_exceedances"}, "baseline");
    read_opt(*it, "multiple", rc.baseline_multiple, "baseline");
    read_opt(*it, "min_exceedances", rc.baseline_min_exceedances, "baseline");
  }

  if (o.window_len) {
    rc.pipeline.window_len = *o.window_len;
    rc.window_len_set = true;
    rc.simulator.window_len = *o.window_len;
    rc.simulator.onset = (2 * *o.window_len) / 5;
  }
  if (!rc.stride_set) {
    rc.pipeline.stride = rc.pipeline.window_len;
  }
  if (o.stride) {
    rc.pipeline.stride = *o.stride;
    rc.stride_set = true;
  }
  if (o.theta) {
    sig.theta = *o.theta;
  }
  if (o.confidence) {
    sig.cusum.confidence_threshold_pct = *o.confidence;
  }
  if (o.n_boot) {
    sig.cusum.n_boot = *o.n_boot;
  }
  sig.cusum.seed = rc.seed;
  rc.training.seed = rc.seed;

  signatures::validate(sig);
  fuzzy::validate(rc.training);
  sim::validate(rc.simulator);
  if (rc.pipeline.window_len < kMinWindowLen || rc.pipeline.stride < 1) {
    throw ConfigError("window length must be >= 4 and stride >= 1");
  }
  return rc;
}

int cmd_simulate(const CommonOptions& o, const std::optional<fs::path>& manifest, std::ostream& out) {
  auto rc = resolve(o);
  sim::CorpusConfig config = rc.simulator;
  if (manifest) {
    config = sim::config_from_manifest(load_structured_file(*manifest));
  }
  const auto corpus = sim::generate_corpus(config);
  sim::write_corpus(corpus, o.out);
  out << "wrote " << corpus.entries.size() << " windows (" << corpus.series.size() << " samples) to "
      << o.out.string() << "\n";
  return kExitOk;
}

int cmd_detect(const CommonOptions& o, const fs::path& series_path, const fs::path& model_path, bool to_file,
               std::ostream& out) {
  const auto rc = resolve(o);
  const auto model = fuzzy::load_model(model_path);
  const auto series = load_series(series_path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = pipeline::detect(series, model, rc.pipeline);
  spdlog::info("detected {} windows in {:.6f} s ({} kernels)", results.size(),
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(),
               kernels::isa_name(kernels::active_isa()));

  std::string lines;
  bool attack = false;
  for (const auto& r : results) {
    lines += pipeline::to_json(r).dump();
    lines += '\n';
    attack = attack || r.verdict.predicted_class != TrafficClass::Normal;
  }
  if (to_file) {
    write_text(o.out / "verdicts.jsonl", lines);
  } else {
    out << lines;
  }
  return attack ? kExitAttack : kExitOk;
}

int cmd_train(const CommonOptions& o, const fs::path& corpus_dir, const std::optional<fs::path>& model_path,
              std::ostream& out) {
  const auto rc = resolve(o);
  const auto corpus = sim::read_corpus(corpus_dir);
  const auto pipe = corpus_pipeline(rc, corpus);
  const auto dataset = pipeline::scored_dataset(corpus.series, pipe);
  const auto result = fuzzy::train(dataset, rc.training);

  const auto model_file = model_path.value_or(o.out / "model.json");
  if (model_file.has_parent_path()) {
    fs::create_directories(model_file.parent_path());
  }
  fuzzy::save_model(result.model, model_file);

  std::string history = "epoch,rmse_before_ls,rmse_after_ls,train_rmse,validation_rmse,validation_accuracy,ls_rank,"
                        "rank_deficient\n";
  for (const auto& h : result.history) {
    history += std::to_string(h.epoch) + "," + csv_double(h.rmse_before_ls) + "," + csv_double(h.rmse_after_ls) +
               "," + csv_double(h.train_rmse) + "," + csv_double(h.validation_rmse) + "," +
               csv_double(h.validation_accuracy) + "," + std::to_string(h.ls_rank) + "," +
               (h.rank_deficient ? "1" : "0") + "\n";
  }
  write_text(o.out / "history.csv", history);

  nlohmann::ordered_json summary;
  summary["model"] = model_file.filename().string();
  summary["windows"] = dataset.size();
  summary["train_count"] = result.train_count;
  summary["validation_count"] = result.validation_count;
  summary["epochs_run"] = result.history.size();
  summary["train_rmse"] = result.train_rmse;
  summary["validation_rmse"] = result.validation_rmse;
  summary["validation_accuracy"] = result.validation_accuracy;
  summary["seed"] = rc.seed;
  write_text(o.out / "train_summary.json", summary.dump(2) + "\n");

  char line[128];
  std::snprintf(line, sizeof line, "trained on %zu windows (%zu held out): validation accuracy %.4f, rmse %.4f\n",
                result.train_count, result.validation_count, result.validation_accuracy, result.validation_rmse);
  out << line << "model written to " << model_file.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const CommonOptions& o, const fs::path& corpus_dir, const fs::path& model_path, std::ostream& out) {
  const auto rc = resolve(o);
  const auto model = fuzzy::load_model(model_path);
  const auto corpus = sim::read_corpus(corpus_dir);
  if (!corpus.series.has_labels()) {
    throw InputError("corpus '" + corpus_dir.string() + "' has no labels");
  }
  const auto pipe = corpus_pipeline(rc, corpus);

  const auto t0 = std::chrono::steady_clock::now();
  const auto results = pipeline::detect(corpus.series, model, pipe);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto fuzzy_report = eval::evaluate_pipeline(results, seconds);

  const eval::BaselineDetector baseline(corpus.config.baseline, rc.baseline_multiple, rc.baseline_min_exceedances);
  const auto baseline_report = eval::evaluate_baseline(corpus.series, baseline, pipe.window_len, pipe.stride);

  nlohmann::ordered_json j;
  j["window_len"] = pipe.window_len;
  j["stride"] = pipe.stride;
  j["seed"] = rc.seed;
  j["theta"] = pipe.signatures.theta;
  j["confidence_pct"] = pipe.signatures.cusum.confidence_threshold_pct;
  j["n_boot"] = pipe.signatures.cusum.n_boot;
  j["pipeline"] = eval::to_json(fuzzy_report);
  j["baseline"] = eval::to_json(baseline_report);
  write_text(o.out / "eval_report.json", j.dump(2) + "\n");

  const auto table = eval::to_table(fuzzy_report) + "\n" + eval::to_table(baseline_report);
  write_text(o.out / "eval_report.txt", table);

  std::string csv = "window,truth,pipeline_class,baseline_class,raw_output,s_http,s_database,s_syn_flood,s_dns_flood\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    csv += std::to_string(r.index) + "," + std::to_string(static_cast<int>(*r.truth)) + "," +
           std::to_string(static_cast<int>(r.verdict.predicted_class)) + "," +
           std::to_string(static_cast<int>(baseline_report.log[i].predicted)) + "," +
           csv_double(r.verdict.raw_output) + "," + csv_double(r.scores.http) + "," + csv_double(r.scores.database) +
           "," + csv_double(r.scores.syn_flood) + "," + csv_double(r.scores.dns_flood) + "\n";
  }
  write_text(o.out / "verdicts.csv", csv);

  out << table;
  return kExitOk;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("fids");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("FIDS_LOG"); env != nullptr) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honor a genuine "off".
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    }
  }
}

} // namespace fids::cli
