// fids: simulate, detect, train and evaluate from the command line.

#include "fids/commands.hpp"
#include "fids/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App& app, fids::cli::CommonOptions& o) {
  app.add_option("--seed", o.seed, "Root seed for every random stream (default 42)");
  app.add_option("--config", o.config, "TOML or JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--window-len", o.window_len, "Samples per window (default 30)")->check(CLI::Range(4, 1 << 30));
  app.add_option("--stride", o.stride, "Window stride (default: window length)")->check(CLI::PositiveNumber);
  app.add_option("--theta", o.theta, "Dominance ratio for mean-ratio indicators (default 2.0)");
  app.add_option("--confidence", o.confidence, "CUSUM bootstrap confidence threshold in percent (default 95)");
  app.add_option("--n-boot", o.n_boot, "Bootstrap resamples per CUSUM test (default 1000)");
}

} // namespace

int main(int argc, char** argv) {
  fids::cli::configure_logging();

  CLI::App app{"CUSUM + signature + fuzzy DoS/DDoS detector over VM metric series"};
  app.require_subcommand(1);

  fids::cli::CommonOptions opts;
  std::optional<std::filesystem::path> manifest;
  std::filesystem::path series;
  std::filesystem::path model;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> model_out;

  auto* simulate = app.add_subcommand("simulate", "Generate a labeled synthetic corpus");
  add_common(*simulate, opts);
  simulate->add_option("--manifest", manifest, "Regenerate the corpus described by this manifest")
      ->check(CLI::ExistingFile);

  auto* detect = app.add_subcommand("detect", "Emit one JSON verdict per window; exit 2 if any attack");
  add_common(*detect, opts);
  detect->add_option("series", series, "Metric series (.csv or .jsonl)")->required();
  detect->add_option("--model", model, "Trained model file")->required();
  bool to_file = false;
  detect->add_flag("--write", to_file, "Write <out>/verdicts.jsonl instead of stdout");

  auto* train = app.add_subcommand("train", "Train the fuzzy classifier on a labeled corpus");
  add_common(*train, opts);
  train->add_option("corpus", corpus, "Corpus directory (corpus.csv + manifest.json)")->required();
  train->add_option("--model", model_out, "Model output path (default <out>/model.json)");

  auto* evaluate = app.add_subcommand("evaluate", "Confusion matrix and rates vs the static-threshold baseline");
  add_common(*evaluate, opts);
  evaluate->add_option("corpus", corpus, "Corpus directory")->required();
  evaluate->add_option("--model", model, "Trained model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? fids::cli::kExitOk : fids::cli::kExitError;
  }

  try {
    if (*simulate) {
      return fids::cli::cmd_simulate(opts, manifest, std::cout);
    }
    if (*detect) {
      return fids::cli::cmd_detect(opts, series, model, to_file, std::cout);
    }
    if (*train) {
      return fids::cli::cmd_train(opts, corpus, model_out, std::cout);
    }
    if (*evaluate) {
      return fids::cli::cmd_evaluate(opts, corpus, model, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fids::cli::kExitError;
  }
  return fids::cli::kExitOk;
}
