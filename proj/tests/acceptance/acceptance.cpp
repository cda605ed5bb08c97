// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "fids/commands.hpp"
#include "fids/cusum.hpp"
#include "fids/evaluation.hpp"
#include "fids/fuzzy.hpp"
#include "fids/pipeline.hpp"
#include "fids/signatures.hpp"
#include "fids/simulator.hpp"
#include "support/oracles.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using namespace fids;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void trace_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 199;
    const double scale = std::pow(10.0, static_cast<double>(gen() % 13) - 6.0);
    auto y = fids::testing::noise(n, scale, gen());
    const double shift = scale * static_cast<double>(gen() % 100);
    for (auto& v : y) {
      v += shift;
    }
    double amax = 0.0;
    for (double v : y) {
      amax = std::max(amax, std::fabs(v));
    }
    const auto t = cusum::cusum_trace(y);
    const auto ref = fids::testing::prefix_sum_trace(y);
    const double tol = 1e-9 * amax;
    bool ok = t.s.size() == ref.size() && std::fabs(t.s.front()) <= tol && std::fabs(t.s.back()) <= tol;
    for (std::size_t i = 0; ok && i < ref.size(); ++i) {
      const double err = std::fabs(t.s[i] - static_cast<double>(ref[i]));
      worst = std::max(worst, err / amax);
      ok = err <= tol;
    }
    bad += ok ? 0 : 1;
  }
  const double secs = seconds_since(t0);
  report(1, bad == 0 && secs < 1.0,
         fmt("1000 random series, %zu mismatches, max |S - oracle| / scale = %.2e, %.3f s", bad, worst, secs));
}

void exact_bootstrap() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 4 + static_cast<std::size_t>(k % 4);
    auto y = fids::testing::noise(n, 1.0, 100 + k);
    for (std::size_t i = n / 2; i < n; ++i) {
      y[i] += 0.5 * static_cast<double>(k % 5);
    }
    const double exact = fids::testing::exact_permutation_confidence(y);
    const double mc = cusum::bootstrap_confidence(y, 100000, 1000 + k);
    worst = std::max(worst, std::fabs(exact - mc));
  }
  const double secs = seconds_since(t0);
  report(2, worst <= 3.0 && secs < 30.0,
         fmt("20 series with n in 4..7, max |MC - exhaustive| = %.3f pp, %.2f s", worst, secs));
}

void localization() {
  const auto t0 = Clock::now();
  std::size_t hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto y = fids::testing::step_series(20, 20, 0.0, 5.0, 1.0, 5000 + s);
    cusum::Config cfg;
    cfg.seed = s;
    const auto r = cusum::detect_change(y, cfg);
    const bool ok = r.decision == cusum::Decision::Increase && r.change_index && *r.change_index >= 18 &&
                    *r.change_index <= 22 && r.confidence_pct >= 95.0;
    hits += ok ? 1 : 0;
  }
  std::size_t alarms = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    cusum::Config cfg;
    cfg.seed = s;
    cfg.confidence_threshold_pct = 95.0;
    alarms += cusum::detect_change(fids::testing::noise(40, 1.0, 9000 + s), cfg).decision != cusum::Decision::NoChange;
  }
  const double secs = seconds_since(t0);
  const double far = static_cast<double>(alarms) / 1000.0;
  report(3, hits >= 99 && far <= 0.15 && secs < 120.0,
         fmt("step located in %zu/100, false-alarm rate %.3f, %.2f s", hits, far, secs));
}

void signature_algebra() {
  using namespace signatures;
  std::size_t cases = 0;
  std::size_t exact = 0;
  for (auto t : kAttackTypes) {
    const auto p = indicator_count(t);
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
      std::array<IndicatorVector, 4> vs;
      for (std::size_t k = 0; k < 4; ++k) {
        vs[k].attack_type = kAttackTypes[k];
        const unsigned m = kAttackTypes[k] == t ? mask : 0u;
        for (std::size_t i = 0; i < indicator_count(kAttackTypes[k]); ++i) {
          vs[k].indicators.push_back({"i" + std::to_string(i), ((m >> i) & 1u) != 0, RatioEvidence{}});
        }
      }
      const auto s = score(vs);
      exact += s[t] == static_cast<double>(std::popcount(mask)) / static_cast<double>(p) ? 1 : 0;
      ++cases;
    }
  }
  report(4, cases == 72 && exact == cases,
         fmt("%zu/%zu injected combinations (2^P per attack type) score popcount/P exactly", exact, cases));
}

void signature_fidelity() {
  sim::CorpusConfig cfg;
  const auto corpus = sim::generate_corpus(cfg);
  const auto windows = slice_windows(corpus.series, cfg.window_len, cfg.window_len);
  std::array<std::size_t, 5> total{};
  std::array<std::size_t, 5> good{};
  for (const auto& w : windows) {
    const auto truth = *w.label();
    const auto c = static_cast<std::size_t>(truth);
    const auto scores = pipeline::window_scores(w, {});
    ++total[c];
    if (truth == TrafficClass::Normal) {
      bool all_low = true;
      for (double v : scores.as_array()) {
        all_low = all_low && v <= 0.5;
      }
      good[c] += all_low ? 1 : 0;
    } else {
      good[c] += scores[signatures::kAttackTypes[c - 1]] >= 0.75 ? 1 : 0;
    }
  }
  bool pass = true;
  std::string detail;
  for (std::size_t c = 0; c < 5; ++c) {
    const double rate = static_cast<double>(good[c]) / static_cast<double>(total[c]);
    pass = pass && total[c] == 200 && rate >= (c == 0 ? 0.90 : 0.95);
    detail += fmt("%s %zu/%zu%s", std::string(class_name(static_cast<TrafficClass>(c))).c_str(), good[c], total[c],
                  c < 4 ? ", " : "");
  }
  report(5, pass, detail);
}

void gradient_check() {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    fuzzy::FuzzyModel m(2);
    auto p = m.membership_parameters();
    for (std::size_t i = 0; i < p.size(); i += 2) {
      p[i] += 0.2 * (u(gen) - 0.5);
      p[i + 1] = 0.15 + 0.2 * u(gen);
    }
    m.set_membership_parameters(p);
    for (std::size_t r = 0; r < m.rule_count(); ++r) {
      m.set_consequent(r, {4 * u(gen) - 2, 4 * u(gen) - 2, 4 * u(gen) - 2, 4 * u(gen) - 2, 4 * u(gen)});
    }
    const fuzzy::Input x{u(gen), u(gen), u(gen), u(gen)};
    const double target = static_cast<double>(gen() % 5);
    const auto g = fuzzy::squared_error_gradient(m, x, target);
    const auto f = [&](const std::vector<double>& q) {
      auto mm = m;
      mm.set_membership_parameters(q);
      return fuzzy::squared_error(mm, x, target);
    };
    for (std::size_t k = 0; k < p.size(); ++k) {
      worst = std::max(worst, fids::testing::relative_error(g[k], fids::testing::central_difference(f, p, k, 1e-5)));
    }
  }
  report(6, worst < 1e-4, fmt("10 random points x 16 parameters, max relative error %.2e", worst));
}

struct Trained {
  fuzzy::FuzzyModel model;
  double seconds = 0.0;
};

Trained end_to_end() {
  const auto t0 = Clock::now();
  auto rc = cli::resolve({});
  rc.pipeline.carry_reference = false;
  const auto corpus = sim::generate_corpus(rc.simulator);
  const auto dataset = pipeline::scored_dataset(corpus.series, rc.pipeline);
  const auto trained = fuzzy::train(dataset, rc.training);
  const auto results = pipeline::detect(corpus.series, trained.model, rc.pipeline);
  const auto fz = eval::evaluate_pipeline(results, 0.0);
  const auto base = eval::evaluate_baseline(corpus.series, eval::BaselineDetector(corpus.config.baseline),
                                            rc.pipeline.window_len, rc.pipeline.stride);
  const double secs = seconds_since(t0);

  double min_recall = 1.0;
  for (int c = 0; c < kNumClasses; ++c) {
    min_recall = std::min(min_recall, fz.matrix.recall(static_cast<TrafficClass>(c)).value_or(0.0));
  }
  const double acc = fz.matrix.accuracy();
  const double base_acc = base.matrix.accuracy();
  report(7, fz.matrix.total() == 1000 && acc >= 0.90 && min_recall >= 0.85 && base_acc < acc && secs < 300.0,
         fmt("1000 windows: pipeline accuracy %.3f (min recall %.3f), baseline accuracy %.3f, %.1f s", acc,
             min_recall, base_acc, secs));
  return {trained.model, secs};
}

void overhead(const fuzzy::FuzzyModel& model) {
  auto cfg = sim::make_scenario(sim::Scenario::SynFlood, 10000, 5000, 8);
  const auto series = sim::generate(cfg).series;
  const auto t0 = Clock::now();
  const auto results = pipeline::detect(series, model, {});
  const double secs = seconds_since(t0);
  report(8, results.size() == 333 && secs < 5.0, fmt("10000 samples, %zu windows in %.3f s", results.size(), secs));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const auto root = fs::temp_directory_path() / ("fids_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(root);
  std::ofstream(root / "cfg.toml") << "seed = 11\n[simulator]\nper_scenario_count = 20\n";
  std::ostringstream sink;
  std::size_t compared = 0;
  std::size_t differing = 0;
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / ("run" + std::to_string(run));
    cli::CommonOptions o;
    o.config = root / "cfg.toml";
    o.out = dir;
    cli::cmd_simulate(o, std::nullopt, sink);
    cli::cmd_train(o, dir, std::nullopt, sink);
    cli::cmd_evaluate(o, dir, dir / "model.json", sink);
    auto series = sim::make_scenario(sim::Scenario::DnsFlood, 300, 150, 3);
    save_series(sim::generate(series).series, dir / "dns.csv", SeriesFormat::Csv);
    cli::cmd_detect(o, dir / "dns.csv", dir / "model.json", true, sink);
  }
  for (const char* name : {"corpus.csv", "manifest.json", "model.json", "history.csv", "train_summary.json",
                           "eval_report.json", "verdicts.csv", "verdicts.jsonl"}) {
    ++compared;
    const auto a = slurp(root / "run0" / name);
    differing += (a.empty() || a != slurp(root / "run1" / name)) ? 1 : 0;
  }
  fs::remove_all(root);
  report(9, differing == 0, fmt("simulate/train/evaluate/detect twice: %zu/%zu outputs byte-identical",
                                compared - differing, compared));
}

void guarded(int id, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

} // namespace

int main() {
  cli::configure_logging();
  guarded(1, trace_correctness);
  guarded(2, exact_bootstrap);
  guarded(3, localization);
  guarded(4, signature_algebra);
  guarded(5, signature_fidelity);
  guarded(6, gradient_check);
  Trained trained;
  guarded(7, [&] { trained = end_to_end(); });
  guarded(8, [&] { overhead(trained.model); });
  guarded(9, determinism);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
