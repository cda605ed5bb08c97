#include "fids/commands.hpp"
#include "fids/error.hpp"
#include "fids/pipeline.hpp"
#include "fids/simulator.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

namespace fids::sim {
namespace {

namespace fs = std::filesystem;

double mean_of(std::span<const MetricSample> s, Metric m, std::size_t from, std::size_t to) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) {
    acc += s[i].value(m);
  }
  return acc / static_cast<double>(to - from);
}

TEST(Simulator, SynFloodRaisesHalfOpenConnectionsAfterOnset) {
  const auto g = generate(make_scenario(Scenario::SynFlood, 60, 30, 4));
  const auto s = g.series.samples();
  const double pre = mean_of(s, Metric::Nhop, 0, 30);
  const double post = mean_of(s, Metric::Nhop, 30, 60);
  EXPECT_NEAR(pre, 10.0, 1.5);
  EXPECT_GT(post, 5.0 * pre);
  EXPECT_EQ(g.series.labels()[29], TrafficClass::Normal);
  EXPECT_EQ(g.series.labels()[30], TrafficClass::SynFlood);
}

TEST(Simulator, NormalHandshakeIsBalanced) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = generate(make_scenario(Scenario::Normal, 30, 12, seed));
    const auto s = g.series.samples();
    const double ratio = mean_of(s, Metric::RSyn, 0, 30) / mean_of(s, Metric::RAck, 0, 30);
    EXPECT_GE(ratio, 0.8);
    EXPECT_LE(ratio, 1.25);
  }
}

TEST(Simulator, SameSeedSameSeries) {
  const auto cfg = make_scenario(Scenario::DnsFlood, 40, 16, 99);
  EXPECT_EQ(generate(cfg).series, generate(cfg).series);
  auto other = cfg;
  other.seed = 100;
  EXPECT_NE(generate(cfg).series, generate(other).series);
}

TEST(Simulator, PreOnsetSamplesMatchANormalRun) {
  for (auto s : kScenarios) {
    auto normal = make_scenario(Scenario::Normal, 30, 12, 5);
    auto attack = make_scenario(s, 30, 12, 5);
    normal.load_scale = attack.load_scale = 1.7;
    const auto a = generate(normal).series.samples();
    const auto b = generate(attack).series.samples();
    for (std::size_t i = 0; i < 12; ++i) {
      EXPECT_EQ(a[i], b[i]) << scenario_name(s) << " sample " << i;
    }
  }
}

TEST(Simulator, SamplesSatisfyInvariants) {
  for (auto s : kScenarios) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto cfg = make_scenario(s, 30, 12, seed);
      cfg.load_scale = 2.5;
      const auto g = generate(cfg);
      std::size_t row = 0;
      for (const auto& x : g.series.samples()) {
        EXPECT_NO_THROW(validate_sample(x, row++));
      }
    }
  }
}

TEST(Simulator, ConfigValidation) {
  auto cfg = make_scenario(Scenario::HttpAttack, 30, 40, 1);
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = make_scenario(Scenario::HttpAttack, 30, 12, 1);
  cfg.load_scale = 0.0;
  EXPECT_THROW(validate(cfg), ConfigError);
  CorpusConfig cc;
  cc.load_min = 3.0;
  EXPECT_THROW(validate(cc), ConfigError);
}

TEST(Simulator, ScenarioNames) {
  for (auto s : kScenarios) {
    EXPECT_EQ(parse_scenario(scenario_name(s)), s);
  }
  EXPECT_EQ(parse_scenario("http_attack"), Scenario::HttpAttack);
  try {
    parse_scenario("smurf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("syn_flood"), std::string::npos);
  }
}

TEST(Corpus, BalancedRoundRobin) {
  const auto c = generate_corpus({});
  ASSERT_EQ(c.entries.size(), 1000u);
  EXPECT_EQ(c.series.size(), 30000u);
  std::array<std::size_t, 5> hist{};
  for (const auto& e : c.entries) {
    ++hist[static_cast<std::size_t>(e.scenario)];
    EXPECT_GE(e.load_scale, 0.5);
    EXPECT_LE(e.load_scale, 2.5);
  }
  for (auto h : hist) {
    EXPECT_EQ(h, 200u);
  }
  EXPECT_EQ(c.entries[3].scenario, Scenario::SynFlood);
  const auto windows = slice_windows(c.series, 30, 30);
  ASSERT_EQ(windows.size(), 1000u);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    EXPECT_EQ(windows[i].label(), scenario_class(c.entries[i].scenario));
  }
}

TEST(Corpus, ManifestRegeneratesTheSameCorpus) {
  CorpusConfig cfg;
  cfg.per_scenario_count = 6;
  cfg.seed = 31;
  cfg.load_max = 1.5;
  const auto a = generate_corpus(cfg);
  const auto j = nlohmann::json::parse(manifest_json(a).dump());
  const auto b = generate_corpus(config_from_manifest(j));
  EXPECT_EQ(a.series, b.series);
  EXPECT_EQ(manifest_json(a).dump(), manifest_json(b).dump());
}

TEST(Corpus, WriteThenReadRoundTrips) {
  const auto dir = fs::temp_directory_path() / "fids_sim_corpus";
  CorpusConfig cfg;
  cfg.per_scenario_count = 3;
  const auto c = generate_corpus(cfg);
  write_corpus(c, dir);
  const auto loaded = read_corpus(dir);
  EXPECT_EQ(loaded.series, c.series);
  EXPECT_EQ(loaded.config.per_scenario_count, 3u);
  fs::remove_all(dir);
}

TEST(Corpus, AttackWindowsCarryTheirSignature) {
  CorpusConfig cfg;
  cfg.per_scenario_count = 40;
  cfg.seed = 8;
  const auto c = generate_corpus(cfg);
  const auto windows = slice_windows(c.series, 30, 30);
  std::size_t consistent = 0;
  std::size_t attacks = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto truth = *windows[i].label();
    if (truth == TrafficClass::Normal) {
      continue;
    }
    ++attacks;
    const auto scores = pipeline::window_scores(windows[i], {});
    const auto t = signatures::kAttackTypes[static_cast<std::size_t>(truth) - 1];
    consistent += scores[t] >= 0.75 ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(consistent) / static_cast<double>(attacks), 0.95);
}

TEST(Corpus, ConfigParsing) {
  const auto j = nlohmann::json::parse(R"({
    "per_scenario_count": 4, "window_len": 40, "scenarios": ["normal", "dns_flood"],
    "baseline": {"cpu_w": {"mean": 30}},
    "attack": {"dns_flood": {"ion_i": {"multiply": 10}}}
  })");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.onset, 16u);
  EXPECT_EQ(c.scenarios.size(), 2u);
  EXPECT_DOUBLE_EQ(c.baseline[static_cast<std::size_t>(Metric::CpuW)].mean, 30.0);
  EXPECT_DOUBLE_EQ(c.baseline[static_cast<std::size_t>(Metric::CpuW)].noise_std, 1.5);
  EXPECT_DOUBLE_EQ(c.attack_for(Scenario::DnsFlood)[static_cast<std::size_t>(Metric::IonI)].multiply, 10.0);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"scenarios": ["ping"]})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"colour": 1})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"baseline": {"bogus": {"mean": 1}}})")), ConfigError);
}

TEST(Corpus, TomlAndJsonConfigsAgree) {
  const auto dir = fs::temp_directory_path() / "fids_sim_cfg";
  fs::create_directories(dir);
  std::ofstream(dir / "c.toml") << "seed = 5\n[simulator]\nper_scenario_count = 2\nscenarios = [\"normal\", "
                                   "\"syn_flood\"]\n[simulator.baseline.nhop]\nmean = 12.0\n";
  std::ofstream(dir / "c.json") << R"({"seed": 5, "simulator": {"per_scenario_count": 2,
    "scenarios": ["normal", "syn_flood"], "baseline": {"nhop": {"mean": 12.0}}}})";
  cli::CommonOptions a;
  a.config = dir / "c.toml";
  cli::CommonOptions b;
  b.config = dir / "c.json";
  const auto ra = cli::resolve(a);
  const auto rb = cli::resolve(b);
  EXPECT_EQ(config_to_json(ra.simulator).dump(), config_to_json(rb.simulator).dump());
  EXPECT_EQ(ra.simulator.per_scenario_count, 2u);
  EXPECT_EQ(ra.seed, 5u);
  fs::remove_all(dir);
}

} // namespace
} // namespace fids::sim
