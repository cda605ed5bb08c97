#pragma once

#include "fids/metrics.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace fids::sim {

enum class Scenario : std::uint8_t { Normal, HttpAttack, DbAttack, SynFlood, DnsFlood };

inline constexpr std::array<Scenario, 5> kScenarios{Scenario::Normal, Scenario::HttpAttack, Scenario::DbAttack,
                                                    Scenario::SynFlood, Scenario::DnsFlood};

/// "normal", "http", "database", "syn_flood", "dns_flood".
std::string_view scenario_name(Scenario s) noexcept;
/// Accepts the names above plus "http_attack" / "db_attack". Throws ConfigError listing valid names.
Scenario parse_scenario(std::string_view name);
TrafficClass scenario_class(Scenario s) noexcept;

struct MetricProfile {
  double mean = 0.0;
  double noise_std = 0.0;
  friend bool operator==(const MetricProfile&, const MetricProfile&) = default;
};

/// Post-onset level = pre-onset level * multiply + add.
struct AttackDelta {
  double multiply = 1.0;
  double add = 0.0;
  friend bool operator==(const AttackDelta&, const AttackDelta&) = default;
};

using BaselineProfile = std::array<MetricProfile, kNumBaseMetrics>;
using AttackProfile = std::array<AttackDelta, kNumBaseMetrics>;

/// Normal-operation means (reference load) and noise at 5% of each mean. Request time 0.2 s,
/// web/db I/O 500 Kbit/s, name-server I/O 100 Kbit/s, CPU 20%, web memory 30%,
/// r_syn = r_ack = 0.35, r_synack = 0.15 (the rest carry other flags), 1000 packets/s each way,
/// 10 half-open connections.
BaselineProfile default_baseline();

/// Step deltas for a scenario; identity for Normal. SynFlood's np_i multiplier is
/// syn_flood_packets / normal_load_packets.
AttackProfile default_attack(Scenario s, double normal_load_packets = 20000.0, double syn_flood_packets = 100000.0);

/// True for the channels that scale with offered load (network I/O, packet rates, half-open count).
bool load_scaled(Metric m) noexcept;

struct ScenarioConfig {
  Scenario scenario = Scenario::Normal;
  std::size_t length = 30;
  std::size_t attack_onset = 12; ///< first attacked sample is index attack_onset (0-based)
  BaselineProfile baseline = default_baseline();
  AttackProfile attack = default_attack(Scenario::Normal);
  double normal_load_packets = 20000.0;
  double syn_flood_packets = 100000.0;
  double load_scale = 1.0; ///< multiplies the load-scaled channels, baseline and attack alike
  double start_time = 0.0;
  double sample_interval = 1.0;
  std::uint64_t seed = 42;
};

/// Config with the default profiles for `s`.
ScenarioConfig make_scenario(Scenario s, std::size_t length, std::size_t onset, std::uint64_t seed);

/// Throws ConfigError on an invalid config.
void validate(const ScenarioConfig& config);

struct Generated {
  MetricSeries series;
  std::size_t clip_events = 0; ///< values pulled back into their valid range
};

/// Labeled series: 0 before the onset and the scenario class from the onset on. Noise draws
/// do not depend on the scenario, so an attack run and a Normal run with the same seed and
/// load share their pre-onset samples exactly.
Generated generate(const ScenarioConfig& config);

struct CorpusConfig {
  std::size_t per_scenario_count = 200;
  std::size_t window_len = 30;
  std::size_t onset = 12;
  std::vector<Scenario> scenarios{kScenarios.begin(), kScenarios.end()};
  double load_min = 0.5; ///< per-window offered load drawn uniformly from [load_min, load_max]
  double load_max = 2.5;
  double normal_load_packets = 20000.0;
  double syn_flood_packets = 100000.0;
  BaselineProfile baseline = default_baseline();
  /// Overrides of the default deltas; empty means use default_attack().
  std::vector<std::pair<Scenario, AttackProfile>> attack_overrides;
  std::uint64_t seed = 42;

  AttackProfile attack_for(Scenario s) const;
};

void validate(const CorpusConfig& config);

struct CorpusEntry {
  std::size_t index = 0;
  Scenario scenario = Scenario::Normal;
  std::uint64_t seed = 0;
  double load_scale = 1.0;
  std::size_t start = 0; ///< first sample of this window in the corpus series
  std::size_t clip_events = 0;
};

struct Corpus {
  CorpusConfig config;
  std::vector<CorpusEntry> entries;
  MetricSeries series; ///< windows back to back, window_len samples each
  std::size_t clip_events = 0;
};

/// Round-robin over config.scenarios, per_scenario_count windows each. Each window is an
/// independent scenario run of window_len samples with the attack onset at config.onset.
Corpus generate_corpus(const CorpusConfig& config);

nlohmann::ordered_json config_to_json(const CorpusConfig& config);
/// Reads the `simulator` section layout (see docs/formats.md). Unknown scenario or metric
/// names raise ConfigError.
CorpusConfig config_from_json(const nlohmann::json& j);

nlohmann::ordered_json manifest_json(const Corpus& corpus);
/// Reconstructs the generating config from a manifest.
CorpusConfig config_from_manifest(const nlohmann::json& manifest);

inline constexpr std::string_view kCorpusCsv = "corpus.csv";
inline constexpr std::string_view kManifestJson = "manifest.json";

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

struct LoadedCorpus {
  CorpusConfig config;
  MetricSeries series;
  nlohmann::json manifest;
};

/// Reads corpus.csv + manifest.json from `dir`.
LoadedCorpus read_corpus(const std::filesystem::path& dir);

} // namespace fids::sim
