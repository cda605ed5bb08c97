#include "fids/simulator.hpp"

#include "fids/error.hpp"
#include "fids/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace fids::sim {
namespace {

constexpr double kNoiseFraction = 0.05;
constexpr double kReferencePackets = 20000.0;
constexpr int kCorpusFormatVersion = 1;

std::size_t idx(Metric m) noexcept { return static_cast<std::size_t>(m); }

std::string valid_scenarios() {
  std::string s;
  for (auto sc : kScenarios) {
    s += s.empty() ? "" : ", ";
    s += scenario_name(sc);
  }
  return s;
}

// Clamps one value into its domain and reports whether it had to move.
bool clip(Metric m, double& v) noexcept {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  switch (m) {
  case Metric::CpuW:
  case Metric::CpuD:
  case Metric::CpuN:
  case Metric::MemW:
    hi = 100.0;
    break;
  case Metric::RSyn:
  case Metric::RAck:
  case Metric::RSynAck:
    hi = 1.0;
    break;
  default:
    break;
  }
  const double c = std::clamp(v, lo, hi);
  const bool moved = c != v;
  v = c;
  return moved;
}

nlohmann::ordered_json profile_to_json(const BaselineProfile& p) {
  nlohmann::ordered_json j;
  for (auto m : base_metrics()) {
    j[std::string(metric_name(m))] = {{"mean", p[idx(m)].mean}, {"std", p[idx(m)].noise_std}};
  }
  return j;
}

nlohmann::ordered_json attack_to_json(const AttackProfile& p) {
  nlohmann::ordered_json j;
  for (auto m : base_metrics()) {
    j[std::string(metric_name(m))] = {{"multiply", p[idx(m)].multiply}, {"add", p[idx(m)].add}};
  }
  return j;
}

Metric config_metric(const std::string& name) {
  try {
    const auto m = parse_metric(name);
    if (m == Metric::SynAckRatio) {
      throw InputError("derived");
    }
    return m;
  } catch (const InputError&) {
    throw ConfigError("unknown metric '" + name + "' in simulator profile");
  }
}

double number(const nlohmann::json& j, const char* key, double fallback) {
  const auto it = j.find(key);
  if (it == j.end()) {
    return fallback;
  }
  if (!it->is_number()) {
    throw ConfigError(std::string("simulator config: '") + key + "' must be a number");
  }
  return it->get<double>();
}

std::size_t count(const nlohmann::json& j, const char* key, std::size_t fallback) {
  const auto it = j.find(key);
  if (it == j.end()) {
    return fallback;
  }
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw ConfigError(std::string("simulator config: '") + key + "' must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

} // namespace

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
  case Scenario::Normal:
    return "normal";
  case Scenario::HttpAttack:
    return "http";
  case Scenario::DbAttack:
    return "database";
  case Scenario::SynFlood:
    return "syn_flood";
  case Scenario::DnsFlood:
    return "dns_flood";
  }
  return "normal";
}

Scenario parse_scenario(std::string_view name) {
  for (auto s : kScenarios) {
    if (scenario_name(s) == name) {
      return s;
    }
  }
  if (name == "http_attack") {
    return Scenario::HttpAttack;
  }
  if (name == "db_attack") {
    return Scenario::DbAttack;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'; valid options: " + valid_scenarios());
}

TrafficClass scenario_class(Scenario s) noexcept { return static_cast<TrafficClass>(static_cast<int>(s)); }

BaselineProfile default_baseline() {
  BaselineProfile p{};
  auto set = [&](Metric m, double mean) { p[idx(m)] = {mean, kNoiseFraction * mean}; };
  set(Metric::AvgRequestTime, 0.2);
  for (auto m : {Metric::IowI, Metric::IowO, Metric::IodI, Metric::IodO}) {
    set(m, 500.0);
  }
  set(Metric::IonI, 100.0);
  set(Metric::IonO, 100.0);
  for (auto m : {Metric::CpuW, Metric::CpuD, Metric::CpuN}) {
    set(m, 20.0);
  }
  set(Metric::MemW, 30.0);
  set(Metric::RSyn, 0.35);
  set(Metric::RAck, 0.35);
  set(Metric::RSynAck, 0.15);
  set(Metric::NpI, 1000.0);
  set(Metric::NpO, 1000.0);
  set(Metric::Nhop, 10.0);
  return p;
}

AttackProfile default_attack(Scenario s, double normal_load_packets, double syn_flood_packets) {
  AttackProfile p{};
  auto mul = [&](Metric m, double f) { p[idx(m)] = {f, 0.0}; };
  auto level = [&](Metric m, double v) { p[idx(m)] = {0.0, v}; };
  switch (s) {
  case Scenario::Normal:
    break;
  case Scenario::HttpAttack:
    // Web tier flooded; the database is left untouched.
    mul(Metric::AvgRequestTime, 0.4);
    mul(Metric::IowI, 4.0);
    mul(Metric::IowO, 4.0);
    mul(Metric::CpuW, 4.0);
    mul(Metric::NpI, 2.0);
    mul(Metric::NpO, 2.0);
    break;
  case Scenario::DbAttack:
    // Database flooded while web-tier traffic falls off.
    mul(Metric::AvgRequestTime, 4.0);
    mul(Metric::IodI, 4.0);
    mul(Metric::IodO, 4.0);
    mul(Metric::IowI, 0.5);
    mul(Metric::IowO, 0.5);
    mul(Metric::CpuD, 4.0);
    break;
  case Scenario::SynFlood:
    // Handshakes never complete: memory and half-open entries pile up and regular I/O starves.
    mul(Metric::MemW, 2.5);
    mul(Metric::NpI, syn_flood_packets / normal_load_packets);
    mul(Metric::NpO, 3.0);
    mul(Metric::Nhop, 20.0);
    level(Metric::RSyn, 0.80);
    level(Metric::RAck, 0.04);
    level(Metric::RSynAck, 0.08);
    for (auto m : {Metric::IowI, Metric::IowO, Metric::IodI, Metric::IodO}) {
      mul(m, 0.3);
    }
    break;
  case Scenario::DnsFlood:
    mul(Metric::IonI, 25.0);
    mul(Metric::IonO, 25.0);
    mul(Metric::CpuN, 4.0);
    for (auto m : {Metric::IowI, Metric::IowO, Metric::IodI, Metric::IodO}) {
      mul(m, 0.5);
    }
    break;
  }
  return p;
}

bool load_scaled(Metric m) noexcept {
  switch (m) {
  case Metric::IowI:
  case Metric::IowO:
  case Metric::IodI:
  case Metric::IodO:
  case Metric::IonI:
  case Metric::IonO:
  case Metric::NpI:
  case Metric::NpO:
  case Metric::Nhop:
    return true;
  default:
    return false;
  }
}

ScenarioConfig make_scenario(Scenario s, std::size_t length, std::size_t onset, std::uint64_t seed) {
  ScenarioConfig c;
  c.scenario = s;
  c.length = length;
  c.attack_onset = onset;
  c.attack = default_attack(s, c.normal_load_packets, c.syn_flood_packets);
  c.seed = seed;
  return c;
}

void validate(const ScenarioConfig& c) {
  if (c.length < 1) {
    throw ConfigError("scenario length must be >= 1");
  }
  if (c.scenario != Scenario::Normal && (c.attack_onset == 0 || c.attack_onset >= c.length)) {
    throw ConfigError("attack onset must satisfy 0 < onset < length (onset " + std::to_string(c.attack_onset) +
                      ", length " + std::to_string(c.length) + ")");
  }
  for (auto m : base_metrics()) {
    const auto& p = c.baseline[idx(m)];
    if (!(p.noise_std >= 0.0) || !std::isfinite(p.mean) || !std::isfinite(p.noise_std)) {
      throw ConfigError("baseline for '" + std::string(metric_name(m)) + "' needs a finite mean and std >= 0");
    }
    const auto& d = c.attack[idx(m)];
    if (!std::isfinite(d.multiply) || !std::isfinite(d.add)) {
      throw ConfigError("attack delta for '" + std::string(metric_name(m)) + "' must be finite");
    }
  }
  if (!(c.normal_load_packets > 0.0) || !(c.syn_flood_packets > 0.0)) {
    throw ConfigError("packet loads must be > 0");
  }
  if (!(c.load_scale > 0.0) || !std::isfinite(c.load_scale)) {
    throw ConfigError("load scale must be > 0");
  }
  if (!(c.sample_interval > 0.0) || !(c.start_time >= 0.0)) {
    throw ConfigError("sample interval must be > 0 and start time >= 0");
  }
}

Generated generate(const ScenarioConfig& c) {
  validate(c);
  SplitMix64 rng(c.seed);
  const double packet_scale = c.normal_load_packets / kReferencePackets;
  const bool attack = c.scenario != Scenario::Normal;
  const auto attack_class = scenario_class(c.scenario);

  std::vector<MetricSample> samples(c.length);
  std::vector<TrafficClass> labels(c.length, TrafficClass::Normal);
  std::size_t clipped = 0;
  for (std::size_t t = 0; t < c.length; ++t) {
    auto& s = samples[t];
    s.timestamp = c.start_time + static_cast<double>(t) * c.sample_interval;
    const bool attacked = attack && t >= c.attack_onset;
    for (auto m : base_metrics()) {
      const auto& p = c.baseline[idx(m)];
      double scale = load_scaled(m) ? c.load_scale : 1.0;
      if (m == Metric::NpI || m == Metric::NpO) {
        scale *= packet_scale;
      }
      double level = p.mean * scale;
      if (attacked) {
        const auto& d = c.attack[idx(m)];
        level = level * d.multiply + d.add * (load_scaled(m) ? scale : 1.0);
      }
      // Always draw, so the noise stream is identical across scenarios.
      double v = level + p.noise_std * scale * rng.normal();
      if (m == Metric::Nhop) {
        v = std::round(v);
      }
      clipped += clip(m, v) ? 1 : 0;
      s.set(m, v);
    }
    const double flags = s.r_syn + s.r_ack + s.r_synack;
    if (flags > 1.0) {
      s.r_syn /= flags;
      s.r_ack /= flags;
      s.r_synack /= flags;
      ++clipped;
    }
    if (attacked) {
      labels[t] = attack_class;
    }
  }
  return {MetricSeries(std::move(samples), std::move(labels)), clipped};
}

AttackProfile CorpusConfig::attack_for(Scenario s) const {
  for (const auto& [sc, profile] : attack_overrides) {
    if (sc == s) {
      return profile;
    }
  }
  return default_attack(s, normal_load_packets, syn_flood_packets);
}

void validate(const CorpusConfig& c) {
  if (c.per_scenario_count < 1) {
    throw ConfigError("per-scenario count must be >= 1");
  }
  if (c.window_len < kMinWindowLen) {
    throw ConfigError("window length must be >= " + std::to_string(kMinWindowLen));
  }
  if (c.onset == 0 || c.onset >= c.window_len) {
    throw ConfigError("onset must satisfy 0 < onset < window length");
  }
  if (c.scenarios.empty()) {
    throw ConfigError("at least one scenario is required; valid options: " + valid_scenarios());
  }
  if (!(c.load_min > 0.0) || !(c.load_max >= c.load_min) || !std::isfinite(c.load_max)) {
    throw ConfigError("load range must satisfy 0 < load_min <= load_max");
  }
}

Corpus generate_corpus(const CorpusConfig& config) {
  validate(config);
  Corpus corpus;
  corpus.config = config;
  const std::size_t total = config.per_scenario_count * config.scenarios.size();
  std::vector<MetricSample> samples;
  std::vector<TrafficClass> labels;
  samples.reserve(total * config.window_len);
  labels.reserve(total * config.window_len);
  for (std::size_t e = 0; e < total; ++e) {
    CorpusEntry entry;
    entry.index = e;
    entry.scenario = config.scenarios[e % config.scenarios.size()];
    entry.seed = derive_seed(config.seed, {e});
    SplitMix64 load_rng(derive_seed(config.seed, {e, 1}));
    entry.load_scale = config.load_min + (config.load_max - config.load_min) * load_rng.uniform();
    entry.start = e * config.window_len;

    ScenarioConfig sc;
    sc.scenario = entry.scenario;
    sc.length = config.window_len;
    sc.attack_onset = config.onset;
    sc.baseline = config.baseline;
    sc.attack = config.attack_for(entry.scenario);
    sc.normal_load_packets = config.normal_load_packets;
    sc.syn_flood_packets = config.syn_flood_packets;
    sc.load_scale = entry.load_scale;
    sc.start_time = static_cast<double>(entry.start);
    sc.seed = entry.seed;
    auto g = generate(sc);
    entry.clip_events = g.clip_events;
    corpus.clip_events += g.clip_events;
    samples.insert(samples.end(), g.series.samples().begin(), g.series.samples().end());
    labels.insert(labels.end(), g.series.labels().begin(), g.series.labels().end());
    corpus.entries.push_back(entry);
  }
  corpus.series = MetricSeries(std::move(samples), std::move(labels));
  return corpus;
}

nlohmann::ordered_json config_to_json(const CorpusConfig& c) {
  nlohmann::ordered_json j;
  j["per_scenario_count"] = c.per_scenario_count;
  j["window_len"] = c.window_len;
  j["onset"] = c.onset;
  auto& sc = j["scenarios"] = nlohmann::ordered_json::array();
  for (auto s : c.scenarios) {
    sc.push_back(scenario_name(s));
  }
  j["load_min"] = c.load_min;
  j["load_max"] = c.load_max;
  j["normal_load_packets"] = c.normal_load_packets;
  j["syn_flood_packets"] = c.syn_flood_packets;
  j["seed"] = c.seed;
  j["baseline"] = profile_to_json(c.baseline);
  auto& attack = j["attack"] = nlohmann::ordered_json::object();
  for (auto s : kScenarios) {
    if (s != Scenario::Normal) {
      attack[std::string(scenario_name(s))] = attack_to_json(c.attack_for(s));
    }
  }
  return j;
}

CorpusConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("simulator config must be an object");
  }
  static const std::vector<std::string> kKnown{"per_scenario_count", "window_len", "onset", "scenarios",
                                               "load_min", "load_max", "normal_load_packets",
                                               "syn_flood_packets", "seed", "baseline", "attack"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw ConfigError("unknown simulator config key '" + key + "'");
    }
  }
  CorpusConfig c;
  c.per_scenario_count = count(j, "per_scenario_count", c.per_scenario_count);
  c.window_len = count(j, "window_len", c.window_len);
  c.onset = count(j, "onset", j.contains("window_len") ? (2 * c.window_len) / 5 : c.onset);
  c.load_min = number(j, "load_min", c.load_min);
  c.load_max = number(j, "load_max", c.load_max);
  c.normal_load_packets = number(j, "normal_load_packets", c.normal_load_packets);
  c.syn_flood_packets = number(j, "syn_flood_packets", c.syn_flood_packets);
  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      throw ConfigError("simulator config: 'seed' must be a non-negative integer");
    }
    c.seed = it->get<std::uint64_t>();
  }
  if (const auto it = j.find("scenarios"); it != j.end()) {
    if (!it->is_array()) {
      throw ConfigError("simulator config: 'scenarios' must be a list; valid options: " + valid_scenarios());
    }
    c.scenarios.clear();
    for (const auto& name : *it) {
      if (!name.is_string()) {
        throw ConfigError("simulator config: scenario names must be strings; valid options: " + valid_scenarios());
      }
      c.scenarios.push_back(parse_scenario(name.get<std::string>()));
    }
  }
  if (const auto it = j.find("baseline"); it != j.end()) {
    for (const auto& [name, entry] : it->items()) {
      auto& p = c.baseline[idx(config_metric(name))];
      p.mean = number(entry, "mean", p.mean);
      p.noise_std = number(entry, "std", entry.contains("mean") ? kNoiseFraction * p.mean : p.noise_std);
    }
  }
  if (const auto it = j.find("attack"); it != j.end()) {
    for (const auto& [sname, table] : it->items()) {
      const auto s = parse_scenario(sname);
      auto profile = c.attack_for(s);
      for (const auto& [mname, entry] : table.items()) {
        auto& d = profile[idx(config_metric(mname))];
        d.multiply = number(entry, "multiply", d.multiply);
        d.add = number(entry, "add", d.add);
      }
      if (profile != default_attack(s, c.normal_load_packets, c.syn_flood_packets)) {
        c.attack_overrides.emplace_back(s, profile);
      }
    }
  }
  validate(c);
  return c;
}

nlohmann::ordered_json manifest_json(const Corpus& corpus) {
  nlohmann::ordered_json j;
  j["format"] = "fids-corpus";
  j["version"] = kCorpusFormatVersion;
  j["series_file"] = kCorpusCsv;
  j["window_count"] = corpus.entries.size();
  j["clip_events_total"] = corpus.clip_events;
  j["config"] = config_to_json(corpus.config);
  auto& entries = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : corpus.entries) {
    entries.push_back({{"index", e.index},
                       {"scenario", scenario_name(e.scenario)},
                       {"class", static_cast<int>(scenario_class(e.scenario))},
                       {"seed", e.seed},
                       {"load_scale", e.load_scale},
                       {"start", e.start},
                       {"clip_events", e.clip_events}});
  }
  return j;
}

CorpusConfig config_from_manifest(const nlohmann::json& manifest) {
  if (!manifest.is_object() || manifest.value("format", "") != "fids-corpus") {
    throw ConfigError("not a corpus manifest");
  }
  if (manifest.value("version", 0) != kCorpusFormatVersion) {
    throw ConfigError("unsupported corpus manifest version");
  }
  const auto it = manifest.find("config");
  if (it == manifest.end()) {
    throw ConfigError("corpus manifest has no 'config' section");
  }
  return config_from_json(*it);
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
  save_series(corpus.series, dir / kCorpusCsv, SeriesFormat::Csv);
  std::ofstream out(dir / kManifestJson, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InputError("cannot write manifest in '" + dir.string() + "'");
  }
  out << manifest_json(corpus).dump(2) << '\n';
}

LoadedCorpus read_corpus(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestJson;
  if (!std::filesystem::exists(manifest_path)) {
    throw NotFoundError("corpus manifest not found: '" + manifest_path.string() + "'");
  }
  std::ifstream in(manifest_path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  LoadedCorpus out;
  try {
    out.manifest = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("corrupted corpus manifest '" + manifest_path.string() + "': " + e.what());
  }
  out.config = config_from_manifest(out.manifest);
  out.series = load_series(dir / out.manifest.value("series_file", std::string(kCorpusCsv)), SeriesFormat::Csv);
  return out;
}

} // namespace fids::sim
