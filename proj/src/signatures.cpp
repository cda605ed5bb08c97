#include "fids/signatures.hpp"

#include "fids/error.hpp"
#include "fids/kernels.hpp"
#include "fids/rng.hpp"

#include <algorithm>
#include <string>

namespace fids::signatures {
namespace {

double window_mean(const Window& w, Metric m) { return kernels::mean(extract_channel(w, m)); }

Indicator ratio_indicator(std::string name, const Window& w, Metric numerator, std::span<const Metric> denominators,
                          double threshold) {
  RatioEvidence ev;
  ev.numerator = std::string(metric_name(numerator));
  ev.numerator_mean = window_mean(w, numerator);
  ev.denominator_mean = 0.0;
  for (std::size_t i = 0; i < denominators.size(); ++i) {
    ev.denominator += (i ? "|" : "") + std::string(metric_name(denominators[i]));
    ev.denominator_mean = std::max(ev.denominator_mean, window_mean(w, denominators[i]));
  }
  ev.ratio = ev.numerator_mean / std::max(ev.denominator_mean, kRatioEpsilon);
  ev.threshold = threshold;
  Indicator ind;
  ind.name = std::move(name);
  ind.present = ev.ratio >= threshold;
  ind.evidence = std::move(ev);
  return ind;
}

Indicator ratio_indicator(std::string name, const Window& w, Metric numerator, Metric denominator, double threshold) {
  const Metric d[] = {denominator};
  return ratio_indicator(std::move(name), w, numerator, d, threshold);
}

Indicator change_indicator(std::string name, ChangeCache& cache, Metric metric, cusum::Decision wanted) {
  Indicator ind;
  ind.name = std::move(name);
  const auto& report = cache.get(metric);
  ind.present = report.decision == wanted;
  ind.evidence = ChangeEvidence{metric, report, cache.segment_start()};
  return ind;
}

} // namespace

std::size_t indicator_count(AttackType t) noexcept {
  switch (t) {
  case AttackType::Http:
  case AttackType::Database:
    return 4;
  case AttackType::TcpSynFlood:
    return 5;
  case AttackType::DnsFlood:
    return 3;
  }
  return 0;
}

std::string_view attack_name(AttackType t) noexcept {
  switch (t) {
  case AttackType::Http:
    return "http";
  case AttackType::Database:
    return "database";
  case AttackType::TcpSynFlood:
    return "syn_flood";
  case AttackType::DnsFlood:
    return "dns_flood";
  }
  return "unknown";
}

TrafficClass attack_class(AttackType t) noexcept { return static_cast<TrafficClass>(static_cast<int>(t) + 1); }

void validate(const SignatureConfig& config) {
  if (!(config.theta > 1.0)) {
    throw ConfigError("dominance ratio theta must be > 1");
  }
  if (!(config.syn_ack_imbalance_ratio > 1.0)) {
    throw ConfigError("SYN/ACK imbalance ratio must be > 1");
  }
  cusum::validate(config.cusum);
}

std::vector<std::uint8_t> IndicatorVector::states() const {
  std::vector<std::uint8_t> s;
  s.reserve(indicators.size());
  for (const auto& i : indicators) {
    s.push_back(i.present ? 1 : 0);
  }
  return s;
}

double IndicatorVector::score() const noexcept {
  const auto present = std::count_if(indicators.begin(), indicators.end(), [](const auto& i) { return i.present; });
  return static_cast<double>(present) / static_cast<double>(indicator_count(attack_type));
}

double& AttackScoreVector::operator[](AttackType t) noexcept {
  switch (t) {
  case AttackType::Http:
    return http;
  case AttackType::Database:
    return database;
  case AttackType::TcpSynFlood:
    return syn_flood;
  case AttackType::DnsFlood:
    return dns_flood;
  }
  return http;
}

double AttackScoreVector::operator[](AttackType t) const noexcept {
  return const_cast<AttackScoreVector&>(*this)[t];
}

std::uint64_t channel_seed(std::uint64_t root, Metric metric, std::size_t window_start) noexcept {
  return derive_seed(root, {static_cast<std::uint64_t>(metric), window_start});
}

ChangeCache::ChangeCache(const Window& window, const SignatureConfig& config, const Window* reference)
    : window_(window), config_(config), reference_(reference) {}

std::size_t ChangeCache::segment_start() const noexcept {
  return reference_ ? reference_->start() : window_.start();
}

const cusum::ChangeReport& ChangeCache::get(Metric metric) {
  for (const auto& [m, r] : cache_) {
    if (m == metric) {
      return r;
    }
  }
  auto cfg = config_.cusum;
  cfg.seed = channel_seed(cfg.seed, metric, window_.start());
  auto y = extract_channel(window_, metric);
  if (reference_) {
    auto ref = extract_channel(*reference_, metric);
    y.insert(y.begin(), ref.begin(), ref.end());
  }
  cache_.emplace_back(metric, cusum::detect_change(y, cfg));
  return cache_.back().second;
}

IndicatorVector eval_http(const Window& w, const SignatureConfig& c, ChangeCache& cache) {
  IndicatorVector v;
  v.attack_type = AttackType::Http;
  v.indicators.push_back(change_indicator("tsp_drop", cache, Metric::AvgRequestTime, cusum::Decision::Decrease));
  v.indicators.push_back(ratio_indicator("iow_i_over_iod_i", w, Metric::IowI, Metric::IodI, c.theta));
  v.indicators.push_back(ratio_indicator("iow_o_over_iod_o", w, Metric::IowO, Metric::IodO, c.theta));
  v.indicators.push_back(ratio_indicator("cpu_w_over_cpu_d", w, Metric::CpuW, Metric::CpuD, c.theta));
  return v;
}

IndicatorVector eval_database(const Window& w, const SignatureConfig& c, ChangeCache& cache) {
  IndicatorVector v;
  v.attack_type = AttackType::Database;
  v.indicators.push_back(change_indicator("tsp_rise", cache, Metric::AvgRequestTime, cusum::Decision::Increase));
  v.indicators.push_back(ratio_indicator("iod_i_over_iow_i", w, Metric::IodI, Metric::IowI, c.theta));
  v.indicators.push_back(ratio_indicator("iod_o_over_iow_o", w, Metric::IodO, Metric::IowO, c.theta));
  v.indicators.push_back(ratio_indicator("cpu_d_over_cpu_w", w, Metric::CpuD, Metric::CpuW, c.theta));
  return v;
}

IndicatorVector eval_syn_flood(const Window& w, const SignatureConfig& c, ChangeCache& cache) {
  IndicatorVector v;
  v.attack_type = AttackType::TcpSynFlood;
  v.indicators.push_back(change_indicator("mem_w_rise", cache, Metric::MemW, cusum::Decision::Increase));
  v.indicators.push_back(ratio_indicator("r_syn_over_r_ack", w, Metric::RSyn, Metric::RAck, c.syn_ack_imbalance_ratio));
  v.indicators.push_back(change_indicator("np_i_rise", cache, Metric::NpI, cusum::Decision::Increase));
  v.indicators.push_back(change_indicator("np_o_rise", cache, Metric::NpO, cusum::Decision::Increase));
  v.indicators.push_back(change_indicator("nhop_rise", cache, Metric::Nhop, cusum::Decision::Increase));
  v.context.emplace_back("r_synack_mean", window_mean(w, Metric::RSynAck));
  return v;
}

IndicatorVector eval_dns_flood(const Window& w, const SignatureConfig& c, ChangeCache&) {
  IndicatorVector v;
  v.attack_type = AttackType::DnsFlood;
  const Metric in[] = {Metric::IodI, Metric::IowI};
  const Metric out[] = {Metric::IodO, Metric::IowO};
  const Metric cpu[] = {Metric::CpuW, Metric::CpuD};
  v.indicators.push_back(ratio_indicator("ion_i_over_iod_i_iow_i", w, Metric::IonI, in, c.theta));
  v.indicators.push_back(ratio_indicator("ion_o_over_iod_o_iow_o", w, Metric::IonO, out, c.theta));
  v.indicators.push_back(ratio_indicator("cpu_n_over_cpu_w_cpu_d", w, Metric::CpuN, cpu, c.theta));
  return v;
}

IndicatorVector eval_http(const Window& w, const SignatureConfig& c) {
  ChangeCache cache(w, c);
  return eval_http(w, c, cache);
}

IndicatorVector eval_database(const Window& w, const SignatureConfig& c) {
  ChangeCache cache(w, c);
  return eval_database(w, c, cache);
}

IndicatorVector eval_syn_flood(const Window& w, const SignatureConfig& c) {
  ChangeCache cache(w, c);
  return eval_syn_flood(w, c, cache);
}

IndicatorVector eval_dns_flood(const Window& w, const SignatureConfig& c) {
  ChangeCache cache(w, c);
  return eval_dns_flood(w, c, cache);
}

std::array<IndicatorVector, 4> eval_all(const Window& w, const SignatureConfig& c, const Window* reference) {
  validate(c);
  ChangeCache cache(w, c, reference);
  return {eval_http(w, c, cache), eval_database(w, c, cache), eval_syn_flood(w, c, cache),
          eval_dns_flood(w, c, cache)};
}

AttackScoreVector score(std::span<const IndicatorVector> vectors) {
  if (vectors.size() != kAttackTypes.size()) {
    throw InputError("score needs one indicator vector per attack type, got " + std::to_string(vectors.size()));
  }
  AttackScoreVector s;
  std::array<bool, 4> seen{};
  for (const auto& v : vectors) {
    const auto idx = static_cast<std::size_t>(v.attack_type);
    if (seen[idx]) {
      throw InputError("duplicate indicator vector for attack '" + std::string(attack_name(v.attack_type)) + "'");
    }
    if (v.indicators.size() != indicator_count(v.attack_type)) {
      throw InputError("attack '" + std::string(attack_name(v.attack_type)) + "' expects " +
                       std::to_string(indicator_count(v.attack_type)) + " indicators");
    }
    seen[idx] = true;
    s[v.attack_type] = v.score();
  }
  return s;
}

nlohmann::ordered_json to_json(const IndicatorVector& v) {
  nlohmann::ordered_json j;
  j["attack"] = attack_name(v.attack_type);
  j["states"] = v.states();
  j["score"] = v.score();
  nlohmann::ordered_json evidence = nlohmann::ordered_json::object();
  for (const auto& ind : v.indicators) {
    if (const auto* ch = std::get_if<ChangeEvidence>(&ind.evidence)) {
      evidence[ind.name] = cusum::to_json(ch->report, metric_name(ch->metric));
    } else {
      const auto& r = std::get<RatioEvidence>(ind.evidence);
      nlohmann::ordered_json e;
      e["numerator"] = r.numerator;
      e["denominator"] = r.denominator;
      e["numerator_mean"] = r.numerator_mean;
      e["denominator_mean"] = r.denominator_mean;
      e["ratio"] = r.ratio;
      e["threshold"] = r.threshold;
      evidence[ind.name] = std::move(e);
    }
  }
  for (const auto& [name, value] : v.context) {
    evidence["context"][name] = value;
  }
  j["evidence"] = std::move(evidence);
  return j;
}

nlohmann::ordered_json to_json(const AttackScoreVector& s) {
  nlohmann::ordered_json j;
  j["http"] = s.http;
  j["database"] = s.database;
  j["syn_flood"] = s.syn_flood;
  j["dns_flood"] = s.dns_flood;
  return j;
}

} // namespace fids::signatures
