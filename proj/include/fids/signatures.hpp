#pragma once

#include "fids/cusum.hpp"
#include "fids/metrics.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <deque>
#include <utility>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fids::signatures {

enum class AttackType : std::uint8_t { Http, Database, TcpSynFlood, DnsFlood };

inline constexpr std::array<AttackType, 4> kAttackTypes{AttackType::Http, AttackType::Database,
                                                        AttackType::TcpSynFlood, AttackType::DnsFlood};

/// Number of indicators per attack type: 4, 4, 5, 3.
std::size_t indicator_count(AttackType t) noexcept;
/// "http", "database", "syn_flood", "dns_flood".
std::string_view attack_name(AttackType t) noexcept;
/// The traffic class an attack type maps to (1..4).
TrafficClass attack_class(AttackType t) noexcept;

struct SignatureConfig {
  double theta = 2.0;                   ///< dominance ratio for "significantly larger"
  double syn_ack_imbalance_ratio = 3.0; ///< r_syn vs r_ack
  cusum::Config cusum{};
};

/// Throws ConfigError unless theta > 1, syn_ack_imbalance_ratio > 1 and the CUSUM config is valid.
void validate(const SignatureConfig& config);

/// Evidence for a change-based indicator.
struct ChangeEvidence {
  Metric metric;
  cusum::ChangeReport report;
  /// Series index of the first sample the CUSUM ran on; change_index counts from here.
  std::size_t segment_start = 0;
};

/// Evidence for a mean-ratio indicator: numerator >= threshold * max(denominator, 1e-9).
struct RatioEvidence {
  std::string numerator;
  std::string denominator;
  double numerator_mean = 0.0;
  double denominator_mean = 0.0;
  double ratio = 0.0;
  double threshold = 0.0;
};

struct Indicator {
  std::string name;
  bool present = false;
  std::variant<ChangeEvidence, RatioEvidence> evidence;
};

struct IndicatorVector {
  AttackType attack_type = AttackType::Http;
  std::vector<Indicator> indicators;
  /// Reported quantities that do not gate any indicator (e.g. the SYN+ACK share).
  std::vector<std::pair<std::string, double>> context;

  std::vector<std::uint8_t> states() const;
  double score() const noexcept;
};

struct AttackScoreVector {
  double http = 0.0;
  double database = 0.0;
  double syn_flood = 0.0;
  double dns_flood = 0.0;

  std::array<double, 4> as_array() const noexcept { return {http, database, syn_flood, dns_flood}; }
  double& operator[](AttackType t) noexcept;
  double operator[](AttackType t) const noexcept;

  friend bool operator==(const AttackScoreVector&, const AttackScoreVector&) = default;
};

/// Guarded denominator: values below 1e-9 are clamped to 1e-9.
inline constexpr double kRatioEpsilon = 1e-9;

/// Per-window memo of CUSUM results so the TSP change is computed once for HTTP and database.
/// With a reference window, each channel is tested on the reference samples followed by the
/// window's own, so a level held since before the window still registers as a change.
class ChangeCache {
public:
  ChangeCache(const Window& window, const SignatureConfig& config, const Window* reference = nullptr);
  const cusum::ChangeReport& get(Metric metric);
  std::size_t segment_start() const noexcept;

private:
  const Window& window_;
  const SignatureConfig& config_;
  const Window* reference_;
  std::deque<std::pair<Metric, cusum::ChangeReport>> cache_;
};

IndicatorVector eval_http(const Window& window, const SignatureConfig& config);
IndicatorVector eval_database(const Window& window, const SignatureConfig& config);
IndicatorVector eval_syn_flood(const Window& window, const SignatureConfig& config);
IndicatorVector eval_dns_flood(const Window& window, const SignatureConfig& config);

IndicatorVector eval_http(const Window& window, const SignatureConfig& config, ChangeCache& cache);
IndicatorVector eval_database(const Window& window, const SignatureConfig& config, ChangeCache& cache);
IndicatorVector eval_syn_flood(const Window& window, const SignatureConfig& config, ChangeCache& cache);
IndicatorVector eval_dns_flood(const Window& window, const SignatureConfig& config, ChangeCache& cache);

/// All four evaluators in attack-type order, sharing one ChangeCache.
std::array<IndicatorVector, 4> eval_all(const Window& window, const SignatureConfig& config,
                                        const Window* reference = nullptr);

/// Relative indicator sum per attack: popcount / P_t. Throws InputError unless the input holds
/// exactly one vector of the right length per attack type.
AttackScoreVector score(std::span<const IndicatorVector> vectors);

/// `{"attack", "states", "score", "evidence"}`.
nlohmann::ordered_json to_json(const IndicatorVector& v);
nlohmann::ordered_json to_json(const AttackScoreVector& s);

/// Seed for the CUSUM run on `metric` inside a window starting at `window_start`.
std::uint64_t channel_seed(std::uint64_t root, Metric metric, std::size_t window_start) noexcept;

} // namespace fids::signatures
