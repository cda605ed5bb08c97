#include "fids/cusum.hpp"

#include "fids/error.hpp"
#include "fids/kernels.hpp"
#include "fids/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fids::cusum {
namespace {

constexpr double kTieRelative = 1e-12;

// Fisher-Yates over a copy of `src`, written to lane `lane` of a 4-lane interleaved buffer.
void shuffle_into_lane(std::span<const double> src, std::vector<double>& scratch, SplitMix64& rng, double* interleaved,
                       int lane) {
  scratch.assign(src.begin(), src.end());
  for (std::size_t i = scratch.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i + 1));
    std::swap(scratch[i], scratch[j]);
  }
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    interleaved[4 * i + static_cast<std::size_t>(lane)] = scratch[i];
  }
}

void check_finite(std::span<const double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) {
      throw InputError("CUSUM input contains a non-finite value at index " + std::to_string(i));
    }
  }
}

std::vector<double> deviations_of(std::span<const double> y, double mean) {
  std::vector<double> d(y.size());
  kernels::active().deviations(y.data(), y.size(), mean, d.data());
  return d;
}

void segment(std::span<const double> y, std::size_t offset, const Config& config, std::vector<ChangeReport>& out) {
  if (y.size() < config.min_segment) {
    return;
  }
  Config local = config;
  local.seed = derive_seed(config.seed, {offset, offset + y.size()});
  auto report = detect_change(y, local);
  if (report.decision == Decision::NoChange) {
    return;
  }
  const std::size_t k = *report.change_index;
  segment(y.first(k), offset, config, out);
  report.change_index = offset + k;
  out.push_back(std::move(report));
  segment(y.subspan(k), offset + k, config, out);
}

} // namespace

std::string_view decision_name(Decision d) noexcept {
  switch (d) {
  case Decision::Decrease:
    return "decrease";
  case Decision::Increase:
    return "increase";
  case Decision::NoChange:
    return "none";
  }
  return "none";
}

void validate(const Config& config) {
  if (config.n_boot < 100) {
    throw ConfigError("n_boot must be >= 100 for percent resolution, got " + std::to_string(config.n_boot));
  }
  if (!(config.confidence_threshold_pct >= 0.0 && config.confidence_threshold_pct <= 100.0)) {
    throw ConfigError("confidence threshold must be in [0,100]");
  }
  if (config.min_segment < 4) {
    throw ConfigError("minimum segment length must be >= 4");
  }
}

double tie_tolerance(std::span<const double> deviations) noexcept {
  double total = 0.0;
  for (double v : deviations) {
    total += std::abs(v);
  }
  return kTieRelative * total;
}

CusumTrace cusum_trace(std::span<const double> y) {
  if (y.size() < 2) {
    throw InputError("CUSUM needs at least 2 values, got " + std::to_string(y.size()));
  }
  check_finite(y);
  CusumTrace t;
  t.mean = kernels::mean(y);
  const auto d = deviations_of(y, t.mean);
  t.s.resize(y.size() + 1);
  t.s[0] = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    t.s[i + 1] = t.s[i] + d[i];
    t.s_max = t.s[i + 1] > t.s_max ? t.s[i + 1] : t.s_max;
    t.s_min = t.s[i + 1] < t.s_min ? t.s[i + 1] : t.s_min;
  }
  t.s_diff = t.s_max - t.s_min;
  return t;
}

double bootstrap_confidence(std::span<const double> y, std::size_t n_boot, std::uint64_t seed) {
  if (n_boot < 100) {
    throw ConfigError("n_boot must be >= 100 for percent resolution, got " + std::to_string(n_boot));
  }
  if (y.size() < 4) {
    throw InputError("bootstrap needs at least 4 values, got " + std::to_string(y.size()));
  }
  check_finite(y);

  const auto& k = kernels::active();
  const double mean = kernels::mean(y);
  const auto d = deviations_of(y, mean);
  const double s_diff = k.prefix_range(d.data(), d.size());
  const double tie = tie_tolerance(d);

  std::vector<double> interleaved(4 * d.size());
  std::vector<double> scratch;
  std::size_t below = 0;
  for (std::size_t r0 = 0; r0 < n_boot; r0 += 4) {
    const std::size_t lanes = std::min<std::size_t>(4, n_boot - r0);
    for (std::size_t lane = 0; lane < 4; ++lane) {
      if (lane < lanes) {
        SplitMix64 rng(derive_seed(seed, {r0 + lane}));
        shuffle_into_lane(d, scratch, rng, interleaved.data(), static_cast<int>(lane));
      } else {
        for (std::size_t i = 0; i < d.size(); ++i) {
          interleaved[4 * i + lane] = 0.0;
        }
      }
    }
    double ranges[4];
    k.prefix_range_x4(interleaved.data(), d.size(), ranges);
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      if (ranges[lane] < s_diff - tie) {
        ++below;
      }
    }
  }
  return 100.0 * static_cast<double>(below) / static_cast<double>(n_boot);
}

ChangeReport detect_change(std::span<const double> y, const Config& config) {
  validate(config);
  ChangeReport report;
  report.trace = cusum_trace(y);
  report.bootstrap_count = config.n_boot;
  report.confidence_pct = bootstrap_confidence(y, config.n_boot, config.seed);
  if (report.confidence_pct < config.confidence_threshold_pct) {
    return report;
  }

  const auto& s = report.trace.s;
  const std::size_t n = y.size();
  std::size_t k = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    if (std::abs(s[i]) > std::abs(s[k])) {
      k = i;
    }
  }
  // |S_n| is zero up to rounding, so it only wins on a trace that is flat everywhere.
  k = std::min(k, n - 1);

  const double before = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
                        static_cast<double>(k);
  const double after = std::accumulate(y.begin() + static_cast<std::ptrdiff_t>(k), y.end(), 0.0) /
                       static_cast<double>(n - k);
  report.change_index = k;
  report.decision = after > before ? Decision::Increase : Decision::Decrease;
  return report;
}

std::vector<ChangeReport> detect_changes_multi(std::span<const double> y, const Config& config) {
  validate(config);
  std::vector<ChangeReport> out;
  segment(y, 0, config, out);
  return out;
}

nlohmann::ordered_json to_json(const ChangeReport& report, std::string_view metric) {
  nlohmann::ordered_json j;
  j["metric"] = metric;
  j["decision"] = decision_name(report.decision);
  j["k"] = report.change_index ? nlohmann::ordered_json(*report.change_index) : nlohmann::ordered_json(nullptr);
  j["confidence_pct"] = report.confidence_pct;
  j["s_diff"] = report.trace.s_diff;
  return j;
}

} // namespace fids::cusum
