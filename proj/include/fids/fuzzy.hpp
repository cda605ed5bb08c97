#pragma once

#include "fids/metrics.hpp"
#include "fids/signatures.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fids::fuzzy {

inline constexpr std::size_t kInputs = 4;
inline constexpr std::size_t kCoefficients = kInputs + 1;
inline constexpr double kMinWidth = 1e-3;
inline constexpr int kModelVersion = 1;

using Input = std::array<double, kInputs>;

struct Gaussian {
  double center = 0.5;
  double width = 0.5;

  double operator()(double x) const noexcept;
  friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

/// Per-input affine map applied before the memberships: (x - lo) / (hi - lo).
struct Normalization {
  Input lo{0.0, 0.0, 0.0, 0.0};
  Input hi{1.0, 1.0, 1.0, 1.0};

  Input apply(const Input& x) const noexcept;
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct Verdict {
  double raw_output = 0.0;
  TrafficClass predicted_class = TrafficClass::Normal;
  signatures::AttackScoreVector attack_scores;
  std::vector<double> firing_strengths; ///< normalized, one per rule
  bool degenerate = false;              ///< every rule underflowed; uniform weights were used
};

/// clamp(round(raw), 0, 4). Total over the reals, NaN maps to Normal.
TrafficClass decode_class(double raw_output) noexcept;

/// First-order Sugeno system over the four attack scores with a grid-partitioned rule base:
/// M Gaussian memberships per input and M^4 rules, each with a linear consequent
/// f_r(x) = a_r . x + b_r. Rule r uses membership digit_i(r) on input i, where the digits
/// are r written in base M with input 0 most significant.
class FuzzyModel {
public:
  /// Centers at (k + 0.5) / M, widths 0.5 / M, zero consequents. For M = 2: {0.25, 0.75}, 0.25.
  explicit FuzzyModel(std::size_t mf_per_input = 2);

  std::size_t mf_per_input() const noexcept { return m_; }
  std::size_t rule_count() const noexcept { return consequents_.size(); }

  const Gaussian& membership(std::size_t input, std::size_t mf) const { return mfs_.at(input * m_ + mf); }
  void set_membership(std::size_t input, std::size_t mf, Gaussian g);

  const std::array<double, kCoefficients>& consequent(std::size_t rule) const { return consequents_.at(rule); }
  void set_consequent(std::size_t rule, const std::array<double, kCoefficients>& c) { consequents_.at(rule) = c; }

  const Normalization& normalization() const noexcept { return norm_; }
  void set_normalization(const Normalization& n) noexcept { norm_ = n; }

  bool trained() const noexcept { return trained_; }
  void set_trained(bool t) noexcept { trained_ = t; }

  /// Membership parameters flattened as [c(0,0), w(0,0), c(0,1), w(0,1), ..., c(3,M-1), w(3,M-1)].
  std::vector<double> membership_parameters() const;
  /// Inverse of membership_parameters(). Widths are floored at kMinWidth.
  void set_membership_parameters(std::span<const double> params);

  std::size_t rule_digit(std::size_t rule, std::size_t input) const noexcept;

  friend bool operator==(const FuzzyModel&, const FuzzyModel&) = default;

private:
  std::size_t m_;
  std::vector<Gaussian> mfs_;
  std::vector<std::array<double, kCoefficients>> consequents_;
  Normalization norm_;
  bool trained_ = false;
};

Verdict infer(const FuzzyModel& model, const signatures::AttackScoreVector& x);
/// Raw forward pass on an already-built input.
Verdict infer(const FuzzyModel& model, const Input& x);

/// (raw_output(x) - target)^2.
double squared_error(const FuzzyModel& model, const Input& x, double target);
/// Gradient of squared_error with respect to membership_parameters().
std::vector<double> squared_error_gradient(const FuzzyModel& model, const Input& x, double target);

struct LabeledScores {
  Input x{};
  TrafficClass label = TrafficClass::Normal;
};

Input to_input(const signatures::AttackScoreVector& s) noexcept;

struct TrainConfig {
  std::size_t epochs = 60;
  double learning_rate = 0.05;
  std::uint64_t seed = 42;
  double train_fraction = 0.8; ///< the rest is held out for validation
  double tolerance = 1e-7;     ///< stop when validation RMSE changes by less than this
  std::size_t mf_per_input = 2;
  bool require_distinct_labels = true;
};

/// Throws ConfigError on epochs < 1, learning_rate <= 0, or a split outside (0, 1).
void validate(const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double rmse_before_ls = 0.0; ///< training RMSE entering the least-squares step
  double rmse_after_ls = 0.0;  ///< ... after it (never larger)
  double train_rmse = 0.0;     ///< after the membership gradient step
  double validation_rmse = 0.0;
  double validation_accuracy = 0.0;
  std::size_t ls_rank = 0;
  bool rank_deficient = false; ///< solved with the minimum-norm solution
};

struct TrainResult {
  FuzzyModel model;
  std::vector<EpochRecord> history;
  double train_rmse = 0.0;
  double validation_rmse = 0.0;
  double validation_accuracy = 0.0;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
};

/// Hybrid learning: every epoch solves the consequents by least squares with memberships
/// fixed, then takes one gradient step on the membership parameters. A final least-squares
/// pass aligns the consequents with the last memberships.
TrainResult train(std::span<const LabeledScores> dataset, const TrainConfig& config = {});

double accuracy(const FuzzyModel& model, std::span<const LabeledScores> data);
double rmse(const FuzzyModel& model, std::span<const LabeledScores> data);

nlohmann::ordered_json to_json(const FuzzyModel& model);
/// Throws VersionError on an unknown version tag and ModelError on a malformed document.
FuzzyModel model_from_json(const nlohmann::json& j);

void save_model(const FuzzyModel& model, const std::filesystem::path& path);
/// Throws NotFoundError when the file does not exist.
FuzzyModel load_model(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const Verdict& v);

} // namespace fids::fuzzy
