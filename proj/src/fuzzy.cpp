#include "fids/fuzzy.hpp"

#include "fids/error.hpp"
#include "fids/rng.hpp"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace fids::fuzzy {
namespace {

constexpr double kRangeFloor = 1e-12;
constexpr const char* kFormatTag = "fids-anfis";

struct Forward {
  Input x{};                          // normalized input
  std::vector<double> mu;             // kInputs * M membership grades
  std::vector<double> w;              // raw firing strengths
  std::vector<double> f;              // rule outputs
  double total = 0.0;                 // sum of w
  double out = 0.0;
  bool degenerate = false;
  std::vector<double> weights;        // normalized
};

Forward forward(const FuzzyModel& model, const Input& raw) {
  Forward fw;
  fw.x = model.normalization().apply(raw);
  const std::size_t m = model.mf_per_input();
  const std::size_t rules = model.rule_count();
  fw.mu.resize(kInputs * m);
  for (std::size_t i = 0; i < kInputs; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      fw.mu[i * m + k] = model.membership(i, k)(fw.x[i]);
    }
  }
  fw.w.resize(rules);
  fw.f.resize(rules);
  fw.weights.resize(rules);
  for (std::size_t r = 0; r < rules; ++r) {
    double w = 1.0;
    for (std::size_t i = 0; i < kInputs; ++i) {
      w *= fw.mu[i * m + model.rule_digit(r, i)];
    }
    fw.w[r] = w;
    fw.total += w;
    const auto& c = model.consequent(r);
    double f = c[kInputs];
    for (std::size_t i = 0; i < kInputs; ++i) {
      f += c[i] * fw.x[i];
    }
    fw.f[r] = f;
  }
  fw.degenerate = !(fw.total > 0.0) || !std::isfinite(fw.total);
  for (std::size_t r = 0; r < rules; ++r) {
    fw.weights[r] = fw.degenerate ? 1.0 / static_cast<double>(rules) : fw.w[r] / fw.total;
    fw.out += fw.weights[r] * fw.f[r];
  }
  return fw;
}

// Least-squares design row: [wbar_r * x_1..x_4, wbar_r] for every rule.
void design_row(const Forward& fw, Eigen::MatrixXd& a, Eigen::Index n) {
  auto row = a.row(n);
  for (std::size_t r = 0; r < fw.weights.size(); ++r) {
    const auto base = static_cast<Eigen::Index>(r * kCoefficients);
    for (std::size_t i = 0; i < kInputs; ++i) {
      row(base + static_cast<Eigen::Index>(i)) = fw.weights[r] * fw.x[i];
    }
    row(base + static_cast<Eigen::Index>(kInputs)) = fw.weights[r];
  }
}

struct LsOutcome {
  std::size_t rank = 0;
  bool deficient = false;
};

LsOutcome solve_consequents(FuzzyModel& model, std::span<const LabeledScores> data) {
  const auto cols = static_cast<Eigen::Index>(model.rule_count() * kCoefficients);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(data.size()), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(data.size()));
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto fw = forward(model, data[n].x);
    design_row(fw, a, static_cast<Eigen::Index>(n));
    b(static_cast<Eigen::Index>(n)) = static_cast<double>(data[n].label);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd theta = cod.solve(b);
  for (std::size_t r = 0; r < model.rule_count(); ++r) {
    std::array<double, kCoefficients> c{};
    for (std::size_t k = 0; k < kCoefficients; ++k) {
      c[k] = theta(static_cast<Eigen::Index>(r * kCoefficients + k));
    }
    model.set_consequent(r, c);
  }
  LsOutcome out;
  out.rank = static_cast<std::size_t>(cod.rank());
  out.deficient = cod.rank() < cols;
  return out;
}

void accumulate_gradient(const FuzzyModel& model, const Forward& fw, double target, std::vector<double>& grad,
                         double scale) {
  if (fw.degenerate) {
    return;
  }
  const std::size_t m = model.mf_per_input();
  const double de_dout = 2.0 * (fw.out - target) * scale;
  for (std::size_t r = 0; r < model.rule_count(); ++r) {
    if (fw.w[r] == 0.0) {
      continue;
    }
    const double de_dw = de_dout * (fw.f[r] - fw.out) / fw.total;
    for (std::size_t i = 0; i < kInputs; ++i) {
      const std::size_t k = model.rule_digit(r, i);
      const auto& g = model.membership(i, k);
      const double dx = fw.x[i] - g.center;
      const double s2 = g.width * g.width;
      const std::size_t p = 2 * (i * m + k);
      grad[p] += de_dw * fw.w[r] * dx / s2;
      grad[p + 1] += de_dw * fw.w[r] * dx * dx / (s2 * g.width);
    }
  }
}

Normalization fit_normalization(std::span<const LabeledScores> data) {
  Normalization n;
  for (std::size_t i = 0; i < kInputs; ++i) {
    double lo = data.front().x[i];
    double hi = lo;
    for (const auto& d : data) {
      lo = std::min(lo, d.x[i]);
      hi = std::max(hi, d.x[i]);
    }
    // Scores live in [0,1]; widen to that box so unseen but valid inputs stay in range.
    n.lo[i] = std::min(lo, 0.0);
    n.hi[i] = std::max(hi, 1.0);
  }
  return n;
}

template <typename T>
T require(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ModelError(std::string("model file: missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model file: bad field '") + key + "': " + e.what());
  }
}

} // namespace

double Gaussian::operator()(double x) const noexcept {
  const double z = (x - center) / width;
  return std::exp(-0.5 * z * z);
}

Input Normalization::apply(const Input& x) const noexcept {
  Input out{};
  for (std::size_t i = 0; i < kInputs; ++i) {
    const double range = hi[i] - lo[i];
    out[i] = range > kRangeFloor ? (x[i] - lo[i]) / range : x[i] - lo[i];
  }
  return out;
}

TrafficClass decode_class(double raw_output) noexcept {
  if (!(raw_output > 0.0)) {
    return TrafficClass::Normal;
  }
  const double r = std::min(std::round(raw_output), static_cast<double>(kNumClasses - 1));
  return static_cast<TrafficClass>(static_cast<int>(r));
}

FuzzyModel::FuzzyModel(std::size_t mf_per_input) : m_(mf_per_input) {
  if (m_ < 1 || m_ > 8) {
    throw ConfigError("membership functions per input must be in 1..8, got " + std::to_string(m_));
  }
  mfs_.resize(kInputs * m_);
  for (std::size_t i = 0; i < kInputs; ++i) {
    for (std::size_t k = 0; k < m_; ++k) {
      mfs_[i * m_ + k] = Gaussian{(static_cast<double>(k) + 0.5) / static_cast<double>(m_),
                                  0.5 / static_cast<double>(m_)};
    }
  }
  std::size_t rules = 1;
  for (std::size_t i = 0; i < kInputs; ++i) {
    rules *= m_;
  }
  consequents_.assign(rules, std::array<double, kCoefficients>{});
}

void FuzzyModel::set_membership(std::size_t input, std::size_t mf, Gaussian g) {
  if (!(g.width > 0.0) || !std::isfinite(g.center)) {
    throw ConfigError("membership width must be > 0 and center finite");
  }
  mfs_.at(input * m_ + mf) = g;
}

std::vector<double> FuzzyModel::membership_parameters() const {
  std::vector<double> p;
  p.reserve(2 * mfs_.size());
  for (const auto& g : mfs_) {
    p.push_back(g.center);
    p.push_back(g.width);
  }
  return p;
}

void FuzzyModel::set_membership_parameters(std::span<const double> params) {
  if (params.size() != 2 * mfs_.size()) {
    throw ConfigError("expected " + std::to_string(2 * mfs_.size()) + " membership parameters");
  }
  for (std::size_t k = 0; k < mfs_.size(); ++k) {
    mfs_[k].center = params[2 * k];
    mfs_[k].width = std::max(params[2 * k + 1], kMinWidth);
  }
}

std::size_t FuzzyModel::rule_digit(std::size_t rule, std::size_t input) const noexcept {
  for (std::size_t i = kInputs - 1; i > input; --i) {
    rule /= m_;
  }
  return rule % m_;
}

Input to_input(const signatures::AttackScoreVector& s) noexcept { return s.as_array(); }

Verdict infer(const FuzzyModel& model, const Input& x) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw InputError("fuzzy inference input must be finite");
    }
  }
  auto fw = forward(model, x);
  Verdict v;
  v.raw_output = fw.out;
  v.predicted_class = decode_class(fw.out);
  v.attack_scores = {x[0], x[1], x[2], x[3]};
  v.firing_strengths = std::move(fw.weights);
  v.degenerate = fw.degenerate;
  return v;
}

Verdict infer(const FuzzyModel& model, const signatures::AttackScoreVector& x) { return infer(model, to_input(x)); }

double squared_error(const FuzzyModel& model, const Input& x, double target) {
  const double e = forward(model, x).out - target;
  return e * e;
}

std::vector<double> squared_error_gradient(const FuzzyModel& model, const Input& x, double target) {
  std::vector<double> grad(model.membership_parameters().size(), 0.0);
  accumulate_gradient(model, forward(model, x), target, grad, 1.0);
  return grad;
}

double rmse(const FuzzyModel& model, std::span<const LabeledScores> data) {
  if (data.empty()) {
    return 0.0;
  }
  double sse = 0.0;
  for (const auto& d : data) {
    sse += squared_error(model, d.x, static_cast<double>(d.label));
  }
  return std::sqrt(sse / static_cast<double>(data.size()));
}

double accuracy(const FuzzyModel& model, std::span<const LabeledScores> data) {
  if (data.empty()) {
    return 0.0;
  }
  std::size_t hits = 0;
  for (const auto& d : data) {
    hits += infer(model, d.x).predicted_class == d.label ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

void validate(const TrainConfig& c) {
  if (c.epochs < 1) {
    throw ConfigError("epochs must be >= 1");
  }
  if (!(c.learning_rate > 0.0)) {
    throw ConfigError("learning rate must be > 0");
  }
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0, 1)");
  }
  if (!(c.tolerance >= 0.0)) {
    throw ConfigError("tolerance must be >= 0");
  }
}

TrainResult train(std::span<const LabeledScores> dataset, const TrainConfig& config) {
  validate(config);
  if (dataset.empty()) {
    throw InputError("training dataset is empty");
  }
  for (const auto& d : dataset) {
    for (double v : d.x) {
      if (!std::isfinite(v)) {
        throw InputError("training input contains a non-finite value");
      }
    }
  }
  if (config.require_distinct_labels) {
    const auto first = dataset.front().label;
    const bool distinct = std::any_of(dataset.begin(), dataset.end(), [&](const auto& d) { return d.label != first; });
    if (!distinct) {
      throw InputError("training dataset holds a single class; at least two distinct labels are required");
    }
  }

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(derive_seed(config.seed, {0x7472616eULL}));
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[static_cast<std::size_t>(rng.bounded(i + 1))]);
  }
  const auto n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(dataset.size()))));
  std::vector<LabeledScores> train_set;
  std::vector<LabeledScores> val_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train_set : val_set).push_back(dataset[order[i]]);
  }
  // Too little data to hold anything out: validate on the training split.
  const auto& val = val_set.empty() ? train_set : val_set;

  TrainResult result{FuzzyModel(config.mf_per_input), {}, 0.0, 0.0, 0.0, train_set.size(), val_set.size()};
  FuzzyModel& model = result.model;
  model.set_normalization(fit_normalization(train_set));

  double prev_val = std::numeric_limits<double>::infinity();
  const double scale = 1.0 / static_cast<double>(train_set.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.rmse_before_ls = rmse(model, train_set);
    const auto ls = solve_consequents(model, train_set);
    rec.ls_rank = ls.rank;
    rec.rank_deficient = ls.deficient;
    rec.rmse_after_ls = rmse(model, train_set);

    auto params = model.membership_parameters();
    std::vector<double> grad(params.size(), 0.0);
    for (const auto& d : train_set) {
      accumulate_gradient(model, forward(model, d.x), static_cast<double>(d.label), grad, scale);
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      params[k] -= config.learning_rate * grad[k];
    }
    model.set_membership_parameters(params);

    rec.train_rmse = rmse(model, train_set);
    rec.validation_rmse = rmse(model, val);
    rec.validation_accuracy = accuracy(model, val);
    spdlog::debug("epoch {}: train rmse {:.6f} -> {:.6f}, validation rmse {:.6f}, accuracy {:.4f}", epoch,
                  rec.rmse_before_ls, rec.rmse_after_ls, rec.validation_rmse, rec.validation_accuracy);
    result.history.push_back(rec);
    if (std::abs(prev_val - rec.validation_rmse) < config.tolerance) {
      break;
    }
    prev_val = rec.validation_rmse;
  }
  solve_consequents(model, train_set);
  model.set_trained(true);
  result.train_rmse = rmse(model, train_set);
  result.validation_rmse = rmse(model, val);
  result.validation_accuracy = accuracy(model, val);
  return result;
}

nlohmann::ordered_json to_json(const FuzzyModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kFormatTag;
  j["version"] = kModelVersion;
  j["inputs"] = kInputs;
  j["mf_per_input"] = model.mf_per_input();
  j["trained"] = model.trained();
  auto& mfs = j["membership"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kInputs; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < model.mf_per_input(); ++k) {
      const auto& g = model.membership(i, k);
      row.push_back({{"center", g.center}, {"width", g.width}});
    }
    mfs.push_back(std::move(row));
  }
  auto& cons = j["consequents"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < model.rule_count(); ++r) {
    cons.push_back(model.consequent(r));
  }
  j["normalization"] = {{"min", model.normalization().lo}, {"max", model.normalization().hi}};
  return j;
}

FuzzyModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ModelError("model file: expected a JSON object");
  }
  if (require<std::string>(j, "format") != kFormatTag) {
    throw ModelError("model file: unknown format tag");
  }
  const auto version = require<int>(j, "version");
  if (version != kModelVersion) {
    throw VersionError("model file version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kModelVersion) + ")");
  }
  if (require<std::size_t>(j, "inputs") != kInputs) {
    throw ModelError("model file: expected 4 inputs");
  }
  const auto m = require<std::size_t>(j, "mf_per_input");
  FuzzyModel model(m);
  const auto mfs = require<std::vector<std::vector<nlohmann::json>>>(j, "membership");
  if (mfs.size() != kInputs) {
    throw ModelError("model file: membership table must have 4 rows");
  }
  for (std::size_t i = 0; i < kInputs; ++i) {
    if (mfs[i].size() != m) {
      throw ModelError("model file: membership row " + std::to_string(i) + " has wrong length");
    }
    for (std::size_t k = 0; k < m; ++k) {
      Gaussian g{require<double>(mfs[i][k], "center"), require<double>(mfs[i][k], "width")};
      model.set_membership(i, k, g);
    }
  }
  const auto cons = require<std::vector<std::array<double, kCoefficients>>>(j, "consequents");
  if (cons.size() != model.rule_count()) {
    throw ModelError("model file: expected " + std::to_string(model.rule_count()) + " consequent rows");
  }
  for (std::size_t r = 0; r < cons.size(); ++r) {
    model.set_consequent(r, cons[r]);
  }
  const auto norm = require<nlohmann::json>(j, "normalization");
  model.set_normalization({require<Input>(norm, "min"), require<Input>(norm, "max")});
  model.set_trained(require<bool>(j, "trained"));
  return model;
}

void save_model(const FuzzyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InputError("cannot write model file '" + path.string() + "'");
  }
  out << to_json(model).dump(2) << '\n';
}

FuzzyModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw NotFoundError("model file not found: '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("model file '" + path.string() + "' is corrupted or truncated: " + e.what());
  }
  return model_from_json(j);
}

nlohmann::ordered_json to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["class"] = static_cast<int>(v.predicted_class);
  j["label"] = class_name(v.predicted_class);
  j["raw_output"] = v.raw_output;
  j["scores"] = signatures::to_json(v.attack_scores);
  j["degenerate"] = v.degenerate;
  return j;
}

} // namespace fids::fuzzy
