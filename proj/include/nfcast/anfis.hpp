#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfcast/error.hpp"
#include "nfcast/membership.hpp"
#include "nfcast/metrics.hpp"
#include "nfcast/types.hpp"

namespace nfcast::anfis {

struct AnfisConfig {
  std::size_t n_inputs = 1;
  std::size_t mfs_per_input = 2;
  MfKind mf_kind = MfKind::GBell;
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  std::size_t rule_cap = 1024;
  // Range the premise grid is initialized over; inputs are expected to be
  // scaled into it.
  double domain_min = 0.0;
  double domain_max = 1.0;

  /// mfs_per_input ^ n_inputs; throws when it exceeds rule_cap.
  std::size_t rule_count() const {
    std::size_t count = 1;
    bool overflow = false;
    for (std::size_t k = 0; k < n_inputs && !overflow; ++k) overflow = __builtin_mul_overflow(count, mfs_per_input, &count);
    if (overflow || count > rule_cap) {
      const std::string size = std::to_string(mfs_per_input) + "^" + std::to_string(n_inputs) +
                               (overflow ? "" : " = " + std::to_string(count));
      throw InvalidArgument("rule base of " + size + " rules exceeds the cap of " + std::to_string(rule_cap));
    }
    return count;
  }

  void validate() const {
    if (n_inputs < 1) throw InvalidArgument("anfis needs at least one input");
    if (mfs_per_input < 1) throw InvalidArgument("anfis needs at least one membership function per input");
    if (epochs < 1) throw InvalidArgument("anfis epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidArgument("anfis learning rate must be positive");
    }
    if (!(domain_max > domain_min)) throw InvalidArgument("anfis domain_max must exceed domain_min");
    (void)rule_count();
  }
};

/// Antecedent of one rule: the membership function index chosen for each input.
using Rule = std::vector<std::size_t>;

/// Full grid partition, lexicographic with the last input varying fastest.
inline std::vector<Rule> build_rule_base(const AnfisConfig& config) {
  config.validate();
  const std::size_t count = config.rule_count();
  std::vector<Rule> rules;
  rules.reserve(count);
  Rule current(config.n_inputs, 0);
  for (std::size_t r = 0; r < count; ++r) {
    rules.push_back(current);
    for (std::size_t k = config.n_inputs; k-- > 0;) {
      if (++current[k] < config.mfs_per_input) break;
      current[k] = 0;
    }
  }
  return rules;
}

/// Intermediate values of one forward pass, layer by layer.
struct ForwardTrace {
  std::vector<std::vector<double>> memberships;  // [input][mf], layer 1
  std::vector<double> firing;                    // omega per rule, layer 2
  std::vector<double> normalized;                // omega / sum(omega), layer 3
  std::vector<double> rule_outputs;              // f_i = p . x + r
  double output = 0.0;                           // sum(normalized * rule_outputs)
  bool fallback = false;                         // every rule had zero firing strength
};

/// First-order Sugeno ANFIS with a grid rule base and product t-norm.
///
/// Consequents are stored as a rule_count x (n_inputs + 1) matrix: linear
/// coefficients followed by the constant term. Premise parameters flatten in
/// (input, membership function, parameter) order; see premise_params().
class AnfisModel {
 public:
  /// Grid-initialized premises, zero consequents.
  explicit AnfisModel(AnfisConfig config) : config_(std::move(config)) {
    config_.validate();
    rules_ = build_rule_base(config_);
    premise_.reserve(config_.n_inputs);
    for (std::size_t k = 0; k < config_.n_inputs; ++k) premise_.push_back(initial_set());
    consequents_ = Matrix::Zero(static_cast<Eigen::Index>(rules_.size()),
                                static_cast<Eigen::Index>(config_.n_inputs + 1));
  }

  AnfisModel(AnfisConfig config, std::vector<std::vector<MembershipFunction>> premise, Matrix consequents)
      : AnfisModel(std::move(config)) {
    if (premise.size() != config_.n_inputs) throw InvalidArgument("premise needs one set per input");
    for (const auto& set : premise) {
      if (set.size() != config_.mfs_per_input) {
        throw InvalidArgument("premise set size must equal mfs_per_input");
      }
      for (const auto& mf : set) {
        if (mf.kind() != config_.mf_kind) throw InvalidArgument("premise kind does not match config");
      }
    }
    premise_ = std::move(premise);
    set_consequents(std::move(consequents));
  }

  const AnfisConfig& config() const { return config_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<std::vector<MembershipFunction>>& premise() const { return premise_; }
  const Matrix& consequents() const { return consequents_; }
  std::size_t rule_count() const { return rules_.size(); }

  void set_consequents(Matrix consequents) {
    if (consequents.rows() != consequents_.rows() || consequents.cols() != consequents_.cols()) {
      throw InvalidArgument("consequent matrix must be " + std::to_string(consequents_.rows()) + " x " +
                            std::to_string(consequents_.cols()));
    }
    if (!consequents.allFinite()) throw InvalidArgument("consequents must be finite");
    consequents_ = std::move(consequents);
  }

  std::size_t premise_param_count() const {
    return config_.n_inputs * config_.mfs_per_input * param_count(config_.mf_kind);
  }

  Vector premise_params() const {
    Vector out(static_cast<Eigen::Index>(premise_param_count()));
    Eigen::Index i = 0;
    for (const auto& set : premise_) {
      for (const auto& mf : set) {
        for (double p : mf.params()) out[i++] = p;
      }
    }
    return out;
  }

  /// Replaces every premise parameter. Values that break a function's
  /// constraints are repaired (GBell clamp, piecewise-linear sort).
  void set_premise_params(const Vector& params) {
    if (static_cast<std::size_t>(params.size()) != premise_param_count()) {
      throw InvalidArgument("premise parameter vector has wrong length");
    }
    const std::size_t np = param_count(config_.mf_kind);
    std::size_t i = 0;
    for (auto& set : premise_) {
      for (auto& mf : set) {
        mf = MembershipFunction::repaired(config_.mf_kind,
                                          std::span<const double>(params.data() + i, np));
        i += np;
      }
    }
  }

  double forward(std::span<const double> x) const { return run(x, nullptr); }

  ForwardTrace trace(std::span<const double> x) const {
    ForwardTrace t;
    run(x, &t);
    return t;
  }

 private:
  friend Vector grad_premise(const AnfisModel&, const Matrix&, const Vector&);
  friend Matrix lse_design_matrix(const AnfisModel&, const Matrix&);

  std::vector<MembershipFunction> initial_set() const {
    if (config_.mfs_per_input >= 2) {
      return init_grid(config_.mf_kind, config_.domain_min, config_.domain_max, config_.mfs_per_input);
    }
    const double span = config_.domain_max - config_.domain_min;
    const double mid = config_.domain_min + 0.5 * span;
    switch (config_.mf_kind) {
      case MfKind::Triangular:
        return {MembershipFunction::triangular(mid - span, mid, mid + span)};
      case MfKind::Trapezoidal:
        return {MembershipFunction::trapezoidal(mid - span, config_.domain_min, config_.domain_max,
                                                mid + span)};
      case MfKind::GBell:
        return {MembershipFunction::gbell(span, 2.0, mid)};
    }
    return {};
  }

  void check_input(std::span<const double> x) const {
    if (x.size() != config_.n_inputs) {
      throw InvalidArgument("anfis expects " + std::to_string(config_.n_inputs) + " inputs, got " +
                            std::to_string(x.size()));
    }
  }

  // Layer 1 for all inputs, into a flat [input * mfs + mf] buffer.
  void memberships(std::span<const double> x, std::vector<double>& mu) const {
    const std::size_t m = config_.mfs_per_input;
    mu.resize(config_.n_inputs * m);
    for (std::size_t k = 0; k < config_.n_inputs; ++k) {
      for (std::size_t j = 0; j < m; ++j) mu[k * m + j] = premise_[k][j].eval(x[k]);
    }
  }

  // Layers 2-3. Returns false when all firing strengths vanish, in which
  // case `normalized` holds uniform weights.
  bool strengths(const std::vector<double>& mu, std::vector<double>& firing,
                 std::vector<double>& normalized) const {
    const std::size_t m = config_.mfs_per_input;
    const std::size_t count = rules_.size();
    firing.resize(count);
    normalized.resize(count);
    double total = 0.0;
    for (std::size_t r = 0; r < count; ++r) {
      double w = 1.0;
      for (std::size_t k = 0; k < config_.n_inputs; ++k) w *= mu[k * m + rules_[r][k]];
      firing[r] = w;
      total += w;
    }
    if (total > 0.0) {
      for (std::size_t r = 0; r < count; ++r) normalized[r] = firing[r] / total;
      return true;
    }
    std::fill(normalized.begin(), normalized.end(), 1.0 / static_cast<double>(count));
    return false;
  }

  double rule_output(std::size_t r, std::span<const double> x) const {
    const auto row = consequents_.row(static_cast<Eigen::Index>(r));
    double f = row[static_cast<Eigen::Index>(config_.n_inputs)];
    for (std::size_t k = 0; k < config_.n_inputs; ++k) f += row[static_cast<Eigen::Index>(k)] * x[k];
    return f;
  }

  double run(std::span<const double> x, ForwardTrace* trace) const {
    check_input(x);
    std::vector<double> mu, firing, normalized;
    memberships(x, mu);
    const bool fired = strengths(mu, firing, normalized);
    std::vector<double> outputs(rules_.size());
    double out = 0.0;
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      outputs[r] = rule_output(r, x);
      out += normalized[r] * outputs[r];
    }
    if (trace != nullptr) {
      const std::size_t m = config_.mfs_per_input;
      trace->memberships.assign(config_.n_inputs, {});
      for (std::size_t k = 0; k < config_.n_inputs; ++k) {
        trace->memberships[k].assign(mu.begin() + static_cast<std::ptrdiff_t>(k * m),
                                     mu.begin() + static_cast<std::ptrdiff_t>((k + 1) * m));
      }
      trace->firing = std::move(firing);
      trace->normalized = std::move(normalized);
      trace->rule_outputs = std::move(outputs);
      trace->output = out;
      trace->fallback = !fired;
    }
    return out;
  }

  AnfisConfig config_;
  std::vector<Rule> rules_;
  std::vector<std::vector<MembershipFunction>> premise_;
  Matrix consequents_;
};

namespace detail {

inline void check_dataset(const AnfisModel& model, const Matrix& X, const Vector* Y) {
  if (X.rows() < 1) throw InvalidArgument("anfis dataset is empty");
  if (static_cast<std::size_t>(X.cols()) != model.config().n_inputs) {
    throw InvalidArgument("anfis dataset has " + std::to_string(X.cols()) + " columns, model expects " +
                          std::to_string(model.config().n_inputs));
  }
  if (!X.allFinite()) throw InvalidArgument("anfis inputs must be finite");
  if (Y != nullptr) {
    if (Y->size() != X.rows()) throw InvalidArgument("anfis inputs and targets differ in length");
    if (!Y->allFinite()) throw InvalidArgument("anfis targets must be finite");
  }
}

}  // namespace detail

/// Linear system behind the consequent fit: for each sample, the row
/// concatenates (wbar_i * x_1, ..., wbar_i * x_n, wbar_i) over rules i, so
/// that row . vec(consequents) is the model output.
inline Matrix lse_design_matrix(const AnfisModel& model, const Matrix& X) {
  detail::check_dataset(model, X, nullptr);
  const std::size_t n = model.config().n_inputs;
  const std::size_t count = model.rule_count();
  Matrix A(X.rows(), static_cast<Eigen::Index>(count * (n + 1)));
  std::vector<double> mu, firing, normalized;
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    const auto x = row_span(X, s);
    model.memberships(x, mu);
    model.strengths(mu, firing, normalized);
    Eigen::Index c = 0;
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t k = 0; k < n; ++k) A(s, c++) = normalized[r] * x[k];
      A(s, c++) = normalized[r];
    }
  }
  return A;
}

/// Consequents minimizing the training SSE with the premises held fixed.
/// Rank-deficient systems get the minimum-norm solution.
inline Matrix fit_consequents_lse(const AnfisModel& model, const Matrix& X, const Vector& Y) {
  detail::check_dataset(model, X, &Y);
  const Eigen::MatrixXd A = lse_design_matrix(model, X);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  const Vector theta = cod.solve(Y);
  Matrix out(static_cast<Eigen::Index>(model.rule_count()),
             static_cast<Eigen::Index>(model.config().n_inputs + 1));
  std::copy(theta.data(), theta.data() + theta.size(), out.data());
  return out;
}

/// Gradient of SSE = sum_s (f(x_s) - y_s)^2 over the premise parameters, in
/// AnfisModel::premise_params() order. Samples on which every rule is dead
/// contribute nothing.
inline Vector grad_premise(const AnfisModel& model, const Matrix& X, const Vector& Y) {
  detail::check_dataset(model, X, &Y);
  const auto& cfg = model.config();
  const std::size_t n = cfg.n_inputs;
  const std::size_t m = cfg.mfs_per_input;
  const std::size_t np = param_count(cfg.mf_kind);
  const std::size_t count = model.rule_count();

  Vector grad = Vector::Zero(static_cast<Eigen::Index>(model.premise_param_count()));
  std::vector<double> mu, firing, normalized, outputs(count), dmu(n * m), prefix(n + 1);
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    const auto x = row_span(X, s);
    model.memberships(x, mu);
    if (!model.strengths(mu, firing, normalized)) continue;
    double total = 0.0;
    for (double w : firing) total += w;
    double f = 0.0;
    for (std::size_t r = 0; r < count; ++r) {
      outputs[r] = model.rule_output(r, x);
      f += normalized[r] * outputs[r];
    }
    const double scale = 2.0 * (f - Y[s]);
    if (scale == 0.0) continue;

    // d f / d mu[k][j] = sum over rules using (k, j) of
    //   (f_r - f) / total * prod_{k' != k} mu[k'][rule_r(k')]
    std::fill(dmu.begin(), dmu.end(), 0.0);
    for (std::size_t r = 0; r < count; ++r) {
      const auto& rule = model.rules()[r];
      const double df_dw = (outputs[r] - f) / total;
      prefix[0] = 1.0;
      for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * mu[k * m + rule[k]];
      double suffix = 1.0;
      for (std::size_t k = n; k-- > 0;) {
        dmu[k * m + rule[k]] += df_dw * prefix[k] * suffix;
        suffix *= mu[k * m + rule[k]];
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < m; ++j) {
        const double d = scale * dmu[k * m + j];
        if (d == 0.0) continue;
        const auto g = model.premise()[k][j].grad_params(x[k]);
        const auto base = static_cast<Eigen::Index>((k * m + j) * np);
        for (std::size_t p = 0; p < np; ++p) grad[base + static_cast<Eigen::Index>(p)] += d * g[p];
      }
    }
  }
  return grad;
}

/// Elementwise forward over the rows of X. When `fallback_count` is given it
/// receives the number of rows on which every rule had zero firing strength.
inline Vector predict_batch(const AnfisModel& model, const Matrix& X, std::size_t* fallback_count = nullptr) {
  if (static_cast<std::size_t>(X.cols()) != model.config().n_inputs) {
    throw InvalidArgument("anfis batch has " + std::to_string(X.cols()) + " columns, model expects " +
                          std::to_string(model.config().n_inputs));
  }
  Vector out(X.rows());
  std::size_t fallbacks = 0;
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    if (fallback_count != nullptr) {
      const auto t = model.trace(row_span(X, s));
      out[s] = t.output;
      fallbacks += t.fallback ? 1 : 0;
    } else {
      out[s] = model.forward(row_span(X, s));
    }
  }
  if (fallback_count != nullptr) *fallback_count = fallbacks;
  return out;
}

struct TrainResult {
  AnfisModel model;
  std::vector<double> rmse_history;     // training RMSE right after each epoch's LSE step
  std::vector<double> rmse_before_lse;  // training RMSE entering each epoch
  std::size_t best_epoch = 0;
};

/// Hybrid learning. Each epoch solves the consequents by least squares with
/// the premises fixed, then takes one gradient-descent step on the premise
/// parameters (gradient of the mean squared error) and repairs constraint
/// violations. Returns the state with the lowest post-LSE training RMSE.
inline TrainResult train_hybrid(const AnfisConfig& config, const Matrix& X, const Vector& Y) {
  AnfisModel model(config);
  detail::check_dataset(model, X, &Y);
  const std::span<const double> targets(Y.data(), static_cast<std::size_t>(Y.size()));
  const auto training_rmse = [&](const AnfisModel& mdl) {
    const Vector pred = predict_batch(mdl, X);
    return metrics::rmse(targets, std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
  };

  std::vector<double> history, before;
  history.reserve(config.epochs);
  before.reserve(config.epochs);
  AnfisModel best = model;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  const double inv_n = 1.0 / static_cast<double>(X.rows());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    before.push_back(training_rmse(model));
    const Matrix consequents = fit_consequents_lse(model, X, Y);
    if (!consequents.allFinite()) {
      throw TrainingError("anfis training diverged at epoch " + std::to_string(epoch + 1) +
                          ": least-squares consequents are non-finite");
    }
    model.set_consequents(consequents);
    const double err = training_rmse(model);
    if (!std::isfinite(err)) {
      throw TrainingError("anfis training loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
    history.push_back(err);
    if (err < best_rmse) {
      best_rmse = err;
      best = model;
      best_epoch = epoch;
    }
    const Vector grad = grad_premise(model, X, Y) * inv_n;
    if (!grad.allFinite()) {
      throw TrainingError("anfis premise gradient became non-finite at epoch " + std::to_string(epoch + 1));
    }
    model.set_premise_params(model.premise_params() - config.learning_rate * grad);
  }
  return TrainResult{std::move(best), std::move(history), std::move(before), best_epoch};
}

}  // namespace nfcast::anfis
