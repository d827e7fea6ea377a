#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfcast/error.hpp"
#include "nfcast/metrics.hpp"
#include "nfcast/rng.hpp"
#include "nfcast/types.hpp"

namespace nfcast::mlp {

enum class Activation { Tanh, Sigmoid };

inline std::string_view to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "sigmoid"; }

inline Activation parse_activation(std::string_view text) {
  if (text == "tanh") return Activation::Tanh;
  if (text == "sigmoid") return Activation::Sigmoid;
  throw InvalidArgument("unknown activation '" + std::string(text) + "' (expected tanh or sigmoid)");
}

struct MlpTrainConfig {
  std::size_t hidden_neurons = 10;
  std::size_t epochs = 2000;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  double init_scale = 0.5;
  Activation activation = Activation::Tanh;

  void validate() const {
    if (hidden_neurons < 1) throw InvalidArgument("mlp needs at least one hidden neuron");
    if (epochs < 1) throw InvalidArgument("mlp epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidArgument("mlp learning rate must be positive");
    }
    if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
      throw InvalidArgument("mlp init_scale must be positive");
    }
  }
};

/// Single-hidden-layer perceptron with a linear output neuron:
///   S_j = sum_i w_ji x_i + beta_j,  h_j = act(S_j),  y = sum_j v_j h_j + beta_out
///
/// Flattened parameter order (gradient() and params()): hidden weights
/// row-major (neuron, input), hidden biases, output weights, output bias.
class MlpModel {
 public:
  MlpModel(std::size_t n_inputs, std::size_t n_hidden, Activation activation = Activation::Tanh)
      : activation_(activation),
        hidden_weights_(Matrix::Zero(static_cast<Eigen::Index>(n_hidden), static_cast<Eigen::Index>(n_inputs))),
        hidden_bias_(Vector::Zero(static_cast<Eigen::Index>(n_hidden))),
        output_weights_(Vector::Zero(static_cast<Eigen::Index>(n_hidden))) {
    if (n_inputs < 1 || n_hidden < 1) throw InvalidArgument("mlp layer sizes must be positive");
  }

  MlpModel(Matrix hidden_weights, Vector hidden_bias, Vector output_weights, double output_bias,
           Activation activation = Activation::Tanh)
      : activation_(activation),
        hidden_weights_(std::move(hidden_weights)),
        hidden_bias_(std::move(hidden_bias)),
        output_weights_(std::move(output_weights)),
        output_bias_(output_bias) {
    if (hidden_weights_.rows() < 1 || hidden_weights_.cols() < 1) {
      throw InvalidArgument("mlp layer sizes must be positive");
    }
    if (hidden_bias_.size() != hidden_weights_.rows() || output_weights_.size() != hidden_weights_.rows()) {
      throw InvalidArgument("mlp layer dimensions do not chain");
    }
    check_finite();
  }

  std::size_t n_inputs() const { return static_cast<std::size_t>(hidden_weights_.cols()); }
  std::size_t n_hidden() const { return static_cast<std::size_t>(hidden_weights_.rows()); }
  std::vector<std::size_t> layer_sizes() const { return {n_inputs(), n_hidden(), 1}; }
  Activation activation() const { return activation_; }
  const Matrix& hidden_weights() const { return hidden_weights_; }
  const Vector& hidden_bias() const { return hidden_bias_; }
  const Vector& output_weights() const { return output_weights_; }
  double output_bias() const { return output_bias_; }

  std::size_t param_count() const { return n_hidden() * (n_inputs() + 2) + 1; }

  Vector params() const {
    Vector p(static_cast<Eigen::Index>(param_count()));
    const auto nw = hidden_weights_.size();
    const auto h = hidden_bias_.size();
    p.head(nw) = Eigen::Map<const Vector>(hidden_weights_.data(), nw);
    p.segment(nw, h) = hidden_bias_;
    p.segment(nw + h, h) = output_weights_;
    p[p.size() - 1] = output_bias_;
    return p;
  }

  void set_params(const Vector& p) {
    if (static_cast<std::size_t>(p.size()) != param_count()) {
      throw InvalidArgument("mlp parameter vector has wrong length");
    }
    const auto nw = hidden_weights_.size();
    const auto h = hidden_bias_.size();
    Eigen::Map<Vector>(hidden_weights_.data(), nw) = p.head(nw);
    hidden_bias_ = p.segment(nw, h);
    output_weights_ = p.segment(nw + h, h);
    output_bias_ = p[p.size() - 1];
    check_finite();
  }

  double forward(std::span<const double> x) const {
    check_input(x);
    const Eigen::Map<const Vector> in(x.data(), static_cast<Eigen::Index>(x.size()));
    const Vector hidden = activate(hidden_weights_ * in + hidden_bias_);
    return output_weights_.dot(hidden) + output_bias_;
  }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    return a.activation_ == b.activation_ && a.hidden_weights_ == b.hidden_weights_ &&
           a.hidden_bias_ == b.hidden_bias_ && a.output_weights_ == b.output_weights_ &&
           a.output_bias_ == b.output_bias_;
  }

 private:
  friend Vector gradient(const MlpModel&, const Matrix&, const Vector&);

  Vector activate(const Vector& s) const {
    if (activation_ == Activation::Tanh) return s.array().tanh().matrix();
    return (1.0 / (1.0 + (-s.array()).exp())).matrix();
  }

  // Derivative of the activation expressed through its output value.
  Vector activation_slope(const Vector& h) const {
    if (activation_ == Activation::Tanh) return (1.0 - h.array().square()).matrix();
    return (h.array() * (1.0 - h.array())).matrix();
  }

  void check_input(std::span<const double> x) const {
    if (x.size() != n_inputs()) {
      throw InvalidArgument("mlp expects " + std::to_string(n_inputs()) + " inputs, got " +
                            std::to_string(x.size()));
    }
  }

  void check_finite() const {
    if (!hidden_weights_.allFinite() || !hidden_bias_.allFinite() || !output_weights_.allFinite() ||
        !std::isfinite(output_bias_)) {
      throw InvalidArgument("mlp parameters must be finite");
    }
  }

  Activation activation_;
  Matrix hidden_weights_;
  Vector hidden_bias_;
  Vector output_weights_;
  double output_bias_ = 0.0;
};

/// Exact gradient of SSE = sum_s (y(x_s) - t_s)^2, flattened in
/// MlpModel::params() order.
inline Vector gradient(const MlpModel& model, const Matrix& X, const Vector& Y) {
  if (static_cast<std::size_t>(X.cols()) != model.n_inputs()) {
    throw InvalidArgument("mlp dataset has " + std::to_string(X.cols()) + " columns, model expects " +
                          std::to_string(model.n_inputs()));
  }
  if (Y.size() != X.rows()) throw InvalidArgument("mlp inputs and targets differ in length");

  const auto n = static_cast<Eigen::Index>(model.n_inputs());
  const auto h = static_cast<Eigen::Index>(model.n_hidden());
  Matrix dW = Matrix::Zero(h, n);
  Vector db = Vector::Zero(h);
  Vector dv = Vector::Zero(h);
  double dc = 0.0;
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    const Vector in = X.row(s).transpose();
    const Vector hidden = model.activate(model.hidden_weights_ * in + model.hidden_bias_);
    const double out = model.output_weights_.dot(hidden) + model.output_bias_;
    const double delta = 2.0 * (out - Y[s]);
    dc += delta;
    dv += delta * hidden;
    const Vector back = (delta * model.output_weights_).cwiseProduct(model.activation_slope(hidden));
    db += back;
    dW.noalias() += back * in.transpose();
  }
  Vector g(static_cast<Eigen::Index>(model.param_count()));
  g.head(dW.size()) = Eigen::Map<const Vector>(dW.data(), dW.size());
  g.segment(dW.size(), h) = db;
  g.segment(dW.size() + h, h) = dv;
  g[g.size() - 1] = dc;
  return g;
}

inline Vector predict_batch(const MlpModel& model, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != model.n_inputs()) {
    throw InvalidArgument("mlp batch has " + std::to_string(X.cols()) + " columns, model expects " +
                          std::to_string(model.n_inputs()));
  }
  Vector out(X.rows());
  for (Eigen::Index s = 0; s < X.rows(); ++s) out[s] = model.forward(row_span(X, s));
  return out;
}

struct TrainResult {
  MlpModel model;
  std::vector<double> rmse_history;  // training RMSE of the parameters entering each epoch
  std::size_t best_epoch = 0;
};

/// Full-batch gradient descent on the mean squared error. Weights and biases
/// start uniform in [-init_scale, init_scale]; the returned model is the
/// epoch snapshot with the lowest training RMSE.
inline TrainResult train(const MlpTrainConfig& config, const Matrix& X, const Vector& Y) {
  config.validate();
  if (X.rows() < 1 || X.cols() < 1) throw InvalidArgument("mlp dataset is empty");
  if (Y.size() != X.rows()) throw InvalidArgument("mlp inputs and targets differ in length");
  if (!X.allFinite() || !Y.allFinite()) throw InvalidArgument("mlp training data must be finite");

  MlpModel model(static_cast<std::size_t>(X.cols()), config.hidden_neurons, config.activation);
  Rng rng(config.seed);
  Vector p(static_cast<Eigen::Index>(model.param_count()));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(-config.init_scale, config.init_scale);
  model.set_params(p);

  const std::span<const double> targets(Y.data(), static_cast<std::size_t>(Y.size()));
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  std::vector<double> history;
  history.reserve(config.epochs);
  MlpModel best = model;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Vector pred = predict_batch(model, X);
    const double err =
        metrics::rmse(targets, std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
    if (!std::isfinite(err)) {
      throw TrainingError("mlp training loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
    history.push_back(err);
    if (err < best_rmse) {
      best_rmse = err;
      best = model;
      best_epoch = epoch;
    }
    const Vector grad = gradient(model, X, Y) * inv_n;
    const Vector next = model.params() - config.learning_rate * grad;
    if (!next.allFinite()) {
      throw TrainingError("mlp parameters became non-finite at epoch " + std::to_string(epoch + 1));
    }
    model.set_params(next);
  }
  return TrainResult{std::move(best), std::move(history), best_epoch};
}

}  // namespace nfcast::mlp
