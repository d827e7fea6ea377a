#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "nfcast/mlp.hpp"
#include "oracles.hpp"

using namespace nfcast;
using namespace nfcast::mlp;

namespace {

MlpModel random_model(Rng& rng, std::size_t n, std::size_t h, Activation act) {
  MlpModel m(n, h, act);
  Vector p(static_cast<Eigen::Index>(m.param_count()));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(-1, 1);
  m.set_params(p);
  return m;
}

Matrix random_inputs(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix X(rows, cols);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(0, 1);
  return X;
}

// Hand-rolled forward pass in the documented parameter order.
double loop_forward(const Vector& p, std::size_t n, std::size_t h, Activation act, const std::vector<double>& x) {
  double y = p[static_cast<Eigen::Index>(h * (n + 2))];
  for (std::size_t j = 0; j < h; ++j) {
    double s = p[static_cast<Eigen::Index>(h * n + j)];
    for (std::size_t i = 0; i < n; ++i) s += p[static_cast<Eigen::Index>(j * n + i)] * x[i];
    const double a = act == Activation::Tanh ? std::tanh(s) : 1.0 / (1.0 + std::exp(-s));
    y += p[static_cast<Eigen::Index>(h * (n + 1) + j)] * a;
  }
  return y;
}

Matrix line_inputs() {
  Matrix X(21, 1);
  for (Eigen::Index i = 0; i < 21; ++i) X(i, 0) = static_cast<double>(i) / 20.0;
  return X;
}

}  // namespace

TEST(Mlp, ZeroModelOutputsZero) {
  const MlpModel m(3, 4);
  EXPECT_EQ(m.forward(std::vector<double>{0.1, 0.2, 0.3}), 0.0);
  EXPECT_EQ(m.layer_sizes(), (std::vector<std::size_t>{3, 4, 1}));
  EXPECT_EQ(m.param_count(), 4u * 5u + 1u);
}

TEST(Mlp, SingleNeuronTanh) {
  Matrix W(1, 1);
  W << 1.0;
  Vector b = Vector::Zero(1), v = Vector::Ones(1);
  const MlpModel m(W, b, v, 0.0);
  EXPECT_NEAR(m.forward(std::vector<double>{1.0}), 0.7615941559557649, 1e-15);
}

TEST(Mlp, ForwardMatchesLoopImplementation) {
  Rng rng(1);
  for (auto act : {Activation::Tanh, Activation::Sigmoid}) {
    const auto m = random_model(rng, 4, 6, act);
    const Vector p = m.params();
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x(4);
      for (auto& v : x) v = rng.uniform(-1, 1);
      EXPECT_NEAR(m.forward(x), loop_forward(p, 4, 6, act, x), 1e-12);
    }
  }
}

TEST(Mlp, ParamsRoundTrip) {
  Rng rng(2);
  const auto m = random_model(rng, 3, 5, Activation::Sigmoid);
  MlpModel copy(3, 5, Activation::Sigmoid);
  copy.set_params(m.params());
  EXPECT_TRUE(copy == m);
  EXPECT_THROW(copy.set_params(Vector::Zero(3)), InvalidArgument);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (auto act : {Activation::Tanh, Activation::Sigmoid}) {
    const auto m = random_model(rng, 5, 10, act);
    const Matrix X = random_inputs(rng, 20, 5);
    Vector Y(20);
    for (Eigen::Index i = 0; i < 20; ++i) Y[i] = rng.uniform(-1, 1);
    const auto sse = [&](const Vector& p) {
      MlpModel probe(5, 10, act);
      probe.set_params(p);
      return (predict_batch(probe, X) - Y).squaredNorm();
    };
    const Vector fd = oracle::central_diff(sse, m.params());
    EXPECT_LE(oracle::relative_error(gradient(m, X, Y), fd), 1e-5);
  }
}

TEST(Mlp, OutputBiasGradientIsTwiceTheResidualSum) {
  Rng rng(4);
  const auto m = random_model(rng, 2, 3, Activation::Tanh);
  const Matrix X = random_inputs(rng, 10, 2);
  const Vector f = predict_batch(m, X);
  Vector Y(10);
  for (Eigen::Index i = 0; i < 10; ++i) Y[i] = rng.uniform(-1, 1);
  const Vector g1 = gradient(m, X, Y);
  const Vector g2 = gradient(m, X, f - 2.0 * (f - Y));
  EXPECT_NEAR(g1[g1.size() - 1], 2.0 * (f - Y).sum(), 1e-12);
  EXPECT_NEAR(g2[g2.size() - 1], 2.0 * g1[g1.size() - 1], 1e-12);
}

TEST(Mlp, LearnsTheZeroFunction) {
  MlpTrainConfig c;
  c.epochs = 5000;
  c.hidden_neurons = 1;
  c.learning_rate = 0.5;
  const auto r = train(c, line_inputs(), Vector::Zero(21));
  EXPECT_LT(r.rmse_history[r.best_epoch], 1e-6);
}

TEST(Mlp, FitsALine) {
  MlpTrainConfig c;
  c.learning_rate = 0.2;
  c.init_scale = 1.0;
  const Matrix X = line_inputs();
  const Vector Y = (2.0 * X.col(0)).array() + 1.0;
  const auto r = train(c, X, Y);
  ASSERT_EQ(r.rmse_history.size(), 2000u);
  EXPECT_LT(r.rmse_history[r.best_epoch], 1e-2);
  const Vector pred = predict_batch(r.model, X);
  EXPECT_NEAR(std::sqrt((pred - Y).squaredNorm() / 21.0), r.rmse_history[r.best_epoch], 1e-12);
}

TEST(Mlp, TrainingIsBitIdenticalUnderASeed) {
  MlpTrainConfig c;
  c.epochs = 200;
  c.seed = 17;
  const Matrix X = line_inputs();
  const Vector Y = X.col(0).array().square();
  const auto a = train(c, X, Y);
  const auto b = train(c, X, Y);
  EXPECT_EQ(a.rmse_history, b.rmse_history);
  EXPECT_TRUE(a.model == b.model);
  c.seed = 18;
  EXPECT_FALSE(train(c, X, Y).model == a.model);
}

TEST(Mlp, RejectsBadInput) {
  const MlpModel m(2, 3);
  EXPECT_THROW(m.forward(std::vector<double>{1.0}), InvalidArgument);
  EXPECT_THROW(predict_batch(m, Matrix::Zero(2, 3)), InvalidArgument);
  MlpTrainConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(train(c, line_inputs(), Vector::Zero(21)), InvalidArgument);
  c = MlpTrainConfig{};
  EXPECT_THROW(train(c, line_inputs(), Vector::Zero(3)), InvalidArgument);
  EXPECT_THROW(parse_activation("relu"), InvalidArgument);
}

TEST(Mlp, DivergenceIsReported) {
  MlpTrainConfig c;
  c.learning_rate = 1e6;
  c.epochs = 200;
  const Matrix X = line_inputs();
  const Vector Y = (1e3 * X.col(0)).array();
  EXPECT_THROW(train(c, X, Y), TrainingError);
}
