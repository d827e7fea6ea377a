// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nfcast/anfis.hpp"
#include "nfcast/csv.hpp"
#include "nfcast/dataset.hpp"
#include "nfcast/forecast.hpp"
#include "nfcast/metrics.hpp"
#include "nfcast/mlp.hpp"
#include "oracles.hpp"

using namespace nfcast;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kBruteForceTol = 1e-12;
constexpr double kNormalizationTol = 1e-12;
constexpr double kFdStep = 1e-6;
constexpr double kFdRelTol = 1e-5;
constexpr double kKinkMargin = 1e-3;
constexpr double kLseParamTol = 1e-8;
constexpr double kLseRmseTol = 1e-8;
constexpr double kReachableRmse = 1e-3;
constexpr double kMlpLineRmse = 1e-2;
constexpr double kMetricTol = 1e-12;
constexpr double kTrendR2 = 0.9;
constexpr double kBruteForceSeconds = 5.0;
constexpr double kGradientSeconds = 30.0;
constexpr double kEndToEndSeconds = 120.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;
std::map<int, std::string> lines;

void report(int id, const std::string& name, const Outcome& o) {
  lines[id] = std::string(o.pass ? "[PASS] " : "[FAIL] ") + std::to_string(id) + ". " + name + ": " + o.detail;
  if (!o.pass) ++failures;
}

template <class Fn>
void run(int id, const std::string& name, Fn&& fn) {
  try {
    report(id, name, fn());
  } catch (const std::exception& e) {
    report(id, name, Outcome{false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

MfKind kind_of(oracle::Shape s) {
  switch (s) {
    case oracle::Shape::Bell: return MfKind::GBell;
    case oracle::Shape::Triangle: return MfKind::Triangular;
    case oracle::Shape::Trapezoid: return MfKind::Trapezoidal;
  }
  return MfKind::GBell;
}

anfis::AnfisModel from_system(const oracle::SugenoSystem& s) {
  const MfKind kind = kind_of(s.shape);
  anfis::AnfisConfig c;
  c.n_inputs = s.n_inputs;
  c.mfs_per_input = s.mfs;
  c.mf_kind = kind;
  std::vector<std::vector<MembershipFunction>> premise(s.n_inputs);
  for (std::size_t k = 0; k < s.n_inputs; ++k) {
    for (const auto& p : s.premise[k]) {
      premise[k].emplace_back(kind, std::span<const double>(p.data(), param_count(kind)));
    }
  }
  Matrix cons(static_cast<Eigen::Index>(s.consequents.size()), static_cast<Eigen::Index>(s.n_inputs + 1));
  for (std::size_t r = 0; r < s.consequents.size(); ++r) {
    for (std::size_t k = 0; k <= s.n_inputs; ++k) {
      cons(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = s.consequents[r][k];
    }
  }
  return anfis::AnfisModel(c, std::move(premise), std::move(cons));
}

Matrix random_inputs(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = 0.0, double hi = 1.0) {
  Matrix X(rows, cols);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(lo, hi);
  return X;
}

// Largest normalization defect seen over every trace taken in this run.
double worst_normalization = 0.0;
std::size_t traces_checked = 0;

void observe(const anfis::ForwardTrace& t) {
  double omega = 0.0, wbar = 0.0;
  for (double w : t.firing) omega += w;
  for (double w : t.normalized) wbar += w;
  if (omega > 0.0) {
    worst_normalization = std::max(worst_normalization, std::fabs(wbar - 1.0));
    ++traces_checked;
  }
}

void observe_all(const anfis::AnfisModel& model, const Matrix& X) {
  for (Eigen::Index s = 0; s < X.rows(); ++s) observe(model.trace(row_span(X, s)));
}

Outcome brute_force_equivalence() {
  Rng rng(1001);
  const auto start = Clock::now();
  const oracle::Shape shapes[] = {oracle::Shape::Bell, oracle::Shape::Triangle, oracle::Shape::Trapezoid};
  double worst = 0.0;
  std::size_t models = 0, points = 0;
  while (models < 200) {
    const std::size_t n = 1 + rng.below(5);
    const std::size_t m = 1 + rng.below(4);
    std::size_t rules = 1;
    for (std::size_t k = 0; k < n; ++k) rules *= m;
    if (rules > 32) continue;
    const auto sys = oracle::random_sugeno(rng, n, m, shapes[models % 3]);
    const auto model = from_system(sys);
    for (int i = 0; i < 25; ++i) {
      std::vector<double> x(n);
      for (auto& v : x) v = rng.uniform(-0.3, 1.3);
      const auto t = model.trace(x);
      observe(t);
      worst = std::max(worst, std::fabs(t.output - oracle::brute_force_output(sys, x)));
      ++points;
    }
    ++models;
  }
  const double secs = seconds_since(start);
  return {worst <= kBruteForceTol && secs < kBruteForceSeconds,
          std::to_string(models) + " models, " + std::to_string(points) + " points, max |diff| " + fmt(worst) +
              ", " + fmt(secs) + " s"};
}

double anfis_sse(const anfis::AnfisModel& base, const Vector& premise, const Matrix& X, const Vector& Y) {
  anfis::AnfisModel probe = base;
  probe.set_premise_params(premise);
  return (anfis::predict_batch(probe, X) - Y).squaredNorm();
}

// Keeps only samples at least kKinkMargin away from every breakpoint.
Matrix away_from_kinks(const oracle::SugenoSystem& sys, const Matrix& X) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index s = 0; s < X.rows(); ++s) {
    bool ok = true;
    for (std::size_t k = 0; k < sys.n_inputs && ok; ++k) {
      for (const auto& p : sys.premise[k]) {
        const std::size_t count = sys.shape == oracle::Shape::Trapezoid ? 4 : 3;
        for (std::size_t j = 0; j < count; ++j) {
          if (std::fabs(X(s, static_cast<Eigen::Index>(k)) - p[j]) < kKinkMargin) ok = false;
        }
      }
    }
    if (ok) keep.push_back(s);
  }
  Matrix out(static_cast<Eigen::Index>(keep.size()), X.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(keep[i]);
  return out;
}

Outcome gradient_checks() {
  Rng rng(2002);
  const auto start = Clock::now();
  const oracle::Shape shapes[] = {oracle::Shape::Bell, oracle::Shape::Triangle, oracle::Shape::Trapezoid};
  double worst_anfis = 0.0, worst_mlp = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.below(3);
    const auto sys = oracle::random_sugeno(rng, n, 2 + rng.below(2), shapes[i % 3]);
    const auto model = from_system(sys);
    const Matrix X = away_from_kinks(sys, random_inputs(rng, 30, static_cast<Eigen::Index>(n)));
    Vector Y(X.rows());
    for (Eigen::Index s = 0; s < Y.size(); ++s) Y[s] = rng.uniform(-1, 1);
    observe_all(model, X);
    const Vector p = model.premise_params();
    const Vector fd = oracle::central_diff([&](const Vector& q) { return anfis_sse(model, q, X, Y); }, p, kFdStep);
    worst_anfis = std::max(worst_anfis, oracle::relative_error(anfis::grad_premise(model, X, Y), fd));
  }
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.below(5), h = 1 + rng.below(12);
    const auto act = i % 2 == 0 ? mlp::Activation::Tanh : mlp::Activation::Sigmoid;
    mlp::MlpModel model(n, h, act);
    Vector p(static_cast<Eigen::Index>(model.param_count()));
    for (Eigen::Index j = 0; j < p.size(); ++j) p[j] = rng.uniform(-1, 1);
    model.set_params(p);
    const Matrix X = random_inputs(rng, 20, static_cast<Eigen::Index>(n));
    Vector Y(20);
    for (Eigen::Index s = 0; s < 20; ++s) Y[s] = rng.uniform(-1, 1);
    const auto sse = [&](const Vector& q) {
      mlp::MlpModel probe(n, h, act);
      probe.set_params(q);
      return (mlp::predict_batch(probe, X) - Y).squaredNorm();
    };
    const Vector fd = oracle::central_diff(sse, p, kFdStep);
    worst_mlp = std::max(worst_mlp, oracle::relative_error(mlp::gradient(model, X, Y), fd));
  }
  const double secs = seconds_since(start);
  return {worst_anfis <= kFdRelTol && worst_mlp <= kFdRelTol && secs < kGradientSeconds,
          "anfis max rel " + fmt(worst_anfis) + ", mlp max rel " + fmt(worst_mlp) + " over 100 + 100 instances, " +
              fmt(secs) + " s"};
}

Outcome lse_recovery() {
  Rng rng(3003);
  double worst_param = 0.0, worst_rmse = 0.0;
  for (std::size_t n : {1u, 2u, 3u}) {
    anfis::AnfisConfig c;
    c.n_inputs = n;
    c.mfs_per_input = n == 3 ? 2 : 3;
    anfis::AnfisModel truth(c);
    Matrix cons(static_cast<Eigen::Index>(truth.rule_count()), static_cast<Eigen::Index>(n + 1));
    for (Eigen::Index i = 0; i < cons.size(); ++i) cons.data()[i] = rng.uniform(-2, 2);
    truth.set_consequents(cons);
    const Matrix X = random_inputs(rng, 200, static_cast<Eigen::Index>(n));
    const Vector Y = anfis::predict_batch(truth, X);
    anfis::AnfisModel fitted(c);
    fitted.set_consequents(anfis::fit_consequents_lse(fitted, X, Y));
    observe_all(fitted, X);
    worst_param = std::max(worst_param, (fitted.consequents() - cons).cwiseAbs().maxCoeff());
    worst_rmse = std::max(worst_rmse, std::sqrt((anfis::predict_batch(fitted, X) - Y).squaredNorm() /
                                                static_cast<double>(X.rows())));
  }
  return {worst_param <= kLseParamTol && worst_rmse < kLseRmseTol,
          "max consequent error " + fmt(worst_param) + ", training RMSE " + fmt(worst_rmse)};
}

Outcome hybrid_training() {
  Rng rng(4004);
  std::size_t epochs_checked = 0, violations = 0;
  for (auto kind : {MfKind::Triangular, MfKind::Trapezoidal, MfKind::GBell}) {
    anfis::AnfisConfig c;
    c.n_inputs = 2;
    c.mfs_per_input = 3;
    c.mf_kind = kind;
    const Matrix X = random_inputs(rng, 60, 2);
    Vector Y(60);
    for (Eigen::Index i = 0; i < 60; ++i) Y[i] = std::sin(3.0 * X(i, 0)) + X(i, 1) * X(i, 1);
    const auto r = anfis::train_hybrid(c, X, Y);
    for (std::size_t e = 0; e < r.rmse_history.size(); ++e) {
      ++epochs_checked;
      if (r.rmse_history[e] > r.rmse_before_lse[e]) ++violations;
    }
  }

  // Reachable target: grid premises with random consequents.
  anfis::AnfisConfig c;
  c.n_inputs = 2;
  c.mfs_per_input = 2;
  c.epochs = 200;
  anfis::AnfisModel truth(c);
  Matrix cons(static_cast<Eigen::Index>(truth.rule_count()), 3);
  for (Eigen::Index i = 0; i < cons.size(); ++i) cons.data()[i] = rng.uniform(-1, 1);
  truth.set_consequents(cons);
  const Matrix X = random_inputs(rng, 100, 2);
  const Vector Y = anfis::predict_batch(truth, X);
  const auto r = anfis::train_hybrid(c, X, Y);
  observe_all(r.model, X);
  const double final_rmse =
      std::sqrt((anfis::predict_batch(r.model, X) - Y).squaredNorm() / static_cast<double>(X.rows()));
  return {violations == 0 && final_rmse < kReachableRmse,
          std::to_string(violations) + " of " + std::to_string(epochs_checked) +
              " epochs with RMSE rising across LSE; reachable target RMSE " + fmt(final_rmse) + " after " +
              std::to_string(c.epochs) + " epochs"};
}

Outcome mlp_line_fit() {
  Matrix X(50, 1);
  Vector Y(50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    X(i, 0) = static_cast<double>(i) / 49.0;
    Y[i] = 2.0 * X(i, 0) + 1.0;
  }
  mlp::MlpTrainConfig c;
  c.hidden_neurons = 10;
  c.epochs = 2000;
  c.learning_rate = 0.2;
  c.init_scale = 1.0;
  c.seed = 42;
  const auto a = mlp::train(c, X, Y);
  const auto b = mlp::train(c, X, Y);
  const double err = std::sqrt((mlp::predict_batch(a.model, X) - Y).squaredNorm() / 50.0);
  const bool identical = a.model.params() == b.model.params() && a.rmse_history == b.rmse_history;
  return {err < kMlpLineRmse && identical,
          "training RMSE " + fmt(err) + ", reruns " + (identical ? "bit-identical" : "differ")};
}

Outcome metric_oracles() {
  using V = std::vector<double>;
  const auto near = [](double a, double b) { return std::fabs(a - b) <= kMetricTol; };
  const V a{3.5, -1.0, 7.25, 0.5};
  const bool ok = near(metrics::rmse(V{0, 0}, V{3, 4}), std::sqrt(12.5)) &&
                  near(metrics::r2_paper(V{1, 2}, V{2, 2}), 0.8) &&
                  near(metrics::r2_standard(V{1, 2, 3}, V{1, 2, 4}), 0.5) && metrics::rmse(a, a) == 0.0 &&
                  metrics::r2_paper(a, a) == 1.0 && metrics::r2_standard(a, a) == 1.0;
  return {ok, ok ? "all oracle values and identity cases match" : "mismatch in oracle values"};
}

// CLI helpers.

std::string quote(const std::string& s) { return "'" + s + "'"; }

void cli(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = quote(NFCAST_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >>" + quote(log.string()) + " 2>&1";
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("command failed (see " + log.string() + "): " + cmd);
}

std::vector<csv::Row> read_csv(const fs::path& p) { return csv::parse_file(p.string()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "nfcast_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kData = std::string(NFCAST_SOURCE_DIR) + "/data/sample_faostat.csv";
const std::string kForecastConf = std::string(NFCAST_SOURCE_DIR) + "/data/forecast.conf";

using Args = std::vector<std::string>;

Args join(Args a, const Args& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Args io(const fs::path& out) { return {"--data", kData, "--out", out.string()}; }

Args models_in(const fs::path& dir) {
  Args files;
  for (const auto& t : dataset::target_series()) files.push_back((dir / ("model_" + t + ".json")).string());
  return files;
}

Outcome protocol_shape() {
  const auto dir = fresh_dir("protocol");
  const auto log = dir / "log.txt";
  const auto start = Clock::now();
  cli(join({"ingest"}, io(dir)), log);
  cli(join({"sweep"}, io(dir)), log);
  cli(join({"train", "--config", kForecastConf}, io(dir)), log);
  cli(join(join({"forecast", "--config", kForecastConf, "--horizon", "13"}, io(dir)), models_in(dir)), log);
  const double secs = seconds_since(start);

  std::vector<std::string> problems;
  for (const std::string name : {"mlp_train_rmse.csv", "mlp_test_rmse.csv", "anfis_train_rmse.csv",
                                 "anfis_test_rmse.csv"}) {
    const auto rows = read_csv(dir / name);
    if (rows.size() != 7) {
      problems.push_back(name + " has " + std::to_string(rows.size()) + " lines");
      continue;
    }
    const auto& header = rows[0].fields;
    const auto col = std::find(header.begin(), header.end(), "variable") - header.begin();
    std::map<std::string, int> per_target;
    for (std::size_t r = 1; r < rows.size(); ++r) ++per_target[rows[r].fields.at(static_cast<std::size_t>(col))];
    for (const auto& t : dataset::target_series()) {
      if (per_target[t] != 3) problems.push_back(name + " lacks 3 rows for " + t);
    }
  }
  const auto table = read_csv(dir / "forecast_table.csv");
  if (table.size() != 14) problems.push_back("forecast_table.csv has " + std::to_string(table.size()) + " lines");
  for (std::size_t r = 1; r < table.size(); ++r) {
    if (table[r].fields.at(0) != std::to_string(2017 + static_cast<int>(r))) problems.push_back("bad year label");
  }
  const auto longform = read_csv(dir / "forecast.csv");
  std::map<std::string, std::vector<std::string>> years;
  for (std::size_t r = 1; r < longform.size(); ++r) years[longform[r].fields.at(1)].push_back(longform[r].fields.at(0));
  for (const auto& t : dataset::target_series()) {
    if (years[t].size() != 13 || years[t].front() != "2018" || years[t].back() != "2030") {
      problems.push_back("forecast.csv rows for " + t + " are not 2018-2030");
    }
  }
  if (secs >= kEndToEndSeconds) problems.push_back("too slow");
  std::string detail = "4 sweep tables x 6 rows, 13 forecast rows per target for 2018-2030, " + fmt(secs) + " s";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

Outcome trend_fidelity() {
  std::vector<double> series;
  for (int t = 0; t < 57; ++t) series.push_back(1e6 * (1.0 + 0.03 * t + 0.0004 * t * t));
  const auto set = dataset::build_autoregressive(series, 1961, "trend", 5);
  const auto split = dataset::split_random(set, 0.7, 42);
  const auto scaler = dataset::fit_scaler(split.train);
  anfis::AnfisConfig c;
  c.n_inputs = 5;
  c.mfs_per_input = 2;
  c.mf_kind = MfKind::GBell;
  const Matrix X = scaler.features.transform(split.train.X);
  const Vector Y = scaler.targets.transform(split.train.Y).col(0);
  const auto trained = anfis::train_hybrid(c, X, Y);

  const Vector scaled = anfis::predict_batch(trained.model, scaler.features.transform(split.test.X));
  std::vector<double> actual, predicted;
  for (Eigen::Index i = 0; i < scaled.size(); ++i) {
    actual.push_back(split.test.Y(i, 0));
    predicted.push_back(scaler.targets.inverse_value(0, scaled[i]));
  }
  const double r2 = metrics::r2_standard(actual, predicted);
  const auto f = forecast::recursive_forecast(
      [&](std::span<const double> w) { return trained.model.forward(w); }, scaler, series, 2017, 13, "trend");
  bool increasing = f.rows.size() == 13;
  double prev = series.back();
  for (const auto& row : f.rows) {
    increasing = increasing && std::isfinite(row.value) && row.value > prev;
    prev = row.value;
  }
  return {r2 >= kTrendR2 && increasing, "test r2_standard " + fmt(r2) + ", 13-step forecast " +
                                            (increasing ? "finite and increasing" : "not monotone increasing")};
}

// Every stage that writes files, run into `dir`.
void pipeline(const fs::path& dir) {
  const auto log = fs::temp_directory_path() / "nfcast_acceptance" / (dir.filename().string() + ".log");
  const auto exo = dir / "exogenous", ar = dir / "autoregressive", sw = dir / "sweep", mlp = dir / "mlp";
  cli(join({"ingest"}, io(dir)), log);
  cli(join({"train"}, io(exo)), log);
  cli(join(join({"evaluate"}, io(exo)), models_in(exo)), log);
  cli(join({"train", "--model", "mlp", "--epochs", "500"}, io(mlp)), log);
  cli(join(join({"evaluate"}, io(mlp)), models_in(mlp)), log);
  cli(join({"sweep", "--epochs", "60"}, io(sw)), log);
  cli(join({"train", "--config", kForecastConf}, io(ar)), log);
  cli(join(join({"forecast", "--config", kForecastConf}, io(ar)), models_in(ar)), log);
  cli(join({"plot"}, join(io(ar), {(ar / "forecast_plot.csv").string(), (exo / "predictions_livestock_production_anfis.csv").string()})), log);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

Outcome determinism() {
  const auto a = fresh_dir("run_a"), b = fresh_dir("run_b");
  pipeline(a);
  pipeline(b);
  const auto sa = snapshot(a), sb = snapshot(b);
  std::vector<std::string> differing;
  for (const auto& [name, content] : sa) {
    const auto it = sb.find(name);
    if (it == sb.end() || it->second != content) differing.push_back(name);
  }
  for (const auto& [name, content] : sb) {
    if (!sa.contains(name)) differing.push_back(name);
  }
  std::size_t supervised = 0, splits = 0, models = 0;
  for (const auto& [name, content] : sa) {
    const auto file = fs::path(name).filename().string();
    supervised += file.starts_with("supervised_");
    splits += file.starts_with("split_");
    models += file.starts_with("model_");
  }
  const bool covered = supervised >= 6 && splits >= 6 && models >= 6 && sa.contains("autoregressive/forecast.csv");
  std::string detail = std::to_string(sa.size()) + " files compared, " + std::to_string(differing.size()) + " differ";
  for (const auto& d : differing) detail += "; " + d;
  if (!covered) detail += "; expected supervised sets, splits, models and forecasts in the output";
  return {differing.empty() && covered && !sa.empty(), detail};
}

}  // namespace

int main() {
  run(1, "ANFIS output equals rule-by-rule evaluation", brute_force_equivalence);
  run(3, "analytic gradients match central differences", gradient_checks);
  run(4, "least squares recovers known consequents", lse_recovery);
  run(5, "hybrid training LSE step and reachable target", hybrid_training);
  // Covers every trace taken by the ANFIS checks above.
  run(2, "normalized firing strengths sum to one", [] {
    return Outcome{traces_checked > 0 && worst_normalization <= kNormalizationTol,
                   std::to_string(traces_checked) + " traces, max |sum - 1| " + fmt(worst_normalization)};
  });
  run(6, "MLP fits y = 2x + 1 deterministically", mlp_line_fit);
  run(7, "metric oracle values", metric_oracles);
  run(8, "CLI reproduces the comparison and forecast table shapes", protocol_shape);
  run(9, "GBell ANFIS on a smooth rising trend", trend_fidelity);
  run(10, "identical inputs give byte-identical outputs", determinism);
  for (const auto& [id, line] : lines) std::cout << line << "\n";
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
