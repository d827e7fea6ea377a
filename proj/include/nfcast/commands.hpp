#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nfcast/anfis.hpp"
#include "nfcast/config.hpp"
#include "nfcast/csv.hpp"
#include "nfcast/dataset.hpp"
#include "nfcast/error.hpp"
#include "nfcast/forecast.hpp"
#include "nfcast/metrics.hpp"
#include "nfcast/mlp.hpp"
#include "nfcast/svg.hpp"
#include "nfcast/trained_model.hpp"

namespace nfcast::commands {

namespace fs = std::filesystem;

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  return (fs::path(cfg.out) / name).string();
}

/// Series that must be aggregated for a feature mode.
inline std::vector<std::string> required_series(const RunConfig& cfg, dataset::FeatureMode::Kind kind) {
  std::vector<std::string> names;
  if (kind == dataset::FeatureMode::Kind::Exogenous) names = dataset::exogenous_inputs();
  for (const auto& t : cfg.targets) names.push_back(t);
  return names;
}

inline dataset::SeriesTable load_table(const RunConfig& cfg, const std::vector<std::string>& names) {
  const auto records = dataset::parse_csv(cfg.data);
  std::vector<dataset::SeriesRule> rules;
  for (const auto& name : names) {
    const auto it = cfg.series.find(name);
    if (it == cfg.series.end()) throw InvalidArgument("no series definition for '" + name + "'");
    if (std::none_of(rules.begin(), rules.end(), [&](const auto& r) { return r.name == name; })) {
      rules.push_back(it->second);
    }
  }
  return dataset::aggregate(records, rules, cfg.gap_policy);
}

// ---------------------------------------------------------------- ingest

struct Coverage {
  std::string series;
  int first_year = 0;
  int last_year = 0;
  std::size_t years = 0;
};

struct IngestResult {
  dataset::SeriesTable table;
  std::vector<Coverage> coverage;
  std::string table_path;
};

/// Aggregates every configured series into one table file.
inline IngestResult ingest(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto records = dataset::parse_csv(cfg.data);
  IngestResult res;
  for (const auto& [name, rule] : cfg.series) {
    const std::set<std::string> allowed(rule.items.begin(), rule.items.end());
    std::set<int> years;
    for (const auto& r : records) {
      if (r.element == rule.element && (allowed.empty() || allowed.contains(r.item))) years.insert(r.year);
    }
    Coverage c{name, 0, 0, years.size()};
    if (!years.empty()) {
      c.first_year = *years.begin();
      c.last_year = *years.rbegin();
    }
    res.coverage.push_back(c);
  }
  res.table = dataset::aggregate(records, cfg.series_rules(), cfg.gap_policy);
  res.table_path = out_path(cfg, "series_table.csv");
  dataset::write_table_csv(res.table, res.table_path);

  log << "read " << records.size() << " records from " << cfg.data << "\n";
  for (const auto& c : res.coverage) {
    log << "  " << c.series << ": " << c.years << " years";
    if (c.years > 0) log << " (" << c.first_year << "-" << c.last_year << ")";
    log << "\n";
  }
  log << "table: " << res.table.years.front() << "-" << res.table.years.back() << ", "
      << res.table.series.size() << " series -> " << res.table_path << "\n";
  return res;
}

// ---------------------------------------------------------------- training

/// Hyperparameter choice for one fit.
struct ModelChoice {
  ModelKind kind = ModelKind::Anfis;
  std::size_t neurons = 10;
  MfKind mf_kind = MfKind::GBell;
};

struct FitOutcome {
  TrainedModel model;
  std::vector<double> history;  // training RMSE per epoch, scaled target units
  metrics::EvalEntry train;     // original units
  metrics::EvalEntry test;
};

/// Scales the split (fitting on training rows only), trains one model and
/// scores it on both sides of the split.
inline FitOutcome fit_model(const RunConfig& cfg, const dataset::Split& split, const std::string& target,
                            const ModelChoice& choice, std::uint64_t model_seed) {
  const auto scaler = dataset::fit_scaler(split.train);
  const Matrix X = scaler.features.transform(split.train.X);
  const Vector Y = scaler.targets.transform(split.train.Y).col(0);

  std::vector<double> history;
  std::variant<anfis::AnfisModel, mlp::MlpModel> model = [&]() -> std::variant<anfis::AnfisModel, mlp::MlpModel> {
    if (choice.kind == ModelKind::Anfis) {
      auto r = anfis::train_hybrid(cfg.anfis_config(static_cast<std::size_t>(X.cols()), choice.mf_kind, model_seed), X, Y);
      history = std::move(r.rmse_history);
      return std::move(r.model);
    }
    auto r = mlp::train(cfg.mlp_config(choice.neurons, model_seed), X, Y);
    history = std::move(r.rmse_history);
    return std::move(r.model);
  }();

  FitOutcome out{TrainedModel{target, cfg.features, split.train.feature_names, cfg.split, cfg.seed, model_seed,
                              scaler, std::move(model)},
                 std::move(history),
                 {},
                 {}};
  const auto score = [&](const dataset::SupervisedSet& part, const char* phase) {
    const Vector pred = out.model.predict(part.X);
    const Vector actual = part.Y.col(0);
    return metrics::evaluate(target, phase, {actual.data(), static_cast<std::size_t>(actual.size())},
                             {pred.data(), static_cast<std::size_t>(pred.size())});
  };
  out.train = score(split.train, "train");
  out.test = score(split.test, "test");
  return out;
}

/// year,phase for every row of a split, in year order.
inline void write_split_csv(const dataset::Split& split, const std::string& path) {
  std::vector<std::pair<int, const char*>> rows;
  for (int y : split.train.years) rows.emplace_back(y, "train");
  for (int y : split.test.years) rows.emplace_back(y, "test");
  std::sort(rows.begin(), rows.end());
  csv::Writer out(path);
  out.row({"year", "phase"});
  for (const auto& [year, phase] : rows) out.row({std::to_string(year), phase});
}

inline std::string model_file_name(const std::string& target) { return "model_" + target + ".json"; }

/// Trains the configured model for every target. Writes per target the
/// model file, the supervised set and the split, plus the per-epoch
/// training history.
inline std::vector<FitOutcome> train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto table = load_table(cfg, required_series(cfg, cfg.features.kind));
  const ModelChoice choice{cfg.model, cfg.neurons, cfg.mf_kind};

  std::vector<FitOutcome> outcomes;
  for (const auto& target : cfg.targets) {
    const auto set = dataset::build_features(table, cfg.features, target);
    const auto split = dataset::split_random(set, cfg.split, cfg.seed);
    dataset::write_set_csv(set, out_path(cfg, "supervised_" + target + ".csv"));
    write_split_csv(split, out_path(cfg, "split_" + target + ".csv"));
    outcomes.push_back(fit_model(cfg, split, target, choice, cfg.seed));
    const auto& o = outcomes.back();
    const auto path = out_path(cfg, model_file_name(target));
    save_model(o.model, path);
    log << target << ": " << o.model.kind() << " (" << o.model.variant_label() << "), " << split.train.size()
        << " train / " << split.test.size() << " test rows, train RMSE " << csv::format_number(o.train.rmse)
        << ", test RMSE " << csv::format_number(o.test.rmse) << " -> " << path << "\n";
  }

  csv::Writer hist(out_path(cfg, "train_history.csv"));
  hist.row({"target", "epoch", "rmse_scaled"});
  for (const auto& o : outcomes) {
    for (std::size_t e = 0; e < o.history.size(); ++e) {
      hist.row({o.model.target, std::to_string(e + 1), csv::format_number(o.history[e])});
    }
  }
  return outcomes;
}

// ---------------------------------------------------------------- evaluate

inline const std::vector<std::string>& eval_header() {
  static const std::vector<std::string> h{"target", "model", "variant", "phase", "n", "rmse", "r2_paper", "r2_standard"};
  return h;
}

struct EvalOutput {
  std::string model_kind;
  std::string variant;
  metrics::EvalEntry entry;
};

/// Rebuilds each model's split from the data and scores both phases.
/// Writes eval_report.csv and predictions_<target>_<model>.csv.
inline std::vector<EvalOutput> evaluate(const RunConfig& cfg, const std::vector<std::string>& model_paths,
                                        std::ostream& log) {
  cfg.validate();
  if (model_paths.empty()) throw InvalidArgument("evaluate needs at least one model file");
  std::vector<EvalOutput> results;
  for (const auto& path : model_paths) {
    const auto tm = load_model(path);
    RunConfig local = cfg;
    local.targets = {tm.target};
    const auto table = load_table(local, required_series(local, tm.features.kind));
    const auto set = dataset::build_features(table, tm.features, tm.target);
    if (set.feature_names != tm.feature_names) {
      throw Error(path + ": model features do not match the data's features");
    }
    const auto split = dataset::split_random(set, tm.split_ratio, tm.split_seed);

    struct Pred {
      int year;
      std::string phase;
      double actual;
      double predicted;
    };
    std::vector<Pred> preds;
    for (const auto* part : {&split.train, &split.test}) {
      const std::string phase = part == &split.train ? "train" : "test";
      const Vector p = tm.predict(part->X);
      const Vector a = part->Y.col(0);
      results.push_back({tm.kind(), tm.variant_label(),
                         metrics::evaluate(tm.target, phase, {a.data(), static_cast<std::size_t>(a.size())},
                                           {p.data(), static_cast<std::size_t>(p.size())})});
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        preds.push_back({part->years[static_cast<std::size_t>(i)], phase, a[i], p[i]});
      }
    }
    std::sort(preds.begin(), preds.end(), [](const Pred& a, const Pred& b) { return a.year < b.year; });
    csv::Writer out(out_path(cfg, "predictions_" + tm.target + "_" + tm.kind() + ".csv"));
    out.row({"year", "phase", "actual", "predicted"});
    for (const auto& p : preds) {
      out.row({std::to_string(p.year), p.phase, csv::format_number(p.actual), csv::format_number(p.predicted)});
    }
  }

  const auto report_path = out_path(cfg, "eval_report.csv");
  csv::Writer report(report_path);
  report.row(eval_header());
  for (const auto& r : results) {
    const auto& e = r.entry;
    report.row({e.target, r.model_kind, r.variant, e.phase, std::to_string(e.n), csv::format_number(e.rmse),
                csv::format_number(e.r2_paper), csv::format_number(e.r2_standard)});
    log << e.target << " " << r.model_kind << "(" << r.variant << ") " << e.phase << ": RMSE "
        << csv::format_number(e.rmse) << ", R2 (uncentered) " << csv::format_number(e.r2_paper) << ", R2 "
        << csv::format_number(e.r2_standard) << "\n";
  }
  log << "report -> " << report_path << "\n";
  return results;
}

// ---------------------------------------------------------------- sweep

struct SweepCell {
  std::size_t index = 0;
  std::string target;
  ModelChoice choice;
  std::uint64_t seed = 0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<std::string> tables;  // written file paths
};

inline const std::vector<std::string>& sweep_table_names() {
  static const std::vector<std::string> names{"mlp_train_rmse.csv", "anfis_train_rmse.csv", "mlp_test_rmse.csv",
                                              "anfis_test_rmse.csv"};
  return names;
}

/// MLP over the neuron grid and ANFIS over the membership-kind grid, per
/// target, scored on the shared seeded split. Cell i trains with seed + i,
/// so results do not depend on the thread count.
inline SweepResult sweep(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto table = load_table(cfg, required_series(cfg, cfg.features.kind));

  std::vector<SweepCell> cells;
  for (const auto& target : cfg.targets) {
    for (auto n : cfg.sweep_neurons) cells.push_back({cells.size(), target, {ModelKind::Mlp, n, cfg.mf_kind}});
  }
  for (const auto& target : cfg.targets) {
    for (auto k : cfg.sweep_mf_kinds) cells.push_back({cells.size(), target, {ModelKind::Anfis, cfg.neurons, k}});
  }
  for (auto& c : cells) c.seed = cfg.seed + c.index;

  std::map<std::string, dataset::Split> splits;
  for (const auto& target : cfg.targets) {
    splits.emplace(target, dataset::split_random(dataset::build_features(table, cfg.features, target), cfg.split, cfg.seed));
  }

  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        auto& c = cells[i];
        const auto o = fit_model(cfg, splits.at(c.target), c.target, c.choice, c.seed);
        c.train_rmse = o.train.rmse;
        c.test_rmse = o.test.rmse;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(cfg.threads, cells.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult res;
  res.cells = cells;
  const auto write = [&](const std::string& name, ModelKind kind, bool test_phase) {
    const auto path = out_path(cfg, name);
    csv::Writer out(path);
    out.row({"variable", kind == ModelKind::Mlp ? "neurons" : "mf_type", "rmse", "best"});
    for (const auto& target : cfg.targets) {
      std::vector<const SweepCell*> rows;
      for (const auto& c : cells) {
        if (c.target == target && c.choice.kind == kind) rows.push_back(&c);
      }
      const auto value = [&](const SweepCell* c) { return test_phase ? c->test_rmse : c->train_rmse; };
      const auto best = std::min_element(rows.begin(), rows.end(),
                                         [&](const SweepCell* a, const SweepCell* b) { return value(a) < value(b); });
      for (const auto* c : rows) {
        const std::string label =
            kind == ModelKind::Mlp ? std::to_string(c->choice.neurons) : std::string(to_string(c->choice.mf_kind));
        out.row({target, label, csv::format_number(value(c)), c == *best ? "1" : "0"});
      }
    }
    res.tables.push_back(path);
  };
  write(sweep_table_names()[0], ModelKind::Mlp, false);
  write(sweep_table_names()[1], ModelKind::Anfis, false);
  write(sweep_table_names()[2], ModelKind::Mlp, true);
  write(sweep_table_names()[3], ModelKind::Anfis, true);

  for (const auto& c : cells) {
    log << c.target << " " << (c.choice.kind == ModelKind::Mlp ? "mlp " + std::to_string(c.choice.neurons)
                                                               : "anfis " + std::string(to_string(c.choice.mf_kind)))
        << ": train RMSE " << csv::format_number(c.train_rmse) << ", test RMSE " << csv::format_number(c.test_rmse)
        << "\n";
  }
  for (const auto& t : res.tables) log << "table -> " << t << "\n";
  return res;
}

// ---------------------------------------------------------------- forecast

/// Recursive forecasts from autoregressive models, starting after the last
/// year in the data. Writes forecast.csv (long), forecast_table.csv (one
/// column per target) and forecast_plot.csv (history plus forecast).
inline std::vector<forecast::ForecastResult> run_forecast(const RunConfig& cfg,
                                                          const std::vector<std::string>& model_paths,
                                                          std::ostream& log) {
  cfg.validate();
  if (model_paths.empty()) throw InvalidArgument("forecast needs at least one model file");
  std::vector<forecast::ForecastResult> results;
  std::vector<std::pair<std::string, std::vector<double>>> histories;
  dataset::SeriesTable table;
  for (const auto& path : model_paths) {
    const auto tm = load_model(path);
    if (tm.features.kind != dataset::FeatureMode::Kind::Autoregressive) {
      throw Error(path + ": model was trained in exogenous mode; future exogenous inputs are unavailable, "
                         "retrain with 'features = autoregressive' to forecast");
    }
    RunConfig local = cfg;
    local.targets = {tm.target};
    table = load_table(local, {tm.target});
    const auto& history = table.at(tm.target);
    auto result = forecast::recursive_forecast(
        [&](std::span<const double> w) { return tm.predict_scaled(w); }, tm.scaler, history, table.years.back(),
        cfg.horizon, tm.target, tm.descriptor());
    if (result.out_of_range_inputs > 0) {
      log << "warning: " << tm.target << ": " << result.out_of_range_inputs
          << " scaled lag inputs fell outside the training range [0, 1]\n";
    }
    histories.emplace_back(tm.target, history);
    results.push_back(std::move(result));
  }

  forecast::write_forecast_csv(results, out_path(cfg, "forecast.csv"));
  forecast::write_forecast_table(results, out_path(cfg, "forecast_table.csv"));

  // Plot data: one actual and one forecast column per target, blanks where
  // a series has no value.
  std::map<int, std::vector<std::string>> plot_rows;
  const std::size_t width = 2 * results.size();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const int first_hist = results[i].rows.front().year - static_cast<int>(histories[i].second.size());
    for (std::size_t k = 0; k < histories[i].second.size(); ++k) {
      auto& row = plot_rows[first_hist + static_cast<int>(k)];
      row.resize(width);
      row[2 * i] = csv::format_number(histories[i].second[k]);
    }
    // The forecast line starts at the last actual value so the two connect.
    auto& joint = plot_rows[results[i].rows.front().year - 1];
    joint.resize(width);
    joint[2 * i + 1] = csv::format_number(histories[i].second.back());
    for (const auto& r : results[i].rows) {
      auto& row = plot_rows[r.year];
      row.resize(width);
      row[2 * i + 1] = csv::format_number(r.value);
    }
  }
  csv::Writer plot(out_path(cfg, "forecast_plot.csv"));
  std::vector<std::string> header{"year"};
  for (const auto& r : results) {
    header.push_back(r.target + "_actual");
    header.push_back(r.target + "_forecast");
  }
  plot.row(header);
  for (const auto& [year, cols] : plot_rows) {
    std::vector<std::string> row{std::to_string(year)};
    row.insert(row.end(), cols.begin(), cols.end());
    plot.row(row);
  }

  for (const auto& r : results) {
    log << r.target << " (" << r.model.kind << " " << r.model.mf_or_neurons << "): " << r.rows.front().year << " "
        << csv::format_number(r.rows.front().value) << " ... " << r.rows.back().year << " "
        << csv::format_number(r.rows.back().value) << "\n";
  }
  log << "forecast -> " << out_path(cfg, "forecast.csv") << "\n";
  return results;
}

// ---------------------------------------------------------------- plot

/// One SVG line chart per input CSV, written to <out>/<stem>.svg.
inline std::vector<std::string> plot(const RunConfig& cfg, const std::vector<std::string>& csv_paths,
                                     std::ostream& log) {
  if (csv_paths.empty()) throw InvalidArgument("plot needs at least one CSV file");
  std::vector<std::string> written;
  for (const auto& path : csv_paths) {
    const auto stem = fs::path(path).stem().string();
    const auto chart = svg::chart_from_csv(path, stem);
    const auto target = out_path(cfg, stem + ".svg");
    std::ofstream out(target, std::ios::binary);
    if (!out) throw Error("cannot write '" + target + "'");
    out << svg::render(chart);
    written.push_back(target);
    log << path << " -> " << target << " (" << chart.series.size() << " series)\n";
  }
  return written;
}

}  // namespace nfcast::commands
