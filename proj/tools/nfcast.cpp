// nfcast: neuro-fuzzy and MLP forecasting of yearly production series.
//
//   nfcast ingest   [--config FILE] [--key value ...]
//   nfcast train    [--config FILE] [--key value ...]
//   nfcast evaluate [--config FILE] MODEL.json...
//   nfcast sweep    [--config FILE]
//   nfcast forecast [--config FILE] [--horizon N] MODEL.json...
//   nfcast plot     [--out DIR] FILE.csv...
//
// Every config key can be given as a flag of the same name.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfcast/commands.hpp"

namespace {

struct Options {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> files;
};

void add_config_flags(CLI::App& cmd, Options& opts, const nfcast::RunConfig& defaults) {
  cmd.add_option("--config", opts.config_path, "key = value settings file")->check(CLI::ExistingFile);
  for (const auto& key : defaults.keys()) {
    cmd.add_option_function<std::string>(
        "--" + key, [&opts, key](const std::string& v) { opts.overrides[key] = v; },
        "override config key '" + key + "'");
  }
}

nfcast::RunConfig resolve(const Options& opts) {
  nfcast::RunConfig cfg;
  if (!opts.config_path.empty()) cfg.load_file(opts.config_path);
  for (const auto& [key, value] : opts.overrides) cfg.set(key, value);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuro-fuzzy (ANFIS) and MLP forecasting of yearly production series"};
  app.require_subcommand(1);
  const nfcast::RunConfig defaults;

  Options opts;
  auto* ingest = app.add_subcommand("ingest", "aggregate a FAOSTAT CSV into yearly series");
  auto* train = app.add_subcommand("train", "train one model per target on the seeded split");
  auto* evaluate = app.add_subcommand("evaluate", "score saved models on their train and test rows");
  auto* sweep = app.add_subcommand("sweep", "MLP neuron and ANFIS membership-kind comparison tables");
  auto* forecast = app.add_subcommand("forecast", "recursive multi-year forecast from autoregressive models");
  auto* plot = app.add_subcommand("plot", "render CSV reports as SVG line charts");
  for (auto* cmd : {ingest, train, evaluate, sweep, forecast, plot}) add_config_flags(*cmd, opts, defaults);
  evaluate->add_option("models", opts.files, "model files")->required()->check(CLI::ExistingFile);
  forecast->add_option("models", opts.files, "model files")->required()->check(CLI::ExistingFile);
  plot->add_option("csv", opts.files, "CSV files")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const auto cfg = resolve(opts);
    auto& log = std::cout;
    if (ingest->parsed()) nfcast::commands::ingest(cfg, log);
    if (train->parsed()) nfcast::commands::train(cfg, log);
    if (evaluate->parsed()) nfcast::commands::evaluate(cfg, opts.files, log);
    if (sweep->parsed()) nfcast::commands::sweep(cfg, log);
    if (forecast->parsed()) nfcast::commands::run_forecast(cfg, opts.files, log);
    if (plot->parsed()) nfcast::commands::plot(cfg, opts.files, log);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
