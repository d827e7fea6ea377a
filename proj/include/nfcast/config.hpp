#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nfcast/anfis.hpp"
#include "nfcast/csv.hpp"
#include "nfcast/dataset.hpp"
#include "nfcast/error.hpp"
#include "nfcast/membership.hpp"
#include "nfcast/mlp.hpp"

namespace nfcast {

enum class ModelKind { Anfis, Mlp };

inline ModelKind parse_model_kind(std::string_view text) {
  if (text == "anfis") return ModelKind::Anfis;
  if (text == "mlp") return ModelKind::Mlp;
  throw InvalidArgument("unknown model '" + std::string(text) + "' (expected anfis or mlp)");
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto piece = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& value) {
  double v = 0;
  if (!csv::parse_double(value, v)) throw InvalidArgument("config key '" + key + "': expected a number, got '" + value + "'");
  return v;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& value) {
  long long v = 0;
  if (!csv::parse_int(value, v) || v < 0) {
    throw InvalidArgument("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

/// Every setting of a run. Loaded from `key = value` text (with `#`
/// comments) and overridable key by key from the command line.
struct RunConfig {
  std::string data = "data/sample_faostat.csv";
  std::map<std::string, dataset::SeriesRule> series = default_series();
  dataset::GapPolicy gap_policy = dataset::GapPolicy::Error;
  dataset::FeatureMode features = dataset::FeatureMode::exogenous();
  std::vector<std::string> targets = dataset::target_series();
  double split = 0.7;
  std::uint64_t seed = 42;

  ModelKind model = ModelKind::Anfis;
  std::optional<std::size_t> epochs;    // model default when unset
  std::optional<double> learning_rate;  // model default when unset

  std::size_t neurons = 10;
  mlp::Activation activation = mlp::Activation::Tanh;
  double init_scale = 0.5;

  MfKind mf_kind = MfKind::GBell;
  std::size_t mfs_per_input = 2;
  std::size_t rule_cap = 1024;

  std::vector<std::size_t> sweep_neurons{10, 14, 18};
  std::vector<MfKind> sweep_mf_kinds{MfKind::Triangular, MfKind::Trapezoidal, MfKind::GBell};

  std::size_t horizon = 13;
  std::string out = "out";
  std::size_t threads = 1;

  /// Series definitions matching the FAOSTAT element names of the bundled
  /// sample file.
  static std::map<std::string, dataset::SeriesRule> default_series() {
    const std::vector<std::string> crops{"Wheat", "Barley", "Rice", "Maize", "Potatoes"};
    const std::vector<std::string> meat{"Meat, cattle", "Meat, sheep", "Meat, chicken"};
    std::vector<std::string> livestock_products = meat;
    livestock_products.push_back("Milk, whole fresh cow");
    std::map<std::string, dataset::SeriesRule> m;
    const auto add = [&](std::string_view name, std::string element, std::vector<std::string> items) {
      m[std::string(name)] = dataset::SeriesRule{std::string(name), std::move(element), std::move(items)};
    };
    add(dataset::kLiveAnimals, "Stocks", {});
    add(dataset::kAnimalsSlaughtered, "Producing Animals/Slaughtered", {});
    add(dataset::kLivestockYield, "Yield", meat);
    add(dataset::kAgriYield, "Yield", crops);
    add(dataset::kAgriLosses, "Loss", crops);
    add(dataset::kLivestockProduction, "Production", livestock_products);
    add(dataset::kAgriProduction, "Production", crops);
    return m;
  }

  /// Keys accepted by set(); CLI flags are generated from this list.
  std::vector<std::string> keys() const {
    std::vector<std::string> k{"data",         "gap_policy", "features",   "lags",          "targets",
                               "split",        "seed",       "model",      "epochs",        "learning_rate",
                               "neurons",      "activation", "init_scale", "mf_kind",       "mfs_per_input",
                               "rule_cap",     "sweep_neurons", "sweep_mf_kinds", "horizon", "out",
                               "threads"};
    for (const auto& name : series_names()) {
      k.push_back("series." + name);
      k.push_back("items." + name);
    }
    return k;
  }

  static std::vector<std::string> series_names() {
    std::vector<std::string> names = dataset::exogenous_inputs();
    for (const auto& t : dataset::target_series()) names.push_back(t);
    return names;
  }

  void set(const std::string& key, const std::string& raw) {
    const std::string value = detail::trim(raw);
    if (key == "data") data = value;
    else if (key == "gap_policy") {
      if (value == "error") gap_policy = dataset::GapPolicy::Error;
      else if (value == "interpolate") gap_policy = dataset::GapPolicy::Interpolate;
      else throw InvalidArgument("gap_policy must be 'error' or 'interpolate'");
    } else if (key == "features") features.kind = dataset::parse_feature_kind(value);
    else if (key == "lags") features.lags = detail::to_uint(key, value);
    else if (key == "targets") targets = detail::split_list(value, ',');
    else if (key == "split") split = detail::to_double(key, value);
    else if (key == "seed") seed = detail::to_uint(key, value);
    else if (key == "model") model = parse_model_kind(value);
    else if (key == "epochs") epochs = detail::to_uint(key, value);
    else if (key == "learning_rate") learning_rate = detail::to_double(key, value);
    else if (key == "neurons") neurons = detail::to_uint(key, value);
    else if (key == "activation") activation = mlp::parse_activation(value);
    else if (key == "init_scale") init_scale = detail::to_double(key, value);
    else if (key == "mf_kind") mf_kind = parse_mf_kind(value);
    else if (key == "mfs_per_input") mfs_per_input = detail::to_uint(key, value);
    else if (key == "rule_cap") rule_cap = detail::to_uint(key, value);
    else if (key == "sweep_neurons") {
      sweep_neurons.clear();
      for (const auto& v : detail::split_list(value, ',')) sweep_neurons.push_back(detail::to_uint(key, v));
    } else if (key == "sweep_mf_kinds") {
      sweep_mf_kinds.clear();
      for (const auto& v : detail::split_list(value, ',')) sweep_mf_kinds.push_back(parse_mf_kind(v));
    } else if (key == "horizon") horizon = detail::to_uint(key, value);
    else if (key == "out") out = value;
    else if (key == "threads") threads = detail::to_uint(key, value);
    else if (key.starts_with("series.") || key.starts_with("items.")) {
      const bool is_series = key.starts_with("series.");
      const std::string name = key.substr(is_series ? 7 : 6);
      auto& rule = series[name];
      rule.name = name;
      if (is_series) rule.element = value;
      else rule.items = detail::split_list(value, ';');
    } else {
      throw InvalidArgument("unknown config key '" + key + "'");
    }
  }

  /// Applies `key = value` lines. Blank lines and `#` comments are ignored.
  void load_text(std::string_view text, const std::string& source = "<config>") {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string t = detail::trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw InvalidArgument(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      try {
        set(detail::trim(t.substr(0, eq)), t.substr(eq + 1));
      } catch (const InvalidArgument& e) {
        throw InvalidArgument(source + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  void load_file(const std::string& path) { load_text(csv::read_file(path), path); }

  std::vector<dataset::SeriesRule> series_rules() const {
    std::vector<dataset::SeriesRule> rules;
    for (const auto& [name, rule] : series) rules.push_back(rule);
    return rules;
  }

  anfis::AnfisConfig anfis_config(std::size_t n_inputs, MfKind kind, std::uint64_t model_seed) const {
    anfis::AnfisConfig c;
    c.n_inputs = n_inputs;
    c.mfs_per_input = mfs_per_input;
    c.mf_kind = kind;
    c.epochs = epochs.value_or(c.epochs);
    c.learning_rate = learning_rate.value_or(c.learning_rate);
    c.seed = model_seed;
    c.rule_cap = rule_cap;
    return c;
  }

  mlp::MlpTrainConfig mlp_config(std::size_t hidden, std::uint64_t model_seed) const {
    mlp::MlpTrainConfig c;
    c.hidden_neurons = hidden;
    c.epochs = epochs.value_or(c.epochs);
    c.learning_rate = learning_rate.value_or(c.learning_rate);
    c.seed = model_seed;
    c.init_scale = init_scale;
    c.activation = activation;
    return c;
  }

  /// Checks every module precondition that can be checked without data.
  void validate() const {
    if (data.empty()) throw InvalidArgument("data path is empty");
    if (!(split > 0.0 && split < 1.0)) throw InvalidArgument("split must lie strictly between 0 and 1");
    if (features.kind == dataset::FeatureMode::Kind::Autoregressive && features.lags < 1) {
      throw InvalidArgument("lags must be >= 1");
    }
    if (targets.empty()) throw InvalidArgument("no targets configured");
    for (const auto& t : targets) {
      if (!series.contains(t)) throw InvalidArgument("target '" + t + "' has no series definition");
    }
    for (const auto& [name, rule] : series) {
      if (rule.element.empty()) throw InvalidArgument("series '" + name + "' has no element");
    }
    if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
    if (sweep_neurons.empty() || sweep_mf_kinds.empty()) throw InvalidArgument("sweep grids must be non-empty");
    const std::size_t n_inputs =
        features.kind == dataset::FeatureMode::Kind::Exogenous ? dataset::exogenous_inputs().size() : features.lags;
    anfis_config(n_inputs, mf_kind, seed).validate();
    mlp_config(neurons, seed).validate();
    for (auto n : sweep_neurons) mlp_config(n, seed).validate();
  }
};

}  // namespace nfcast
