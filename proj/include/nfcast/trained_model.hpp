#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nfcast/anfis.hpp"
#include "nfcast/dataset.hpp"
#include "nfcast/error.hpp"
#include "nfcast/forecast.hpp"
#include "nfcast/mlp.hpp"

namespace nfcast {

inline constexpr std::string_view kModelFormat = "nfcast-model";
inline constexpr int kModelFormatVersion = 1;

/// A fitted single-target model together with everything needed to apply it
/// to raw data again: feature mode, split settings and scalers.
struct TrainedModel {
  std::string target;
  dataset::FeatureMode features;
  std::vector<std::string> feature_names;
  double split_ratio = 0.7;
  std::uint64_t split_seed = 0;
  std::uint64_t model_seed = 0;
  dataset::SetScaler scaler;
  std::variant<anfis::AnfisModel, mlp::MlpModel> model;

  bool is_anfis() const { return std::holds_alternative<anfis::AnfisModel>(model); }

  std::string kind() const { return is_anfis() ? "anfis" : "mlp"; }

  /// Membership kind for ANFIS, hidden neuron count for MLP.
  std::string variant_label() const {
    if (is_anfis()) return std::string(to_string(std::get<anfis::AnfisModel>(model).config().mf_kind));
    return std::to_string(std::get<mlp::MlpModel>(model).n_hidden());
  }

  forecast::ModelDescriptor descriptor() const { return {kind(), variant_label(), model_seed}; }

  /// Prediction on scaled features, in scaled target units.
  double predict_scaled(std::span<const double> x) const {
    return std::visit([&](const auto& m) { return m.forward(x); }, model);
  }

  Vector predict_scaled(const Matrix& X) const {
    return std::visit(
        [&](const auto& m) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, anfis::AnfisModel>) {
            return anfis::predict_batch(m, X);
          } else {
            return mlp::predict_batch(m, X);
          }
        },
        model);
  }

  /// Raw features in, prediction in original target units out.
  Vector predict(const Matrix& raw_features) const {
    const Vector scaled = predict_scaled(scaler.features.transform(raw_features));
    Vector out(scaled.size());
    for (Eigen::Index i = 0; i < scaled.size(); ++i) out[i] = scaler.targets.inverse_value(0, scaled[i]);
    return out;
  }
};

namespace detail {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(std::string("model file: '") + what + "' must be a non-empty array");
  const auto cols = j.front().size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != cols) throw Error(std::string("model file: ragged matrix '") + what + "'");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline json scaler_to_json(const dataset::Scaler& s) { return {{"min", s.mins()}, {"max", s.maxs()}}; }

inline dataset::Scaler scaler_from_json(const json& j) {
  return dataset::Scaler(j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>());
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedModel& tm) {
  using detail::json;
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["kind"] = tm.kind();
  j["target"] = tm.target;
  j["features"] = {{"mode", dataset::to_string(tm.features.kind)},
                   {"lags", tm.features.lags},
                   {"names", tm.feature_names}};
  j["split"] = {{"ratio", tm.split_ratio}, {"seed", tm.split_seed}};
  j["seed"] = tm.model_seed;
  j["scaler"] = {{"features", detail::scaler_to_json(tm.scaler.features)},
                 {"targets", detail::scaler_to_json(tm.scaler.targets)}};
  if (tm.is_anfis()) {
    const auto& m = std::get<anfis::AnfisModel>(tm.model);
    const auto& c = m.config();
    json premise = json::array();
    for (const auto& set : m.premise()) {
      json mfs = json::array();
      for (const auto& mf : set) {
        mfs.push_back({{"kind", to_string(mf.kind())},
                       {"params", std::vector<double>(mf.params().begin(), mf.params().end())}});
      }
      premise.push_back(std::move(mfs));
    }
    j["anfis"] = {{"config",
                   {{"n_inputs", c.n_inputs},
                    {"mfs_per_input", c.mfs_per_input},
                    {"mf_kind", to_string(c.mf_kind)},
                    {"epochs", c.epochs},
                    {"learning_rate", c.learning_rate},
                    {"seed", c.seed},
                    {"rule_cap", c.rule_cap},
                    {"domain_min", c.domain_min},
                    {"domain_max", c.domain_max}}},
                  {"premise", std::move(premise)},
                  {"consequents", detail::matrix_to_json(m.consequents())}};
  } else {
    const auto& m = std::get<mlp::MlpModel>(tm.model);
    j["mlp"] = {{"layer_sizes", m.layer_sizes()},
                {"activation", mlp::to_string(m.activation())},
                {"hidden_weights", detail::matrix_to_json(m.hidden_weights())},
                {"hidden_bias", detail::vector_to_json(m.hidden_bias())},
                {"output_weights", detail::vector_to_json(m.output_weights())},
                {"output_bias", m.output_bias()}};
  }
  return j;
}

inline TrainedModel from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != kModelFormat) throw Error("not an nfcast model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("unsupported model file version " + std::to_string(version) + " (expected " +
                  std::to_string(kModelFormatVersion) + ")");
    }
    const auto& f = j.at("features");
    dataset::FeatureMode mode{dataset::parse_feature_kind(f.at("mode").get<std::string>()),
                              f.at("lags").get<std::size_t>()};
    const dataset::SetScaler scaler{detail::scaler_from_json(j.at("scaler").at("features")),
                                    detail::scaler_from_json(j.at("scaler").at("targets"))};
    const auto kind = j.at("kind").get<std::string>();

    auto build = [&](std::variant<anfis::AnfisModel, mlp::MlpModel> model) {
      return TrainedModel{j.at("target").get<std::string>(),
                          mode,
                          f.at("names").get<std::vector<std::string>>(),
                          j.at("split").at("ratio").get<double>(),
                          j.at("split").at("seed").get<std::uint64_t>(),
                          j.at("seed").get<std::uint64_t>(),
                          scaler,
                          std::move(model)};
    };

    if (kind == "anfis") {
      const auto& a = j.at("anfis");
      const auto& c = a.at("config");
      anfis::AnfisConfig cfg;
      cfg.n_inputs = c.at("n_inputs").get<std::size_t>();
      cfg.mfs_per_input = c.at("mfs_per_input").get<std::size_t>();
      cfg.mf_kind = parse_mf_kind(c.at("mf_kind").get<std::string>());
      cfg.epochs = c.at("epochs").get<std::size_t>();
      cfg.learning_rate = c.at("learning_rate").get<double>();
      cfg.seed = c.at("seed").get<std::uint64_t>();
      cfg.rule_cap = c.at("rule_cap").get<std::size_t>();
      cfg.domain_min = c.at("domain_min").get<double>();
      cfg.domain_max = c.at("domain_max").get<double>();
      std::vector<std::vector<MembershipFunction>> premise;
      for (const auto& set : a.at("premise")) {
        std::vector<MembershipFunction> mfs;
        for (const auto& mf : set) {
          const auto params = mf.at("params").get<std::vector<double>>();
          mfs.emplace_back(parse_mf_kind(mf.at("kind").get<std::string>()), std::span<const double>(params));
        }
        premise.push_back(std::move(mfs));
      }
      return build(anfis::AnfisModel(cfg, std::move(premise), detail::matrix_from_json(a.at("consequents"), "consequents")));
    }
    if (kind == "mlp") {
      const auto& m = j.at("mlp");
      return build(mlp::MlpModel(detail::matrix_from_json(m.at("hidden_weights"), "hidden_weights"),
                                 detail::vector_from_json(m.at("hidden_bias")),
                                 detail::vector_from_json(m.at("output_weights")), m.at("output_bias").get<double>(),
                                 mlp::parse_activation(m.at("activation").get<std::string>())));
    }
    throw Error("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const TrainedModel& tm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_json(tm).dump(2) << '\n';
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace nfcast
