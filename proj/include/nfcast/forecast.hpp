#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nfcast/csv.hpp"
#include "nfcast/dataset.hpp"
#include "nfcast/error.hpp"

namespace nfcast::forecast {

/// Identifies the model behind a forecast in emitted tables.
struct ModelDescriptor {
  std::string kind;           // "anfis" or "mlp"
  std::string mf_or_neurons;  // membership kind or hidden neuron count
  std::uint64_t seed = 0;
};

struct ForecastRow {
  int year = 0;
  double value = 0.0;  // original units
};

struct ForecastResult {
  std::string target;
  std::vector<ForecastRow> rows;
  ModelDescriptor model;
  // Scaled lag inputs that fell outside [0, 1]; they are passed through.
  std::size_t out_of_range_inputs = 0;
};

/// Iterated one-step forecasting. Each step scales the trailing lag window
/// with the feature scaler, predicts one scaled value, maps it back through
/// target column 0 of the target scaler, and appends it to the window.
///
/// `predict` maps a scaled window (oldest lag first) to a scaled prediction.
/// `last_year` is the year of history.back().
template <class Predict>
  requires std::invocable<const Predict&, std::span<const double>>
ForecastResult recursive_forecast(const Predict& predict, const dataset::SetScaler& scaler,
                                  std::span<const double> history, int last_year, std::size_t horizon,
                                  std::string target, ModelDescriptor model = {}) {
  const std::size_t lags = scaler.features.columns();
  if (lags < 1) throw InvalidArgument("forecast scaler has no feature columns");
  if (scaler.targets.columns() < 1) throw InvalidArgument("forecast scaler has no target column");
  if (horizon < 1) throw InvalidArgument("forecast horizon must be >= 1");
  if (history.size() < lags) {
    throw InvalidArgument("forecast needs at least " + std::to_string(lags) + " history values, got " +
                          std::to_string(history.size()));
  }

  ForecastResult result;
  result.target = std::move(target);
  result.model = std::move(model);
  std::vector<double> series(history.end() - static_cast<std::ptrdiff_t>(lags), history.end());
  std::vector<double> window(lags);
  for (std::size_t step = 0; step < horizon; ++step) {
    const std::size_t base = series.size() - lags;
    for (std::size_t c = 0; c < lags; ++c) {
      window[c] = scaler.features.transform_value(c, series[base + c]);
      if (window[c] < 0.0 || window[c] > 1.0) ++result.out_of_range_inputs;
    }
    const double scaled = predict(std::span<const double>(window));
    if (!std::isfinite(scaled)) {
      throw Error("forecast for '" + result.target + "' became non-finite at step " + std::to_string(step + 1));
    }
    const double value = scaler.targets.inverse_value(0, scaled);
    series.push_back(value);
    result.rows.push_back({last_year + static_cast<int>(step) + 1, value});
  }
  return result;
}

/// Long format: year,target,value,model,mf_or_neurons,seed
inline void write_forecast_csv(const std::vector<ForecastResult>& results, const std::string& path) {
  csv::Writer out(path);
  out.row({"year", "target", "value", "model", "mf_or_neurons", "seed"});
  for (const auto& r : results) {
    for (const auto& row : r.rows) {
      out.row({std::to_string(row.year), r.target, csv::format_number(row.value), r.model.kind,
               r.model.mf_or_neurons, std::to_string(r.model.seed)});
    }
  }
}

/// Wide format, one column per target: year,<target>...
/// All results must cover the same years.
inline void write_forecast_table(const std::vector<ForecastResult>& results, const std::string& path) {
  if (results.empty()) throw InvalidArgument("no forecasts to write");
  std::vector<std::string> header{"year"};
  for (const auto& r : results) {
    if (r.rows.size() != results.front().rows.size()) throw InvalidArgument("forecasts differ in horizon");
    header.push_back(r.target);
  }
  csv::Writer out(path);
  out.row(header);
  for (std::size_t i = 0; i < results.front().rows.size(); ++i) {
    std::vector<std::string> row{std::to_string(results.front().rows[i].year)};
    for (const auto& r : results) {
      if (r.rows[i].year != results.front().rows[i].year) throw InvalidArgument("forecasts differ in years");
      row.push_back(csv::format_number(r.rows[i].value));
    }
    out.row(row);
  }
}

}  // namespace nfcast::forecast
