#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "nfcast/error.hpp"

namespace nfcast::metrics {

namespace detail {

inline void check_pair(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.empty()) throw InvalidArgument("metric needs at least one sample");
  if (actual.size() != predicted.size()) {
    throw InvalidArgument("metric length mismatch: " + std::to_string(actual.size()) + " targets vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
}

inline double sse(std::span<const double> actual, std::span<const double> predicted) {
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

/// Root mean square error, sqrt(sum((A - P)^2) / N).
inline double rmse(std::span<const double> actual, std::span<const double> predicted) {
  detail::check_pair(actual, predicted);
  return std::sqrt(detail::sse(actual, predicted) / static_cast<double>(actual.size()));
}

/// Uncentered coefficient of determination, 1 - sum((A - P)^2) / sum(A^2).
/// Not the textbook R^2; see r2_standard.
inline double r2_paper(std::span<const double> actual, std::span<const double> predicted) {
  detail::check_pair(actual, predicted);
  double energy = 0.0;
  for (double a : actual) energy += a * a;
  if (energy == 0.0) throw InvalidArgument("r2_paper undefined: all targets are zero");
  return 1.0 - detail::sse(actual, predicted) / energy;
}

/// Conventional coefficient of determination, 1 - SSE / sum((A - mean(A))^2).
inline double r2_standard(std::span<const double> actual, std::span<const double> predicted) {
  detail::check_pair(actual, predicted);
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double ss_tot = 0.0;
  for (double a : actual) ss_tot += (a - mean) * (a - mean);
  if (ss_tot == 0.0) throw InvalidArgument("r2_standard undefined: targets have zero variance");
  return 1.0 - detail::sse(actual, predicted) / ss_tot;
}

/// Accuracy of one model on one target and phase.
struct EvalEntry {
  std::string target;
  std::string phase;  // "train" or "test"
  std::size_t n = 0;
  double rmse = 0.0;
  double r2_paper = 0.0;
  double r2_standard = 0.0;  // NaN when the targets have zero variance
};

inline EvalEntry evaluate(std::string target, std::string phase, std::span<const double> actual,
                          std::span<const double> predicted) {
  EvalEntry e;
  e.target = std::move(target);
  e.phase = std::move(phase);
  e.n = actual.size();
  e.rmse = rmse(actual, predicted);
  e.r2_paper = r2_paper(actual, predicted);
  try {
    e.r2_standard = r2_standard(actual, predicted);
  } catch (const InvalidArgument&) {
    e.r2_standard = std::nan("");
  }
  return e;
}

}  // namespace nfcast::metrics
