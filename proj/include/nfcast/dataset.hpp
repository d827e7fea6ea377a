#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfcast/csv.hpp"
#include "nfcast/error.hpp"
#include "nfcast/rng.hpp"
#include "nfcast/types.hpp"

namespace nfcast::dataset {

// Series names used by the feature builders.
inline constexpr std::string_view kLiveAnimals = "live_animals";
inline constexpr std::string_view kAnimalsSlaughtered = "animals_slaughtered";
inline constexpr std::string_view kLivestockYield = "livestock_yield";
inline constexpr std::string_view kAgriYield = "agri_yield";
inline constexpr std::string_view kAgriLosses = "agri_losses";
inline constexpr std::string_view kLivestockProduction = "livestock_production";
inline constexpr std::string_view kAgriProduction = "agri_production";

/// Exogenous inputs in feature-column order.
inline const std::vector<std::string>& exogenous_inputs() {
  static const std::vector<std::string> names{std::string(kLiveAnimals), std::string(kAnimalsSlaughtered),
                                              std::string(kLivestockYield), std::string(kAgriYield),
                                              std::string(kAgriLosses)};
  return names;
}

/// Output series in target-column order.
inline const std::vector<std::string>& target_series() {
  static const std::vector<std::string> names{std::string(kLivestockProduction), std::string(kAgriProduction)};
  return names;
}

struct RawRecord {
  std::string area;
  std::string item;
  std::string element;
  int year = 0;
  double value = 0.0;
};

namespace detail {

inline std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

/// Parses FAOSTAT normalized bulk CSV text. Columns are located by header
/// name (case-insensitive), so extra columns and any column order are fine.
/// `source` only labels error messages.
inline std::vector<RawRecord> parse_records(std::string_view text, const std::string& source = "<input>") {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(source + ": empty file, expected a header row");

  static constexpr std::string_view kRequired[] = {"Area", "Item", "Element", "Year", "Value"};
  std::size_t col[5];
  const auto& header = rows.front().fields;
  for (std::size_t r = 0; r < 5; ++r) {
    const std::string want = detail::lower_trim(kRequired[r]);
    const auto it = std::find_if(header.begin(), header.end(),
                                 [&](const std::string& h) { return detail::lower_trim(h) == want; });
    if (it == header.end()) {
      throw Error(source + ": missing required column '" + std::string(kRequired[r]) + "'");
    }
    col[r] = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t needed = *std::max_element(std::begin(col), std::end(col)) + 1;

  std::vector<RawRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string where = source + ":" + std::to_string(row.line);
    if (row.fields.size() < needed) {
      throw Error(where + ": expected at least " + std::to_string(needed) + " fields, found " +
                  std::to_string(row.fields.size()));
    }
    RawRecord rec;
    rec.area = row.fields[col[0]];
    rec.item = row.fields[col[1]];
    rec.element = row.fields[col[2]];

    long long year = 0;
    if (!csv::parse_int(row.fields[col[3]], year) || year < 1000 || year > 3000) {
      throw Error(where + ": invalid Year '" + row.fields[col[3]] + "'");
    }
    rec.year = static_cast<int>(year);

    // FAOSTAT exports may carry thousands separators inside quoted values.
    std::string value = row.fields[col[4]];
    value.erase(std::remove(value.begin(), value.end(), ','), value.end());
    if (value.find_first_not_of(" \t") == std::string::npos) throw Error(where + ": empty Value");
    if (!csv::parse_double(value, rec.value) || !std::isfinite(rec.value)) {
      throw Error(where + ": non-numeric Value '" + row.fields[col[4]] + "'");
    }
    if (rec.value < 0.0) throw Error(where + ": negative Value '" + row.fields[col[4]] + "'");
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<RawRecord> parse_csv(const std::string& path) {
  return parse_records(csv::read_file(path), path);
}

/// Which records feed a named series: a FAOSTAT element, optionally
/// restricted to a list of items (empty = every item).
struct SeriesRule {
  std::string name;
  std::string element;
  std::vector<std::string> items;
};

enum class GapPolicy {
  Error,        // any missing interior year is an error
  Interpolate,  // single missing interior years are filled linearly
};

/// Yearly series sharing one contiguous year axis.
struct SeriesTable {
  std::vector<int> years;
  std::map<std::string, std::vector<double>> series;

  const std::vector<double>& at(const std::string& name) const {
    const auto it = series.find(name);
    if (it == series.end()) throw Error("series '" + name + "' is not in the table");
    return it->second;
  }
};

/// Sums record values per (series, year) over the allowed items. The year
/// axis is the overlap of the spans covered by every series; interior gaps
/// follow `gaps`.
inline SeriesTable aggregate(const std::vector<RawRecord>& records, std::span<const SeriesRule> rules,
                             GapPolicy gaps = GapPolicy::Error) {
  if (rules.empty()) throw InvalidArgument("aggregate needs at least one series rule");
  std::map<std::string, std::map<int, double>> sums;
  for (const auto& rule : rules) {
    if (sums.contains(rule.name)) throw InvalidArgument("series '" + rule.name + "' is defined twice");
    auto& per_year = sums[rule.name];
    const std::set<std::string> allowed(rule.items.begin(), rule.items.end());
    for (const auto& rec : records) {
      if (rec.element != rule.element) continue;
      if (!allowed.empty() && !allowed.contains(rec.item)) continue;
      per_year[rec.year] += rec.value;
    }
  }

  int first = std::numeric_limits<int>::min();
  int last = std::numeric_limits<int>::max();
  for (const auto& [name, per_year] : sums) {
    if (per_year.empty()) throw Error("series '" + name + "' matched no records");
    first = std::max(first, per_year.begin()->first);
    last = std::min(last, per_year.rbegin()->first);
  }
  if (first > last) throw Error("series do not share any common years");

  SeriesTable table;
  for (int y = first; y <= last; ++y) table.years.push_back(y);
  for (const auto& [name, per_year] : sums) {
    std::vector<double> values;
    values.reserve(table.years.size());
    for (int y : table.years) {
      if (const auto it = per_year.find(y); it != per_year.end()) {
        values.push_back(it->second);
        continue;
      }
      const auto prev = per_year.find(y - 1);
      const auto next = per_year.find(y + 1);
      if (gaps == GapPolicy::Interpolate && prev != per_year.end() && next != per_year.end()) {
        values.push_back(0.5 * (prev->second + next->second));
        continue;
      }
      throw Error("series '" + name + "' has no data for year " + std::to_string(y) +
                  (gaps == GapPolicy::Interpolate ? " (gap longer than one year)" : ""));
    }
    table.series.emplace(name, std::move(values));
  }
  return table;
}

/// Convenience form: element -> series name, one item filter shared by all.
inline SeriesTable aggregate(const std::vector<RawRecord>& records,
                             const std::map<std::string, std::string>& element_map,
                             const std::vector<std::string>& items, GapPolicy gaps = GapPolicy::Error) {
  if (element_map.empty()) throw InvalidArgument("element map is empty");
  std::vector<SeriesRule> rules;
  for (const auto& [element, name] : element_map) rules.push_back({name, element, items});
  return aggregate(records, rules, gaps);
}

inline void write_table_csv(const SeriesTable& table, const std::string& path) {
  csv::Writer out(path);
  std::vector<std::string> header{"year"};
  for (const auto& [name, values] : table.series) header.push_back(name);
  out.row(header);
  for (std::size_t i = 0; i < table.years.size(); ++i) {
    std::vector<std::string> row{std::to_string(table.years[i])};
    for (const auto& [name, values] : table.series) row.push_back(csv::format_number(values[i]));
    out.row(row);
  }
}

/// Reads a table written by write_table_csv.
inline SeriesTable read_table_csv(const std::string& path) {
  const auto rows = csv::parse_file(path);
  if (rows.empty() || rows.front().fields.empty() || rows.front().fields[0] != "year") {
    throw Error(path + ": not a series table (expected a 'year' column first)");
  }
  const auto& header = rows.front().fields;
  SeriesTable table;
  std::vector<std::vector<double>> cols(header.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    long long year = 0;
    if (f.size() != header.size() || !csv::parse_int(f[0], year)) {
      throw Error(path + ":" + std::to_string(rows[i].line) + ": malformed row");
    }
    if (!table.years.empty() && year != table.years.back() + 1) {
      throw Error(path + ":" + std::to_string(rows[i].line) + ": years must be consecutive");
    }
    table.years.push_back(static_cast<int>(year));
    for (std::size_t c = 1; c < f.size(); ++c) {
      double v = 0;
      if (!csv::parse_double(f[c], v)) throw Error(path + ":" + std::to_string(rows[i].line) + ": bad number");
      cols[c - 1].push_back(v);
    }
  }
  for (std::size_t c = 1; c < header.size(); ++c) table.series.emplace(header[c], std::move(cols[c - 1]));
  return table;
}

/// Year-stamped supervised samples.
struct SupervisedSet {
  std::vector<int> years;
  Matrix X;
  Matrix Y;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;

  std::size_t size() const { return years.size(); }

  Vector target(std::size_t col) const { return Y.col(static_cast<Eigen::Index>(col)); }

  std::size_t target_index(const std::string& name) const {
    const auto it = std::find(target_names.begin(), target_names.end(), name);
    if (it == target_names.end()) throw Error("target '" + name + "' is not in the supervised set");
    return static_cast<std::size_t>(it - target_names.begin());
  }

  SupervisedSet rows(const std::vector<std::size_t>& idx) const {
    SupervisedSet out;
    out.feature_names = feature_names;
    out.target_names = target_names;
    out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
    out.Y.resize(static_cast<Eigen::Index>(idx.size()), Y.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.years.push_back(years[idx[i]]);
      out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
      out.Y.row(static_cast<Eigen::Index>(i)) = Y.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
  }

  /// Same rows, one target column kept.
  SupervisedSet only_target(const std::string& name) const {
    const auto c = static_cast<Eigen::Index>(target_index(name));
    SupervisedSet out{years, X, Y.col(c), feature_names, {name}};
    return out;
  }
};

struct FeatureMode {
  enum class Kind { Exogenous, Autoregressive };
  Kind kind = Kind::Exogenous;
  std::size_t lags = 5;

  static FeatureMode exogenous() { return {Kind::Exogenous, 5}; }
  static FeatureMode autoregressive(std::size_t lags = 5) { return {Kind::Autoregressive, lags}; }
};

inline std::string_view to_string(FeatureMode::Kind k) {
  return k == FeatureMode::Kind::Exogenous ? "exogenous" : "autoregressive";
}

inline FeatureMode::Kind parse_feature_kind(std::string_view text) {
  if (text == "exogenous") return FeatureMode::Kind::Exogenous;
  if (text == "autoregressive") return FeatureMode::Kind::Autoregressive;
  throw InvalidArgument("unknown feature mode '" + std::string(text) + "' (expected exogenous or autoregressive)");
}

/// Per year t: the five exogenous series at t as inputs, the chosen
/// production series at t as targets.
inline SupervisedSet build_exogenous(const SeriesTable& table,
                                     const std::vector<std::string>& targets = target_series()) {
  const auto& inputs = exogenous_inputs();
  SupervisedSet set;
  set.years = table.years;
  set.feature_names = inputs;
  set.target_names = targets;
  const auto n = static_cast<Eigen::Index>(table.years.size());
  set.X.resize(n, static_cast<Eigen::Index>(inputs.size()));
  set.Y.resize(n, static_cast<Eigen::Index>(targets.size()));
  for (std::size_t c = 0; c < inputs.size(); ++c) {
    const auto& v = table.at(inputs[c]);
    for (Eigen::Index r = 0; r < n; ++r) set.X(r, static_cast<Eigen::Index>(c)) = v[static_cast<std::size_t>(r)];
  }
  for (std::size_t c = 0; c < targets.size(); ++c) {
    const auto& v = table.at(targets[c]);
    for (Eigen::Index r = 0; r < n; ++r) set.Y(r, static_cast<Eigen::Index>(c)) = v[static_cast<std::size_t>(r)];
  }
  if (!set.X.allFinite() || !set.Y.allFinite()) throw Error("supervised set contains non-finite values");
  return set;
}

/// Sliding windows over one series: inputs (s[t-lags], ..., s[t-1]), target s[t].
inline SupervisedSet build_autoregressive(std::span<const double> series, int first_year, const std::string& name,
                                          std::size_t lags) {
  if (lags < 1) throw InvalidArgument("autoregressive mode needs lags >= 1");
  if (series.size() < lags + 1) {
    throw Error("series '" + name + "' has " + std::to_string(series.size()) + " years; " +
                std::to_string(lags) + " lags need at least " + std::to_string(lags + 1));
  }
  SupervisedSet set;
  for (std::size_t l = lags; l >= 1; --l) set.feature_names.push_back(name + "_lag" + std::to_string(l));
  set.target_names = {name};
  const std::size_t n = series.size() - lags;
  set.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(lags));
  set.Y.resize(static_cast<Eigen::Index>(n), 1);
  for (std::size_t r = 0; r < n; ++r) {
    set.years.push_back(first_year + static_cast<int>(r + lags));
    for (std::size_t c = 0; c < lags; ++c) set.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = series[r + c];
    set.Y(static_cast<Eigen::Index>(r), 0) = series[r + lags];
  }
  if (!set.X.allFinite() || !set.Y.allFinite()) throw Error("supervised set contains non-finite values");
  return set;
}

inline SupervisedSet build_autoregressive(const SeriesTable& table, const std::string& target, std::size_t lags) {
  if (table.years.empty()) throw Error("series table is empty");
  return build_autoregressive(table.at(target), table.years.front(), target, lags);
}

/// Single-target set for `target` under either feature mode.
inline SupervisedSet build_features(const SeriesTable& table, const FeatureMode& mode, const std::string& target) {
  if (mode.kind == FeatureMode::Kind::Exogenous) return build_exogenous(table, {target});
  return build_autoregressive(table, target, mode.lags);
}

inline void write_set_csv(const SupervisedSet& set, const std::string& path) {
  csv::Writer out(path);
  std::vector<std::string> header{"year"};
  header.insert(header.end(), set.feature_names.begin(), set.feature_names.end());
  header.insert(header.end(), set.target_names.begin(), set.target_names.end());
  out.row(header);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<std::string> row{std::to_string(set.years[i])};
    for (Eigen::Index c = 0; c < set.X.cols(); ++c) row.push_back(csv::format_number(set.X(r, c)));
    for (Eigen::Index c = 0; c < set.Y.cols(); ++c) row.push_back(csv::format_number(set.Y(r, c)));
    out.row(row);
  }
}

struct Split {
  SupervisedSet train;
  SupervisedSet test;
  std::vector<std::size_t> train_rows;  // ascending row indices into the source set
  std::vector<std::size_t> test_rows;
};

/// Seeded random partition; round(ratio * N) rows go to training. Each side
/// keeps the source's chronological order.
inline Split split_random(const SupervisedSet& set, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("split ratio must lie strictly between 0 and 1");
  const std::size_t n = set.size();
  if (n < 2) throw InvalidArgument("split needs at least 2 rows");
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw InvalidArgument("split ratio " + csv::format_number(ratio) + " leaves an empty side for " +
                          std::to_string(n) + " rows");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  Split out;
  out.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = set.rows(out.train_rows);
  out.test = set.rows(out.test_rows);
  return out;
}

/// Per-column min-max scaling to [0, 1]. Constant columns map to 0.5.
class Scaler {
 public:
  Scaler() = default;
  Scaler(std::vector<double> mins, std::vector<double> maxs) : min_(std::move(mins)), max_(std::move(maxs)) {
    if (min_.size() != max_.size()) throw InvalidArgument("scaler min/max length mismatch");
    for (std::size_t c = 0; c < min_.size(); ++c) {
      if (!std::isfinite(min_[c]) || !std::isfinite(max_[c]) || max_[c] < min_[c]) {
        throw InvalidArgument("scaler column " + std::to_string(c) + " needs finite min <= max");
      }
    }
  }

  static Scaler fit(const Matrix& m) {
    if (m.rows() < 1) throw InvalidArgument("cannot fit a scaler on zero rows");
    if (!m.allFinite()) throw InvalidArgument("cannot fit a scaler on non-finite values");
    std::vector<double> lo(static_cast<std::size_t>(m.cols())), hi(lo.size());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      lo[static_cast<std::size_t>(c)] = m.col(c).minCoeff();
      hi[static_cast<std::size_t>(c)] = m.col(c).maxCoeff();
    }
    return Scaler(std::move(lo), std::move(hi));
  }

  std::size_t columns() const { return min_.size(); }
  const std::vector<double>& mins() const { return min_; }
  const std::vector<double>& maxs() const { return max_; }

  double transform_value(std::size_t col, double v) const {
    if (!std::isfinite(v)) throw InvalidArgument("cannot scale a non-finite value");
    const double range = max_.at(col) - min_[col];
    return range == 0.0 ? 0.5 : (v - min_[col]) / range;
  }

  double inverse_value(std::size_t col, double s) const {
    if (!std::isfinite(s)) throw InvalidArgument("cannot unscale a non-finite value");
    const double range = max_.at(col) - min_[col];
    return range == 0.0 ? min_[col] : min_[col] + s * range;
  }

  Matrix transform(const Matrix& m) const { return apply(m, &Scaler::transform_value); }
  Matrix inverse_transform(const Matrix& m) const { return apply(m, &Scaler::inverse_value); }

  friend bool operator==(const Scaler&, const Scaler&) = default;

 private:
  Matrix apply(const Matrix& m, double (Scaler::*fn)(std::size_t, double) const) const {
    if (static_cast<std::size_t>(m.cols()) != columns()) {
      throw InvalidArgument("scaler fitted on " + std::to_string(columns()) + " columns, got " +
                            std::to_string(m.cols()));
    }
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = (this->*fn)(static_cast<std::size_t>(c), m(r, c));
    }
    return out;
  }

  std::vector<double> min_;
  std::vector<double> max_;
};

/// Feature and target scalers, both fitted on training rows only.
struct SetScaler {
  Scaler features;
  Scaler targets;

  friend bool operator==(const SetScaler&, const SetScaler&) = default;
};

inline SetScaler fit_scaler(const SupervisedSet& train) {
  return SetScaler{Scaler::fit(train.X), Scaler::fit(train.Y)};
}

}  // namespace nfcast::dataset
