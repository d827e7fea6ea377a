#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nfcast/error.hpp"

namespace nfcast {

enum class MfKind { Triangular, Trapezoidal, GBell };

inline std::string_view to_string(MfKind kind) {
  switch (kind) {
    case MfKind::Triangular: return "triangular";
    case MfKind::Trapezoidal: return "trapezoidal";
    case MfKind::GBell: return "gbell";
  }
  return "unknown";
}

inline MfKind parse_mf_kind(std::string_view text) {
  if (text == "triangular" || text == "tri") return MfKind::Triangular;
  if (text == "trapezoidal" || text == "trap") return MfKind::Trapezoidal;
  if (text == "gbell" || text == "bell") return MfKind::GBell;
  throw InvalidArgument("unknown membership function kind '" + std::string(text) +
                        "' (expected triangular, trapezoidal or gbell)");
}

/// Number of shape parameters for each kind.
constexpr std::size_t param_count(MfKind kind) { return kind == MfKind::Trapezoidal ? 4 : 3; }

/// Lower bound kept on the GBell width and slope during training.
inline constexpr double kGBellMinParam = 1e-6;

/// One fuzzy set.
///
/// Parameter layout:
///   Triangular   (l, m, r)     with l <= m <= r
///   Trapezoidal  (a, b, c, d)  with a <= b <= c <= d
///   GBell        (a, b, c)     width a > 0, slope b > 0, center c;
///                              mu(x) = 1 / (1 + |(x - c) / a|^(2b))
///
/// Values are immutable; training produces new instances through repaired().
class MembershipFunction {
 public:
  static MembershipFunction triangular(double l, double m, double r) {
    return MembershipFunction(MfKind::Triangular, {l, m, r});
  }
  static MembershipFunction trapezoidal(double a, double b, double c, double d) {
    return MembershipFunction(MfKind::Trapezoidal, {a, b, c, d});
  }
  static MembershipFunction gbell(double a, double b, double c) {
    return MembershipFunction(MfKind::GBell, {a, b, c});
  }

  /// Validating constructor from a parameter list.
  MembershipFunction(MfKind kind, std::span<const double> params) : kind_(kind) {
    if (params.size() != param_count(kind)) {
      throw InvalidArgument(std::string(to_string(kind)) + " membership function takes " +
                            std::to_string(param_count(kind)) + " parameters, got " +
                            std::to_string(params.size()));
    }
    std::copy(params.begin(), params.end(), params_.begin());
    validate();
  }
  MembershipFunction(MfKind kind, std::initializer_list<double> params)
      : MembershipFunction(kind, std::span<const double>(params.begin(), params.size())) {}

  /// Builds a valid function from raw (possibly violating) parameters:
  /// GBell width and slope are clamped to kGBellMinParam, piecewise-linear
  /// parameters are sorted.
  static MembershipFunction repaired(MfKind kind, std::span<const double> params) {
    std::array<double, 4> p{};
    if (params.size() != param_count(kind)) {
      throw InvalidArgument("wrong parameter count for " + std::string(to_string(kind)));
    }
    std::copy(params.begin(), params.end(), p.begin());
    if (kind == MfKind::GBell) {
      p[0] = std::max(p[0], kGBellMinParam);
      p[1] = std::max(p[1], kGBellMinParam);
    } else {
      std::sort(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(param_count(kind)));
    }
    return MembershipFunction(kind, std::span<const double>(p.data(), param_count(kind)));
  }

  MfKind kind() const { return kind_; }
  std::span<const double> params() const { return {params_.data(), param_count(kind_)}; }

  /// Point where the function peaks (middle of the plateau for trapezoids).
  double center() const {
    switch (kind_) {
      case MfKind::Triangular: return params_[1];
      case MfKind::Trapezoidal: return 0.5 * (params_[1] + params_[2]);
      case MfKind::GBell: return params_[2];
    }
    return 0.0;
  }

  double eval(double x) const {
    require_finite(x);
    const auto& p = params_;
    switch (kind_) {
      case MfKind::Triangular: {
        if (x < p[0] || x > p[2]) return 0.0;
        if (x == p[1]) return 1.0;
        if (x < p[1]) return (x - p[0]) / (p[1] - p[0]);
        return (p[2] - x) / (p[2] - p[1]);
      }
      case MfKind::Trapezoidal: {
        if (x < p[0] || x > p[3]) return 0.0;
        if (x >= p[1] && x <= p[2]) return 1.0;
        if (x < p[1]) return (x - p[0]) / (p[1] - p[0]);
        return (p[3] - x) / (p[3] - p[2]);
      }
      case MfKind::GBell: {
        const double t = (x - p[2]) / p[0];
        return 1.0 / (1.0 + std::pow(t * t, p[1]));
      }
    }
    return 0.0;
  }

  /// Partial derivatives of eval(x) with respect to each parameter, in
  /// params() order. Non-differentiable points (piecewise-linear breakpoints,
  /// the GBell center) yield the subgradient 0.
  std::array<double, 4> grad_params(double x) const {
    require_finite(x);
    std::array<double, 4> g{};
    const auto& p = params_;
    switch (kind_) {
      case MfKind::Triangular: {
        if (x > p[0] && x < p[1]) {
          const double w = p[1] - p[0];
          g[0] = (x - p[1]) / (w * w);
          g[1] = -(x - p[0]) / (w * w);
        } else if (x > p[1] && x < p[2]) {
          const double w = p[2] - p[1];
          g[1] = (p[2] - x) / (w * w);
          g[2] = (x - p[1]) / (w * w);
        }
        break;
      }
      case MfKind::Trapezoidal: {
        if (x > p[0] && x < p[1]) {
          const double w = p[1] - p[0];
          g[0] = (x - p[1]) / (w * w);
          g[1] = -(x - p[0]) / (w * w);
        } else if (x > p[2] && x < p[3]) {
          const double w = p[3] - p[2];
          g[2] = (p[3] - x) / (w * w);
          g[3] = (x - p[2]) / (w * w);
        }
        break;
      }
      case MfKind::GBell: {
        const double a = p[0];
        const double b = p[1];
        const double t = (x - p[2]) / a;
        if (t == 0.0) break;
        const double t2 = t * t;
        const double mu = 1.0 / (1.0 + std::pow(t2, b));
        // mu^2 * |t|^(2b) rewritten as mu * (1 - mu); stays finite when the power overflows.
        const double mu2u = mu * (1.0 - mu);
        g[0] = 2.0 * b * mu2u / a;
        g[1] = -mu2u * std::log(t2);
        g[2] = 2.0 * b * mu2u / (a * t);
        break;
      }
    }
    return g;
  }

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;

 private:
  static void require_finite(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("membership input must be finite");
  }

  void validate() const {
    const auto p = params();
    for (double v : p) {
      if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(to_string(kind_)) + " parameters must be finite");
      }
    }
    if (kind_ == MfKind::GBell) {
      if (p[0] <= 0.0 || p[1] <= 0.0) {
        throw InvalidArgument("gbell width a and slope b must be positive");
      }
    } else if (!std::is_sorted(p.begin(), p.end())) {
      throw InvalidArgument(std::string(to_string(kind_)) + " parameters must be non-decreasing");
    }
  }

  MfKind kind_;
  std::array<double, 4> params_{};
};

/// `count` functions with centers evenly spaced over [domain_min, domain_max].
///
/// GBell: width = half the center spacing, slope 2. Triangles reach to the
/// neighbouring centers; trapezoids do as well, with a plateau of half the
/// spacing. Edge functions extend one spacing beyond the domain, so every
/// point of the domain has membership >= 0.5 in at least one set.
inline std::vector<MembershipFunction> init_grid(MfKind kind, double domain_min, double domain_max,
                                                 std::size_t count) {
  if (!(std::isfinite(domain_min) && std::isfinite(domain_max)) || domain_max <= domain_min) {
    throw InvalidArgument("membership grid needs domain_max > domain_min");
  }
  if (count < 2) throw InvalidArgument("membership grid needs at least 2 functions");

  const double spacing = (domain_max - domain_min) / static_cast<double>(count - 1);
  std::vector<MembershipFunction> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double c = k + 1 == count ? domain_max : domain_min + spacing * static_cast<double>(k);
    switch (kind) {
      case MfKind::Triangular:
        out.push_back(MembershipFunction::triangular(c - spacing, c, c + spacing));
        break;
      case MfKind::Trapezoidal:
        out.push_back(MembershipFunction::trapezoidal(c - spacing, c - 0.25 * spacing,
                                                      c + 0.25 * spacing, c + spacing));
        break;
      case MfKind::GBell:
        out.push_back(MembershipFunction::gbell(0.5 * spacing, 2.0, c));
        break;
    }
  }
  return out;
}

}  // namespace nfcast
