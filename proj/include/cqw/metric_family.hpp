#pragma once

// Analytic metric families sampled by the coin compiler and the oracle.

#include <array>
#include <optional>
#include <string>
#include <variant>

#include "cqw/expression.hpp"
#include "cqw/geometry.hpp"

namespace cqw {

class MetricFamily {
 public:
  struct Flat {};
  /// Homogeneous coordinate deformation: lambda[s][a-1], possibly time-dependent.
  struct Homogeneous {
    std::array<std::array<MetricExpression, 2>, 2> lambda;
  };
  /// diag(1, -f^2, -f^2).
  struct Conformal {
    MetricExpression f;
  };
  /// Block metric with expression entries; g_xy defaults to 0.
  struct Custom {
    MetricExpression g_tt, g_xx, g_xy, g_yy;
  };

  using Variant = std::variant<Flat, Homogeneous, Conformal, Custom>;

  static MetricFamily flat() { return MetricFamily(Flat{}); }
  /// Throws GeometryError if any entry depends on x or y.
  static MetricFamily homogeneous(const std::array<std::array<MetricExpression, 2>, 2>& lambda);
  static MetricFamily homogeneous(const Mat2& lambda);
  static MetricFamily conformal(MetricExpression f) { return MetricFamily(Conformal{std::move(f)}); }
  static MetricFamily custom(MetricExpression g_tt, MetricExpression g_xx, MetricExpression g_xy,
                             MetricExpression g_yy) {
    return MetricFamily(Custom{std::move(g_tt), std::move(g_xx), std::move(g_xy), std::move(g_yy)});
  }

  Metric2p1 metric_at(const SpacetimePoint& p) const;
  /// Tetrad used by the compiler: Gamma * identity for the homogeneous family,
  /// build_tetrad(metric_at(p)) otherwise.
  Tetrad tetrad_at(const SpacetimePoint& p) const;
  DeformationMatrix deformation(const SpacetimePoint& p) const { return deformation_at(tetrad_at(p)); }

  /// True when no entry depends on t.
  bool is_static() const;
  /// True for the flat family and for a constant identity deformation.
  bool is_flat() const { return std::holds_alternative<Flat>(family_); }
  bool is_homogeneous_in_space() const;
  std::string name() const;

  const Variant& variant() const { return family_; }

 private:
  explicit MetricFamily(Variant v) : family_(std::move(v)) {}
  Variant family_;
};

}  // namespace cqw
