#include "cqw/metric_family.hpp"

#include <cmath>

#include "cqw/format.hpp"

namespace cqw {

namespace {

double finite_or_throw(double v, const char* what, const SpacetimePoint& p) {
  if (!std::isfinite(v))
    throw GeometryError(std::string(what) + " is not finite at (t, x, y) = (" + format_short(p.t) + ", " +
                        format_short(p.x) + ", " + format_short(p.y) + ")");
  return v;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Mat2 lambda_at(const MetricFamily::Homogeneous& h, const SpacetimePoint& p) {
  Mat2 m;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) m(s, a) = finite_or_throw(h.lambda[s][a].evaluate(p), "lambda entry", p);
  return m;
}

}  // namespace

MetricFamily MetricFamily::homogeneous(const std::array<std::array<MetricExpression, 2>, 2>& lambda) {
  for (const auto& row : lambda)
    for (const auto& e : row)
      if (e.depends_on('x') || e.depends_on('y'))
        throw GeometryError("homogeneous deformation entries may depend on t only, got '" + e.source() + "'");
  return MetricFamily(Homogeneous{lambda});
}

MetricFamily MetricFamily::homogeneous(const Mat2& lambda) {
  std::array<std::array<MetricExpression, 2>, 2> l{{{MetricExpression::constant(lambda(0, 0)),
                                                     MetricExpression::constant(lambda(0, 1))},
                                                    {MetricExpression::constant(lambda(1, 0)),
                                                     MetricExpression::constant(lambda(1, 1))}}};
  return homogeneous(l);
}

Metric2p1 MetricFamily::metric_at(const SpacetimePoint& p) const {
  return std::visit(
      overloaded{
          [](const Flat&) { return Metric2p1::minkowski(); },
          [&](const Homogeneous& h) {
            const CoordinateTransform gamma(lambda_at(h, p));
            return transform_metric(gamma, Metric2p1::minkowski(), Tetrad::identity()).first;
          },
          [&](const Conformal& c) {
            const double f = finite_or_throw(c.f.evaluate(p), "conformal factor f", p);
            if (f == 0.0) throw GeometryError("conformal factor f vanishes");
            return Metric2p1::block(1.0, Mat2::Identity() * (-f * f));
          },
          [&](const Custom& c) {
            Mat2 s;
            s(0, 0) = finite_or_throw(c.g_xx.evaluate(p), "g_xx", p);
            s(0, 1) = s(1, 0) = finite_or_throw(c.g_xy.evaluate(p), "g_xy", p);
            s(1, 1) = finite_or_throw(c.g_yy.evaluate(p), "g_yy", p);
            return Metric2p1::block(finite_or_throw(c.g_tt.evaluate(p), "g_tt", p), s);
          },
      },
      family_);
}

Tetrad MetricFamily::tetrad_at(const SpacetimePoint& p) const {
  if (std::holds_alternative<Flat>(family_)) return Tetrad::identity();
  if (const auto* h = std::get_if<Homogeneous>(&family_)) {
    const CoordinateTransform gamma(lambda_at(*h, p));
    return Tetrad(gamma.matrix());
  }
  return build_tetrad(metric_at(p));
}

bool MetricFamily::is_static() const {
  return std::visit(overloaded{
                        [](const Flat&) { return true; },
                        [](const Homogeneous& h) {
                          for (const auto& row : h.lambda)
                            for (const auto& e : row)
                              if (e.depends_on('t')) return false;
                          return true;
                        },
                        [](const Conformal& c) { return !c.f.depends_on('t'); },
                        [](const Custom& c) {
                          return !(c.g_tt.depends_on('t') || c.g_xx.depends_on('t') || c.g_xy.depends_on('t') ||
                                   c.g_yy.depends_on('t'));
                        },
                    },
                    family_);
}

bool MetricFamily::is_homogeneous_in_space() const {
  return std::visit(overloaded{
                        [](const Flat&) { return true; },
                        [](const Homogeneous&) { return true; },
                        [](const Conformal& c) { return !c.f.depends_on('x') && !c.f.depends_on('y'); },
                        [](const Custom& c) {
                          for (const auto* e : {&c.g_tt, &c.g_xx, &c.g_xy, &c.g_yy})
                            if (e->depends_on('x') || e->depends_on('y')) return false;
                          return true;
                        },
                    },
                    family_);
}

std::string MetricFamily::name() const {
  return std::visit(overloaded{
                        [](const Flat&) { return std::string("flat"); },
                        [](const Homogeneous&) { return std::string("homogeneous"); },
                        [](const Conformal&) { return std::string("conformal"); },
                        [](const Custom&) { return std::string("custom"); },
                    },
                    family_);
}

}  // namespace cqw
