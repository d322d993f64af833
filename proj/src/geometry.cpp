#include "cqw/geometry.hpp"

#include <cmath>

#include "cqw/format.hpp"

namespace cqw {

Mat3 eta() { return Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal(); }

Metric2p1::Metric2p1(const Mat3& g) : g_(g) {
  if (!g_.allFinite()) throw GeometryError("metric has non-finite entries");
  const double scale = std::max(1.0, g_.cwiseAbs().maxCoeff());
  if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
    throw GeometryError("metric is not symmetric");
  if (!(g_(0, 0) > 0.0)) throw GeometryError("g_tt must be positive, got " + format_short(g_(0, 0)));
  const Mat2 s = spatial();
  // Negative-definite 2x2 block: leading entry and determinant test.
  if (!(s(0, 0) < 0.0 && s.determinant() > 0.0))
    throw GeometryError("spatial block of the metric is not negative-definite");
  if (g_.determinant() == 0.0) throw GeometryError("metric is singular");
}

Metric2p1 Metric2p1::block(double g_tt, const Mat2& spatial) {
  Mat3 g = Mat3::Zero();
  g(0, 0) = g_tt;
  g.block<2, 2>(1, 1) = spatial;
  return Metric2p1(g);
}

CoordinateTransform::CoordinateTransform(const Mat2& spatial) : spatial_(spatial) {
  if (!spatial_.allFinite()) throw GeometryError("coordinate transform has non-finite entries");
  const double det = spatial_.determinant();
  if (std::abs(det) <= 1e-14 * std::max(1.0, spatial_.cwiseAbs().maxCoeff() * spatial_.cwiseAbs().maxCoeff()))
    throw GeometryError("coordinate transform is singular");
}

Mat3 CoordinateTransform::matrix() const {
  Mat3 m = Mat3::Identity();
  m.block<2, 2>(1, 1) = spatial_;
  return m;
}

Tetrad build_tetrad(const Metric2p1& metric) {
  if (metric.has_shift()) throw GeometryError("metrics with a nonzero shift (g_tx, g_ty) are not supported");
  const Mat2 s = -metric.spatial();
  Eigen::LLT<Mat2> llt(s);
  if (llt.info() != Eigen::Success) throw GeometryError("spatial block of the metric is not negative-definite");
  const Mat2 lower = llt.matrixL();
  Mat3 e = Mat3::Zero();
  e(0, 0) = 1.0 / std::sqrt(metric.g_tt());
  e.block<2, 2>(1, 1) = lower.transpose().inverse();
  return Tetrad(e);
}

DeformationMatrix deformation_at(const Tetrad& tetrad) {
  const double et0 = tetrad.e_t0();
  if (!(et0 > 0.0)) throw GeometryError("e^t_0 must be positive");
  DeformationMatrix d;
  d.lambda = tetrad.inverse().block<2, 3>(1, 0) / et0;
  return d;
}

std::pair<Metric2p1, Tetrad> transform_metric(const CoordinateTransform& gamma, const Metric2p1& g,
                                              const Tetrad& e) {
  const Mat3 G = gamma.matrix();
  const Mat3 Ginv = G.inverse();
  Mat3 gp = Ginv.transpose() * g.matrix() * Ginv;
  gp = 0.5 * (gp + gp.transpose());
  return {Metric2p1(gp), Tetrad(G * e.inverse())};
}

double orthonormality_residual(const Metric2p1& g, const Tetrad& e) {
  const Mat3& E = e.inverse();
  return (E.transpose() * g.matrix() * E - eta()).cwiseAbs().maxCoeff();
}

double inverse_residual(const Tetrad& e) {
  return (e.inverse() * e.forward() - Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace cqw
