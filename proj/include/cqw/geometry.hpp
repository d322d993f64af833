#pragma once

// Metrics, tetrads and deformation fields of a (2+1)-dimensional spacetime.
//
// Index conventions: coordinate indices mu in {t, x, y} map to rows 0, 1, 2;
// frame indices a in {0, 1, 2} map to columns. The metric signature is
// (+, -, -) and eta = diag(1, -1, -1).

#include <utility>

#include "cqw/types.hpp"

namespace cqw {

struct SpacetimePoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Minkowski metric diag(1, -1, -1).
Mat3 eta();

class Metric2p1 {
 public:
  /// Validates symmetry, g_tt > 0, a negative-definite spatial block and det != 0.
  explicit Metric2p1(const Mat3& g);

  static Metric2p1 minkowski() { return Metric2p1(eta()); }
  /// Block form diag(g_tt, spatial) without shift.
  static Metric2p1 block(double g_tt, const Mat2& spatial);

  const Mat3& matrix() const { return g_; }
  double g_tt() const { return g_(0, 0); }
  Mat2 spatial() const { return g_.block<2, 2>(1, 1); }
  /// |det g|.
  double abs_det() const { return std::abs(g_.determinant()); }
  bool has_shift() const { return g_(0, 1) != 0.0 || g_(0, 2) != 0.0; }

 private:
  Mat3 g_;
};

/// Inverse vierbein e^mu_a stored as a 3x3 matrix (row mu, column a).
class Tetrad {
 public:
  explicit Tetrad(const Mat3& inverse_vierbein) : e_(inverse_vierbein) {}

  static Tetrad identity() { return Tetrad(Mat3::Identity()); }

  const Mat3& inverse() const { return e_; }
  /// Forward vierbein e_mu^a (row a, column mu): the matrix inverse of e^mu_a.
  Mat3 forward() const { return e_.inverse(); }
  double e_t0() const { return e_(0, 0); }

 private:
  Mat3 e_;
};

/// Lambda^s_a = e^s_a / e^t_0 (rows s in {x, y}, columns a in {0, 1, 2}).
struct DeformationMatrix {
  Eigen::Matrix<double, 2, 3> lambda = Eigen::Matrix<double, 2, 3>::Zero();

  static DeformationMatrix from_spatial(const Mat2& m) {
    DeformationMatrix d;
    d.lambda.block<2, 2>(0, 1) = m;
    return d;
  }
  static DeformationMatrix identity() { return from_spatial(Mat2::Identity()); }

  /// Columns a = 1, 2.
  Mat2 spatial() const { return lambda.block<2, 2>(0, 1); }
  /// Column a = 0; must vanish for coin compilation.
  Vec2 boost_column() const { return lambda.col(0); }
};

/// x' = Gamma x with Gamma = [[1, 0, 0], [0, l11, l12], [0, l21, l22]].
class CoordinateTransform {
 public:
  explicit CoordinateTransform(const Mat2& spatial);

  const Mat2& spatial() const { return spatial_; }
  Mat3 matrix() const;

 private:
  Mat2 spatial_;
};

/// Tetrad in the gauge e^t_1 = e^t_2 = 0, e^t_0 = 1/sqrt(g_tt), spatial block
/// L^{-T} where -g_spatial = L L^T is the Cholesky factorisation.
Tetrad build_tetrad(const Metric2p1& metric);

DeformationMatrix deformation_at(const Tetrad& tetrad);

/// g' = Gamma^{-T} g Gamma^{-1},  e' = Gamma e.
std::pair<Metric2p1, Tetrad> transform_metric(const CoordinateTransform& gamma, const Metric2p1& g,
                                              const Tetrad& e);

/// max |e^T g e - eta|.
double orthonormality_residual(const Metric2p1& g, const Tetrad& e);
/// max |e^mu_a e_nu^a - delta^mu_nu|.
double inverse_residual(const Tetrad& e);

}  // namespace cqw
