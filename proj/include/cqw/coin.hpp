#pragma once

// Coin compilation: turns a deformation field Lambda into per-site unit Pauli
// vectors n^i (beta^i = n^i . sigma), coin angles, unitaries U_i and the
// scalar phases gamma_i.
//
// The duality conditions solved at every site are
//   (C1)  sum_i u_i^j n^i = (Lambda^j_1, Lambda^j_2, 0)    for j in {x, y}
//   (C2)  |n^i| = 1, i.e. beta^i = U_i^dag sigma_z U_i has eigenvalues +-1.

#include <array>
#include <vector>

#include "cqw/geometry.hpp"
#include "cqw/lattice.hpp"
#include "cqw/metric_family.hpp"

namespace cqw {

struct LatticeDirections {
  std::array<Vec2, 3> u{};
  int count = 3;

  static LatticeDirections hexagonal();
  static LatticeDirections square();
  bool is_square() const { return count == 2; }
};

/// Real 3-vector n standing for the traceless Hermitian matrix n . sigma.
struct PauliVector {
  Vec3 n = Vec3::Zero();

  Mat2c matrix() const;
};

struct BetaTriple {
  std::array<PauliVector, 3> n{};
  /// Max-norm residual of (C1).
  double residual = 0.0;
};

/// theta in [0, pi], phi in (-pi, pi]; n = (sin th cos ph, sin th sin ph, cos th).
struct CoinAngles {
  double theta = 0.0;
  double phi = 0.0;
};

Mat2c pauli_x();
Mat2c pauli_y();
Mat2c pauli_z();

/// Symmetric flat solution n^i = (2/3) u_i + (sqrt(5)/3) z; Pauli matrices on the square set.
BetaTriple flat_taus(const LatticeDirections& dirs);

/// Residual of (C1) for a candidate triple.
double c1_residual(const DeformationMatrix& lambda, const LatticeDirections& dirs, const BetaTriple& betas);

/// Necessary condition |Lambda^j_k| rows = 1 for the square direction set.
bool square_feasible(const DeformationMatrix& lambda);

/// Damped Newton solve of (C1)/(C2) seeded from `seed` (continuation branch).
/// Throws CoinInfeasible on the fast bound or a square-lattice violation, and
/// CoinNoSolution when Newton fails from the seed and all restarts.
BetaTriple solve_betas(const DeformationMatrix& lambda, const LatticeDirections& dirs, const BetaTriple& seed);

CoinAngles angles_from_beta(const PauliVector& n);
Vec3 beta_from_angles(const CoinAngles& a);
Mat2c unitary_from_angles(const CoinAngles& a);

/// Compiled coins at one site, one entry per direction.
struct SiteCoins {
  std::array<Mat2c, 3> unitary{Mat2c::Identity(), Mat2c::Identity(), Mat2c::Identity()};
  std::array<CoinAngles, 3> angles{};
  std::array<Vec3, 3> beta{Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitZ()};
  std::array<double, 3> gamma{};
  /// 1 / e^t_0, so that m~ = m * inv_et0.
  double inv_et0 = 1.0;
  /// (Lambda^j_1, Lambda^j_2) rows, kept for residual checks.
  Mat2 lambda = Mat2::Identity();
};

SiteCoins make_site_coins(const BetaTriple& betas, const LatticeDirections& dirs, double inv_et0,
                          const Mat2& lambda);

class CoinField {
 public:
  CoinField(const SiteGrid& grid, const LatticeDirections& dirs, double time);

  const SiteGrid& grid() const { return grid_; }
  const LatticeDirections& directions() const { return dirs_; }
  double time() const { return time_; }
  std::size_t size() const { return sites_.size(); }

  SiteCoins& operator[](std::size_t i) { return sites_[i]; }
  const SiteCoins& operator[](std::size_t i) const { return sites_[i]; }
  const std::vector<SiteCoins>& sites() const { return sites_; }

  /// Same coins at every site.
  static CoinField uniform(const SiteGrid& grid, const LatticeDirections& dirs, const SiteCoins& coins,
                           double time = 0.0);

  /// Max over sites and directions of |U^dag U - I|.
  double unitarity_residual() const;
  /// Max over sites of the (C1) residual computed from the stored angles.
  double c1_residual() const;
  /// Max over sites and directions of |eigenvalues(U^dag sigma_z U) -+ 1|.
  double c2_residual() const;

 private:
  SiteGrid grid_;
  LatticeDirections dirs_;
  double time_;
  std::vector<SiteCoins> sites_;
};

/// Per-site angle grid for gamma_field.
struct AngleGrid {
  SiteGrid grid;
  std::vector<std::array<CoinAngles, 3>> angles;
};

/// gamma_i = -(1/2) cos(theta_i) (u_i . grad phi_i), with second-order central
/// differences along both lattice axes and 2pi-unwrapped phase differences.
std::vector<std::array<double, 3>> gamma_field(const AngleGrid& angles, const LatticeDirections& dirs);

struct CompileOptions {
  bool parallel = false;
  /// Rows per band in parallel mode; 0 picks one band per thread.
  int band_rows = 0;
};

struct CompileStats {
  bool used_parallel = false;
  bool fell_back = false;
};

/// Compiles the coin field of `family` at time t on `grid`, sweeping sites in
/// row-major order with each Newton solve seeded from the previous site.
CoinField compile_coins(const MetricFamily& family, const SiteGrid& grid, const LatticeDirections& dirs,
                        double t, const CompileOptions& options = {}, CompileStats* stats = nullptr);

}  // namespace cqw
