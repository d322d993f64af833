#include "cqw/coin.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "cqw/format.hpp"

namespace cqw {

namespace {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIter = 50;
constexpr int kMaxHalvings = 20;
constexpr int kRestarts = 8;
constexpr double kSnapScale = 1048576.0;  // 2^20

Vec9 pack(const BetaTriple& b) {
  Vec9 x;
  for (int i = 0; i < 3; ++i) x.segment<3>(3 * i) = b.n[i].n;
  return x;
}

BetaTriple unpack(const Vec9& x) {
  BetaTriple b;
  for (int i = 0; i < 3; ++i) b.n[i].n = x.segment<3>(3 * i);
  return b;
}

struct System {
  const LatticeDirections& dirs;
  Vec3 bx;
  Vec3 by;

  Vec9 residual(const Vec9& x) const {
    Vec9 f;
    for (int k = 0; k < 3; ++k) {
      double sx = -bx[k], sy = -by[k];
      for (int i = 0; i < 3; ++i) {
        sx += dirs.u[i].x() * x[3 * i + k];
        sy += dirs.u[i].y() * x[3 * i + k];
      }
      f[k] = sx;
      f[3 + k] = sy;
    }
    for (int i = 0; i < 3; ++i) f[6 + i] = x.segment<3>(3 * i).squaredNorm() - 1.0;
    return f;
  }

  Mat9 jacobian(const Vec9& x) const {
    Mat9 j = Mat9::Zero();
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        j(k, 3 * i + k) = dirs.u[i].x();
        j(3 + k, 3 * i + k) = dirs.u[i].y();
        j(6 + i, 3 * i + k) = 2.0 * x[3 * i + k];
      }
    return j;
  }

  // A few full steps past the tolerance, kept only while they still reduce |F|.
  void polish(Vec9& x, double fnorm) const {
    for (int k = 0; k < 3 && fnorm > 0.0; ++k) {
      Eigen::FullPivLU<Mat9> lu(jacobian(x));
      const Vec9 trial = x + lu.solve(-residual(x));
      const double tnorm = residual(trial).cwiseAbs().maxCoeff();
      if (!(tnorm < fnorm)) return;
      x = trial;
      fnorm = tnorm;
    }
  }

  /// Damped Newton from x; true on convergence.
  bool newton(Vec9& x) const {
    Vec9 f = residual(x);
    double fnorm = f.cwiseAbs().maxCoeff();
    for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
      if (fnorm < kNewtonTol) {
        polish(x, fnorm);
        return true;
      }
      Eigen::FullPivLU<Mat9> lu(jacobian(x));
      if (!lu.isInvertible()) return false;
      const Vec9 step = lu.solve(-f);
      if (!step.allFinite()) return false;
      double alpha = 1.0;
      Vec9 trial = x + step;
      Vec9 ftrial = residual(trial);
      double tnorm = ftrial.cwiseAbs().maxCoeff();
      int halvings = 0;
      while (!(tnorm < fnorm) && halvings < kMaxHalvings) {
        alpha *= 0.5;
        trial = x + alpha * step;
        ftrial = residual(trial);
        tnorm = ftrial.cwiseAbs().maxCoeff();
        ++halvings;
      }
      if (!(tnorm < fnorm)) return false;
      x = trial;
      f = ftrial;
      fnorm = tnorm;
    }
    if (fnorm < kNewtonTol) polish(x, fnorm);
    return fnorm < kNewtonTol;
  }
};

Vec9 restart_seed(const Vec9& seed, int r) {
  static const Vec3 kKicks[kRestarts] = {Vec3(1, 0, 0),  Vec3(-1, 0, 0), Vec3(0, 1, 0),  Vec3(0, -1, 0),
                                         Vec3(0, 0, 1),  Vec3(0, 0, -1), Vec3(1, 1, 1),  Vec3(-1, 1, -1)};
  Vec9 x = seed;
  for (int i = 0; i < 3; ++i) {
    Vec3 n = x.segment<3>(3 * i) + 0.3 * kKicks[(r + i) % kRestarts].normalized();
    if (n.norm() < 1e-8) n = Vec3::UnitZ();
    x.segment<3>(3 * i) = n.normalized();
  }
  return x;
}

}  // namespace

LatticeDirections LatticeDirections::hexagonal() {
  LatticeDirections d;
  d.u = hex_directions();
  d.count = 3;
  return d;
}

LatticeDirections LatticeDirections::square() {
  LatticeDirections d;
  d.u = {Vec2(1.0, 0.0), Vec2(0.0, 1.0), Vec2(0.0, 0.0)};
  d.count = 2;
  return d;
}

Mat2c pauli_x() {
  Mat2c m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Mat2c pauli_y() {
  Mat2c m;
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

Mat2c pauli_z() {
  Mat2c m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

Mat2c PauliVector::matrix() const { return n.x() * pauli_x() + n.y() * pauli_y() + n.z() * pauli_z(); }

BetaTriple flat_taus(const LatticeDirections& dirs) {
  BetaTriple b;
  if (dirs.is_square()) {
    b.n[0].n = Vec3::UnitX();
    b.n[1].n = Vec3::UnitY();
    b.n[2].n = Vec3::UnitZ();
    return b;
  }
  const double z = std::sqrt(5.0) / 3.0;
  for (int i = 0; i < 3; ++i) b.n[i].n = Vec3(2.0 / 3.0 * dirs.u[i].x(), 2.0 / 3.0 * dirs.u[i].y(), z);
  b.residual = 0.0;
  return b;
}

double c1_residual(const DeformationMatrix& lambda, const LatticeDirections& dirs, const BetaTriple& betas) {
  double r = 0.0;
  for (int j = 0; j < 2; ++j) {
    Vec3 sum = Vec3::Zero();
    for (int i = 0; i < dirs.count; ++i) sum += dirs.u[i][j] * betas.n[i].n;
    const Vec3 target(lambda.lambda(j, 1), lambda.lambda(j, 2), 0.0);
    r = std::max(r, (sum - target).cwiseAbs().maxCoeff());
  }
  return r;
}

bool square_feasible(const DeformationMatrix& lambda) {
  const Mat2 s = lambda.spatial();
  for (int j = 0; j < 2; ++j)
    if (std::abs(s.row(j).squaredNorm() - 1.0) > 1e-10) return false;
  return true;
}

BetaTriple solve_betas(const DeformationMatrix& lambda, const LatticeDirections& dirs, const BetaTriple& seed) {
  if (lambda.boost_column().cwiseAbs().maxCoeff() > 1e-14)
    throw CoinInfeasible("deformation has a nonzero Lambda^s_0 column, which no coin set can absorb");
  const Mat2 s = lambda.spatial();

  if (dirs.is_square()) {
    if (!square_feasible(lambda))
      throw CoinInfeasible(
          "square lattice can only absorb deformations whose rows satisfy sum_k (Lambda^j_k)^2 = 1; got row norms^2 " +
          format_short(s.row(0).squaredNorm()) + ", " + format_short(s.row(1).squaredNorm()));
    BetaTriple b;
    b.n[0].n = Vec3(s(0, 0), s(0, 1), 0.0);
    b.n[1].n = Vec3(s(1, 0), s(1, 1), 0.0);
    b.n[2].n = Vec3::UnitZ();
    b.residual = c1_residual(lambda, dirs, b);
    return b;
  }

  for (int j = 0; j < 2; ++j) {
    double bound = 0.0;
    for (int i = 0; i < dirs.count; ++i) bound += std::abs(dirs.u[i][j]);
    if (s.row(j).norm() > bound * (1.0 + 1e-12))
      throw CoinInfeasible("deformation row " + format_short(j) + " has norm " + format_short(s.row(j).norm()) +
                           " above the lattice bound " + format_short(bound));
  }

  const System sys{dirs, Vec3(s(0, 0), s(0, 1), 0.0), Vec3(s(1, 0), s(1, 1), 0.0)};
  const Vec9 x0 = pack(seed);
  Vec9 x = x0;
  bool ok = sys.newton(x);
  for (int r = 0; !ok && r < kRestarts; ++r) {
    x = restart_seed(x0, r);
    ok = sys.newton(x);
  }
  if (!ok)
    throw CoinNoSolution("Newton failed to solve the duality conditions for Lambda = [[" + format_short(s(0, 0)) +
                         ", " + format_short(s(0, 1)) + "], [" + format_short(s(1, 0)) + ", " +
                         format_short(s(1, 1)) + "]]");

  // Snap to a coarse grid and re-polish so the result depends on the branch only.
  Vec9 snapped = (x * kSnapScale).array().round().matrix() / kSnapScale;
  if (sys.newton(snapped)) x = snapped;

  BetaTriple b = unpack(x);
  b.residual = c1_residual(lambda, dirs, b);
  return b;
}

CoinAngles angles_from_beta(const PauliVector& n) {
  CoinAngles a;
  const double r = n.n.norm();
  const double z = std::clamp(n.n.z() / r, -1.0, 1.0);
  a.theta = std::acos(z);
  const double sin_theta = std::hypot(n.n.x(), n.n.y()) / r;
  a.phi = sin_theta < 1e-12 ? 0.0 : std::atan2(n.n.y(), n.n.x());
  return a;
}

Vec3 beta_from_angles(const CoinAngles& a) {
  return Vec3(std::sin(a.theta) * std::cos(a.phi), std::sin(a.theta) * std::sin(a.phi), std::cos(a.theta));
}

Mat2c unitary_from_angles(const CoinAngles& a) {
  const double c = std::cos(0.5 * a.theta);
  const double s = std::sin(0.5 * a.theta);
  const cplx ep = std::polar(1.0, 0.5 * a.phi);
  const cplx em = std::conj(ep);
  Mat2c u;
  u << ep * c, em * s, -ep * s, em * c;
  return u;
}

SiteCoins make_site_coins(const BetaTriple& betas, const LatticeDirections& dirs, double inv_et0,
                          const Mat2& lambda) {
  SiteCoins c;
  for (int i = 0; i < dirs.count; ++i) {
    c.angles[i] = angles_from_beta(betas.n[i]);
    c.unitary[i] = unitary_from_angles(c.angles[i]);
    c.beta[i] = beta_from_angles(c.angles[i]);
  }
  c.inv_et0 = inv_et0;
  c.lambda = lambda;
  return c;
}

CoinField::CoinField(const SiteGrid& grid, const LatticeDirections& dirs, double time)
    : grid_(grid), dirs_(dirs), time_(time), sites_(grid.size()) {}

CoinField CoinField::uniform(const SiteGrid& grid, const LatticeDirections& dirs, const SiteCoins& coins,
                             double time) {
  CoinField f(grid, dirs, time);
  std::fill(f.sites_.begin(), f.sites_.end(), coins);
  return f;
}

double CoinField::unitarity_residual() const {
  double r = 0.0;
  for (const auto& s : sites_)
    for (int i = 0; i < dirs_.count; ++i)
      r = std::max(r, (s.unitary[i].adjoint() * s.unitary[i] - Mat2c::Identity()).cwiseAbs().maxCoeff());
  return r;
}

double CoinField::c1_residual() const {
  double r = 0.0;
  for (const auto& s : sites_) {
    for (int j = 0; j < 2; ++j) {
      Vec3 sum = Vec3::Zero();
      for (int i = 0; i < dirs_.count; ++i) sum += dirs_.u[i][j] * s.beta[i];
      const Vec3 target(s.lambda(j, 0), s.lambda(j, 1), 0.0);
      r = std::max(r, (sum - target).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

double CoinField::c2_residual() const {
  double r = 0.0;
  const Mat2c sz = pauli_z();
  for (const auto& s : sites_) {
    for (int i = 0; i < dirs_.count; ++i) {
      const Mat2c beta = s.unitary[i].adjoint() * sz * s.unitary[i];
      // Closed-form eigenvalues of a 2x2 Hermitian matrix.
      const double mean = 0.5 * (beta(0, 0).real() + beta(1, 1).real());
      const double half = 0.5 * (beta(0, 0).real() - beta(1, 1).real());
      const double rad = std::sqrt(half * half + std::norm(beta(0, 1)));
      r = std::max({r, std::abs(mean - rad + 1.0), std::abs(mean + rad - 1.0)});
    }
  }
  return r;
}

namespace {

double wrap_angle(double d) {
  d = std::remainder(d, 2.0 * kPi);
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

}  // namespace

std::vector<std::array<double, 3>> gamma_field(const AngleGrid& ag, const LatticeDirections& dirs) {
  const SiteGrid& g = ag.grid;
  if (ag.angles.size() != g.size()) throw ShapeMismatch("angle grid size does not match its geometry");
  const auto cx = g.dx_coefficients();
  const auto cy = g.dy_coefficients();
  std::vector<std::array<double, 3>> gamma(g.size(), std::array<double, 3>{0.0, 0.0, 0.0});
  const int n1 = g.n1(), n2 = g.n2();
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n2; ++b) {
    for (int a = 0; a < n1; ++a) {
      const std::size_t idx = g.index(a, b);
      for (int i = 0; i < dirs.count; ++i) {
        const double da = 0.5 * wrap_angle(ag.angles[g.index(a + 1, b)][i].phi - ag.angles[g.index(a - 1, b)][i].phi);
        const double db = 0.5 * wrap_angle(ag.angles[g.index(a, b + 1)][i].phi - ag.angles[g.index(a, b - 1)][i].phi);
        const double gx = cx[0] * da + cx[1] * db;
        const double gy = cy[0] * da + cy[1] * db;
        gamma[idx][i] = -0.5 * std::cos(ag.angles[idx][i].theta) * (dirs.u[i].x() * gx + dirs.u[i].y() * gy);
      }
    }
  }
  return gamma;
}

namespace {

struct SiteSolve {
  BetaTriple betas;
  SiteCoins coins;
};

SiteSolve solve_site(const MetricFamily& family, const SiteGrid& grid, const LatticeDirections& dirs, double t,
                     std::size_t idx, const BetaTriple& seed) {
  const Vec2 x = grid.position(idx);
  const Tetrad e = family.tetrad_at({t, x.x(), x.y()});
  const DeformationMatrix lambda = deformation_at(e);
  SiteSolve out;
  try {
    out.betas = solve_betas(lambda, dirs, seed);
  } catch (const CoinInfeasible& ex) {
    throw CoinInfeasible(std::string(ex.what()) + " at (t, x, y) = (" + format_short(t) + ", " +
                         format_short(x.x()) + ", " + format_short(x.y()) + ")");
  } catch (const CoinNoSolution& ex) {
    throw CoinNoSolution(std::string(ex.what()) + " at (t, x, y) = (" + format_short(t) + ", " +
                         format_short(x.x()) + ", " + format_short(x.y()) + ")");
  }
  out.coins = make_site_coins(out.betas, dirs, 1.0 / e.e_t0(), lambda.spatial());
  return out;
}

// Sweeps rows [row_begin, row_end); the first site is seeded from `first_seed`.
void sweep_rows(const MetricFamily& family, const SiteGrid& grid, const LatticeDirections& dirs, double t,
                int row_begin, int row_end, const BetaTriple& first_seed, std::vector<BetaTriple>& betas,
                CoinField& field) {
  const int n1 = grid.n1();
  for (int b = row_begin; b < row_end; ++b) {
    for (int a = 0; a < n1; ++a) {
      const std::size_t idx = grid.index(a, b);
      const BetaTriple& seed = (a > 0) ? betas[grid.index(a - 1, b)]
                                       : (b > row_begin ? betas[grid.index(0, b - 1)] : first_seed);
      SiteSolve s = solve_site(family, grid, dirs, t, idx, seed);
      betas[idx] = s.betas;
      field[idx] = s.coins;
    }
  }
}

bool same_betas(const BetaTriple& a, const BetaTriple& b) {
  for (int i = 0; i < 3; ++i)
    if (a.n[i].n != b.n[i].n) return false;
  return true;
}

}  // namespace

CoinField compile_coins(const MetricFamily& family, const SiteGrid& grid, const LatticeDirections& dirs, double t,
                        const CompileOptions& options, CompileStats* stats) {
  CoinField field(grid, dirs, t);
  std::vector<BetaTriple> betas(grid.size());
  const BetaTriple flat = flat_taus(dirs);
  const int n2 = grid.n2();

  bool done = false;
  if (options.parallel && n2 > 1) {
    int band_rows = options.band_rows;
    if (band_rows <= 0) band_rows = std::max(1, (n2 + omp_get_max_threads() - 1) / omp_get_max_threads());
    const int bands = (n2 + band_rows - 1) / band_rows;
    std::vector<std::string> errors(bands);
    std::vector<int> error_kind(bands, 0);
#pragma omp parallel for schedule(dynamic, 1)
    for (int band = 0; band < bands; ++band) {
      const int r0 = band * band_rows;
      const int r1 = std::min(n2, r0 + band_rows);
      try {
        sweep_rows(family, grid, dirs, t, r0, r1, flat, betas, field);
      } catch (const CoinInfeasible& e) {
        errors[band] = e.what();
        error_kind[band] = 1;
      } catch (const CoinNoSolution& e) {
        errors[band] = e.what();
        error_kind[band] = 2;
      } catch (const std::exception& e) {
        errors[band] = e.what();
        error_kind[band] = 3;
      }
    }
    bool any_error = false;
    for (int k : error_kind) any_error = any_error || k != 0;
    bool consistent = !any_error;
    // Each band's first site must match what the sequential sweep would have produced.
    for (int band = 1; consistent && band < bands; ++band) {
      const int r0 = band * band_rows;
      const SiteSolve s = solve_site(family, grid, dirs, t, grid.index(0, r0), betas[grid.index(0, r0 - 1)]);
      consistent = same_betas(s.betas, betas[grid.index(0, r0)]);
    }
    if (consistent) {
      done = true;
      if (stats) *stats = {true, false};
    } else if (stats) {
      *stats = {true, true};
    }
  }
  if (!done) {
    sweep_rows(family, grid, dirs, t, 0, n2, flat, betas, field);
    if (stats && !options.parallel) *stats = {false, false};
  }

  AngleGrid ag{grid, std::vector<std::array<CoinAngles, 3>>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) ag.angles[i] = field[i].angles;
  const auto gamma = gamma_field(ag, dirs);
  for (std::size_t i = 0; i < grid.size(); ++i) field[i].gamma = gamma[i];
  return field;
}

}  // namespace cqw
