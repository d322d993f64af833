#include <doctest.h>

#include "cqw/coin.hpp"
#include "cqw/metric_family.hpp"
#include "support.hpp"

using namespace cqw;

namespace {

const LatticeDirections kHex = LatticeDirections::hexagonal();
const LatticeDirections kSquare = LatticeDirections::square();

// Sum_i u_i^j n^i minus the target (Lambda^j_1, Lambda^j_2, 0), max norm.
double c1_gap(const Mat2& lambda, const LatticeDirections& dirs, const std::array<Vec3, 3>& n) {
  double worst = 0.0;
  for (int j = 0; j < 2; ++j) {
    Vec3 sum = Vec3::Zero();
    for (int i = 0; i < dirs.count; ++i) sum += dirs.u[i][j] * n[i];
    worst = std::max(worst, (sum - Vec3(lambda(j, 0), lambda(j, 1), 0.0)).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::array<Vec3, 3> vectors(const BetaTriple& b) { return {b.n[0].n, b.n[1].n, b.n[2].n}; }

Vec3 from_angles(const CoinAngles& a) {
  return {std::sin(a.theta) * std::cos(a.phi), std::sin(a.theta) * std::sin(a.phi), std::cos(a.theta)};
}

// n . sigma assembled by hand.
Mat2c pauli_of(const Vec3& n) {
  Mat2c m;
  m << cplx(n.z(), 0), cplx(n.x(), -n.y()), cplx(n.x(), n.y()), cplx(-n.z(), 0);
  return m;
}

Mat2 random_feasible_hex() {
  // Rows well inside the lattice bound (2 along x, sqrt 3 along y).
  const double r = test::uniform(0.3, 1.2), s = test::uniform(0.3, 1.2);
  const double a = test::uniform(-kPi, kPi), b = a + test::uniform(0.6, kPi - 0.6);
  Mat2 m;
  m << r * std::cos(a), r * std::sin(a), s * std::cos(b), s * std::sin(b);
  return m;
}

}  // namespace

TEST_CASE("flat taus closed form") {
  const BetaTriple t = flat_taus(kHex);
  const double z = std::sqrt(5.0) / 3.0;
  CHECK((t.n[0].n - Vec3(2.0 / 3.0, 0.0, z)).cwiseAbs().maxCoeff() < 1e-16);
  for (int i = 0; i < 3; ++i) {
    CHECK(t.n[i].n.x() == doctest::Approx(2.0 / 3.0 * kHex.u[i].x()).epsilon(1e-15));
    CHECK(t.n[i].n.y() == doctest::Approx(2.0 / 3.0 * kHex.u[i].y()).epsilon(1e-15));
    CHECK(t.n[i].n.norm() == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(c1_gap(Mat2::Identity(), kHex, vectors(t)) < 1e-15);
  CHECK(t.residual < 1e-15);
}

TEST_CASE("solve_betas at the identity returns the flat taus") {
  const BetaTriple t = flat_taus(kHex);
  const BetaTriple b = solve_betas(DeformationMatrix::identity(), kHex, t);
  for (int i = 0; i < 3; ++i) CHECK((b.n[i].n - t.n[i].n).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(b.residual < 1e-12);
}

TEST_CASE("isotropic scaling matches the closed-form ansatz") {
  const double lambda = 1.2;
  const BetaTriple b = solve_betas(DeformationMatrix::from_spatial(lambda * Mat2::Identity()), kHex, flat_taus(kHex));
  const double z = std::sqrt(1.0 - 4.0 * lambda * lambda / 9.0);
  CHECK(z == doctest::Approx(0.6).epsilon(1e-15));
  for (int i = 0; i < 3; ++i) {
    const Vec3 expected(2.0 * lambda / 3.0 * kHex.u[i].x(), 2.0 * lambda / 3.0 * kHex.u[i].y(), z);
    CHECK((b.n[i].n - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("square lattice feasibility") {
  Mat2 m;
  m << 1, 0, 0, 1;
  CHECK(square_feasible(DeformationMatrix::from_spatial(m)));
  m << 0.6, 0.8, 0, 1;
  CHECK(square_feasible(DeformationMatrix::from_spatial(m)));
  m << 2, 0, 0, 1;
  CHECK_FALSE(square_feasible(DeformationMatrix::from_spatial(m)));
  m << 1.6, 0, 0, 0;
  CHECK_THROWS_AS(solve_betas(DeformationMatrix::from_spatial(m), kSquare, flat_taus(kSquare)), CoinInfeasible);
}

TEST_CASE("square feasibility is exactly the unit-row condition") {
  for (int n = 0; n < 1000; ++n) {
    const double a = test::uniform(-kPi, kPi), b = test::uniform(-kPi, kPi);
    Mat2 unit;
    unit << std::cos(a), std::sin(a), std::cos(b), std::sin(b);
    CHECK(square_feasible(DeformationMatrix::from_spatial(unit)));
    // Direct solve of Lambda^j_k sigma^k = beta^j: n^j is row j.
    const BetaTriple sol = solve_betas(DeformationMatrix::from_spatial(unit), kSquare, flat_taus(kSquare));
    CHECK(std::abs(sol.n[0].n.norm() - 1.0) < 1e-12);
    CHECK(std::abs(sol.n[1].n.norm() - 1.0) < 1e-12);
    CHECK(c1_gap(unit, kSquare, vectors(sol)) < 1e-12);

    Mat2 bad = unit;
    const int row = n % 2;
    double scale = test::uniform(0.2, 1.8);
    if (std::abs(scale - 1.0) < 1e-3) scale = 1.5;
    bad.row(row) *= scale;
    CHECK_FALSE(square_feasible(DeformationMatrix::from_spatial(bad)));
    CHECK(std::abs(bad.row(row).norm() - 1.0) > 1e-10);
    CHECK_THROWS_AS(solve_betas(DeformationMatrix::from_spatial(bad), kSquare, flat_taus(kSquare)), CoinInfeasible);
  }
}

TEST_CASE("honeycomb solver handles deformations the square lattice cannot") {
  for (int n = 0; n < 100; ++n) {
    const Mat2 l = random_feasible_hex();
    if (std::abs(l.row(0).norm() - 1.0) < 1e-6 && std::abs(l.row(1).norm() - 1.0) < 1e-6) continue;
    CHECK_FALSE(square_feasible(DeformationMatrix::from_spatial(l)));
    const BetaTriple b = solve_betas(DeformationMatrix::from_spatial(l), kHex, flat_taus(kHex));
    CHECK(c1_gap(l, kHex, vectors(b)) < 1e-10);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(b.n[i].n.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("infeasible deformations") {
  Mat2 m;
  m << 2.5, 0, 0, 1;
  CHECK_THROWS_AS(solve_betas(DeformationMatrix::from_spatial(m), kHex, flat_taus(kHex)), CoinInfeasible);
  DeformationMatrix boosted = DeformationMatrix::identity();
  boosted.lambda(0, 0) = 0.1;
  CHECK_THROWS_AS(solve_betas(boosted, kHex, flat_taus(kHex)), CoinInfeasible);
  // Inside the l2 bound on both rows but jointly unreachable.
  m << 1.99, 0, 0, 1.72;
  CHECK_THROWS_AS(solve_betas(DeformationMatrix::from_spatial(m), kHex, flat_taus(kHex)), CoinNoSolution);
}

TEST_CASE("angles from beta") {
  CoinAngles a = angles_from_beta({Vec3(0, 0, 1)});
  CHECK(a.theta == 0.0);
  CHECK(a.phi == 0.0);
  a = angles_from_beta({Vec3(1, 0, 0)});
  CHECK(a.theta == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(a.phi == 0.0);
  const Vec3 n(2.0 / 3.0, 0.0, std::sqrt(5.0) / 3.0);
  a = angles_from_beta({n});
  CHECK(a.theta == doctest::Approx(0.72973).epsilon(1e-5));
  CHECK(a.phi == 0.0);
  CHECK((from_angles(a) - n).cwiseAbs().maxCoeff() < 1e-12);
  a = angles_from_beta({Vec3(0, 0, -1)});
  CHECK(a.theta == doctest::Approx(kPi));
  CHECK(a.phi == 0.0);
  for (int k = 0; k < 200; ++k) {
    const Vec3 r = Vec3(test::uniform(-1, 1), test::uniform(-1, 1), test::uniform(-1, 1)).normalized();
    const CoinAngles c = angles_from_beta({r});
    CHECK(c.theta >= 0.0);
    CHECK(c.theta <= kPi);
    CHECK(c.phi > -kPi);
    CHECK(c.phi <= kPi);
    CHECK((from_angles(c) - r).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((beta_from_angles(c) - r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("unitary from angles") {
  CHECK(test::max_abs(unitary_from_angles({0.0, 0.0}) - Mat2c::Identity()) == 0.0);
  const Mat2c u = unitary_from_angles({kPi / 2, 0.0});
  const double r = 1.0 / std::sqrt(2.0);
  Mat2c expected;
  expected << r, r, -r, r;
  CHECK(test::max_abs(u - expected) < 1e-15);
  CHECK(test::max_abs(u.adjoint() * pauli_z() * u - pauli_x()) < 1e-15);
  for (int k = 0; k < 500; ++k) {
    const CoinAngles a{test::uniform(0, kPi), test::uniform(-kPi, kPi)};
    const Mat2c v = unitary_from_angles(a);
    CHECK(test::max_abs(v.adjoint() * v - Mat2c::Identity()) < 1e-15);
    CHECK(test::max_abs(v.adjoint() * pauli_z() * v - pauli_of(from_angles(a))) < 1e-15);
  }
}

TEST_CASE("gamma field") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 16, 16, 0.1);
  AngleGrid ag{g, std::vector<std::array<CoinAngles, 3>>(g.size())};
  SUBCASE("constant phi") {
    for (auto& s : ag.angles) s = {CoinAngles{0.4, 1.0}, CoinAngles{1.1, -2.0}, CoinAngles{2.0, 3.0}};
    for (const auto& gm : gamma_field(ag, kHex))
      for (double v : gm) CHECK(v == 0.0);
  }
  SUBCASE("equatorial coins") {
    for (std::size_t i = 0; i < g.size(); ++i)
      for (int d = 0; d < 3; ++d) ag.angles[i][d] = {kPi / 2, test::uniform(-kPi, kPi)};
    for (const auto& gm : gamma_field(ag, kHex))
      for (double v : gm) CHECK(std::abs(v) < 1e-15);
  }
  SUBCASE("linear phase ramp") {
    const double kappa = 0.1;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec2 x = g.position(i);
      for (int d = 0; d < 3; ++d) ag.angles[i][d] = {0.5, std::remainder(kappa * x.x(), 2 * kPi)};
    }
    const auto gm = gamma_field(ag, kHex);
    const double expected0 = -0.5 * std::cos(0.5) * kappa * kHex.u[0].x();
    CHECK(expected0 == doctest::Approx(-0.04388).epsilon(1e-4));
    for (int b = 1; b < g.n2() - 1; ++b)
      for (int a = 1; a < g.n1() - 1; ++a) {
        const auto& v = gm[g.index(a, b)];
        for (int d = 0; d < 3; ++d)
          CHECK(v[d] == doctest::Approx(-0.5 * std::cos(0.5) * kappa * kHex.u[d].x()).epsilon(1e-10));
      }
  }
  SUBCASE("phase differences ignore 2 pi jumps") {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec2 x = g.position(i);
      const double phi = std::remainder(3.0 + 0.5 * x.y(), 2 * kPi);
      ag.angles[i] = {CoinAngles{0.3, phi}, CoinAngles{0.3, phi}, CoinAngles{0.3, phi}};
    }
    const auto gm = gamma_field(ag, kHex);
    for (int b = 1; b < g.n2() - 1; ++b)
      for (int a = 1; a < g.n1() - 1; ++a)
        for (int d = 0; d < 3; ++d)
          CHECK(gm[g.index(a, b)][d] ==
                doctest::Approx(-0.5 * std::cos(0.3) * 0.5 * kHex.u[d].y()).epsilon(1e-10));
  }
}

TEST_CASE("compiled conformal coins satisfy the duality conditions") {
  const auto fam = MetricFamily::conformal(MetricExpression::parse("1+0.3*sin(x)*sin(y)"));
  const SiteGrid g(SiteGrid::Basis::hexagonal, 24, 24, 0.25);
  const CoinField c = compile_coins(fam, g, kHex, 0.0);
  double c1 = 0.0, c2 = 0.0, unit = 0.0;
  for (std::size_t s = 0; s < c.size(); ++s) {
    const Vec2 x = g.position(s);
    const Mat2 l = fam.deformation({0.0, x.x(), x.y()}).spatial();
    std::array<Vec3, 3> n;
    for (int i = 0; i < 3; ++i) {
      n[i] = from_angles(c[s].angles[i]);
      const Mat2c b = c[s].unitary[i].adjoint() * pauli_z() * c[s].unitary[i];
      // Eigenvalues +-1: trace 0 and determinant -1.
      c2 = std::max({c2, std::abs(b.trace()), std::abs(b.determinant() + 1.0)});
      unit = std::max(unit, test::max_abs(c[s].unitary[i].adjoint() * c[s].unitary[i] - Mat2c::Identity()));
    }
    c1 = std::max(c1, c1_gap(l, kHex, n));
  }
  CHECK(c1 < 1e-10);
  CHECK(c2 < 1e-12);
  CHECK(unit < 1e-12);
  CHECK(c.c1_residual() < 1e-10);
  CHECK(c.c2_residual() < 1e-12);
  CHECK(c.unitarity_residual() < 1e-12);
}

TEST_CASE("flat metric compiles to constant coins without phases") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 12, 10, 0.1);
  const CoinField c = compile_coins(MetricFamily::flat(), g, kHex, 0.0);
  for (std::size_t s = 0; s < c.size(); ++s)
    for (int i = 0; i < 3; ++i) {
      CHECK(c[s].gamma[i] == 0.0);
      CHECK(c[s].unitary[i] == c[0].unitary[i]);
    }
  const BetaTriple t = flat_taus(kHex);
  for (int i = 0; i < 3; ++i) CHECK((from_angles(c[0].angles[i]) - t.n[i].n).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("continuation gives coin fields whose jumps shrink with the spacing") {
  const auto fam = MetricFamily::conformal(MetricExpression::parse("1+0.3*sin(x)*sin(y)"));
  auto max_jump = [&](int n, double eps) {
    const SiteGrid g(SiteGrid::Basis::hexagonal, n, n, eps);
    const CoinField c = compile_coins(fam, g, kHex, 0.0);
    double worst = 0.0;
    for (int b = 0; b < n; ++b)
      for (int a = 0; a + 1 < n; ++a)
        for (int i = 0; i < 3; ++i)
          worst = std::max(worst, (from_angles(c[g.index(a + 1, b)].angles[i]) -
                                   from_angles(c[g.index(a, b)].angles[i]))
                                      .norm());
    return worst;
  };
  const double coarse = max_jump(16, 0.4), fine = max_jump(32, 0.2);
  CHECK(fine < 0.6 * coarse);
  CHECK(fine > 0.4 * coarse);
}

TEST_CASE("parallel band compilation equals the sequential sweep") {
  const auto fam = MetricFamily::conformal(MetricExpression::parse("1+0.3*sin(x)*sin(y)"));
  for (int band : {0, 3, 7}) {
    const SiteGrid g(SiteGrid::Basis::hexagonal, 20, 21, 0.3);
    const CoinField seq = compile_coins(fam, g, kHex, 0.0);
    CompileStats stats;
    const CoinField par = compile_coins(fam, g, kHex, 0.0, {true, band}, &stats);
    CHECK(stats.used_parallel);
    CHECK_FALSE(stats.fell_back);
    for (std::size_t s = 0; s < seq.size(); ++s)
      for (int i = 0; i < 3; ++i) {
        CHECK(seq[s].unitary[i] == par[s].unitary[i]);
        CHECK(seq[s].angles[i].theta == par[s].angles[i].theta);
        CHECK(seq[s].angles[i].phi == par[s].angles[i].phi);
        CHECK(seq[s].gamma[i] == par[s].gamma[i]);
      }
  }
}

TEST_CASE("square lattice compile") {
  const SiteGrid g(SiteGrid::Basis::square, 8, 8, 0.1);
  Mat2 rot;
  rot << 0.6, 0.8, -0.8, 0.6;
  const CoinField c = compile_coins(MetricFamily::homogeneous(rot), g, kSquare, 0.0);
  CHECK(c.c1_residual() < 1e-12);
  CHECK(c.c2_residual() < 1e-12);
  Mat2 stretched;
  stretched << 2.5, 0, 0, 1;
  CHECK_THROWS_AS(compile_coins(MetricFamily::homogeneous(stretched), g, kSquare, 0.0), CoinInfeasible);
}
