#include <doctest.h>

#include <functional>

#include "cqw/harness.hpp"
#include "cqw/initial_state.hpp"
#include "cqw/oracle.hpp"
#include "support.hpp"

using namespace cqw;

namespace {

// Reciprocal wavevector of signed mode (nu1, nu2), computed from the site positions.
Vec2 reciprocal(const SiteGrid& g, int nu1, int nu2) {
  const Vec2 a1 = g.position(1.0, 0.0), a2 = g.position(0.0, 1.0);
  Mat2 m;
  m << a1.x(), a1.y(), a2.x(), a2.y();
  return m.inverse() * Vec2(2 * kPi * nu1 / g.n1(), 2 * kPi * nu2 / g.n2());
}

Vec2 identity_k(const SiteGrid&, const Vec2& k) { return k; }

// Effective wavevector of the 4th-order central-difference stencil.
Vec2 stencil_k(const SiteGrid& g, const Vec2& k) {
  auto symbol = [](double theta) { return (8.0 * std::sin(theta) - std::sin(2.0 * theta)) / 6.0; };
  const Mat2 grad = (Mat2() << g.eps() * g.e1().transpose(), g.eps() * g.e2().transpose()).finished().inverse();
  return grad * Vec2(symbol(k.dot(g.eps() * g.e1())), symbol(k.dot(g.eps() * g.e2())));
}

using Propagator = std::function<Mat2c(const Mat2c&)>;

// Naive O(N^2) DFT evolution. keff maps each mode wavevector to the one its
// generator actually sees; prop turns the mode Hamiltonian into the evolution
// matrix (exact exponential by default).
SpinorField naive_flat_evolve(const SpinorField& f, double m, double T,
                              Vec2 (*keff)(const SiteGrid&, const Vec2&) = identity_k, const Propagator& prop = {}) {
  const SiteGrid& g = f.grid;
  SpinorField out(g);
  const double n = static_cast<double>(g.size());
  for (int nu2 = -(g.n2() - 1) / 2; nu2 <= g.n2() / 2; ++nu2)
    for (int nu1 = -(g.n1() - 1) / 2; nu1 <= g.n1() / 2; ++nu1) {
      const Vec2 k = reciprocal(g, nu1, nu2);
      Eigen::Vector2cd c = Eigen::Vector2cd::Zero();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx w = std::exp(cplx(0.0, -k.dot(g.position(i))));
        c += w * Eigen::Vector2cd(f.data[i].up, f.data[i].down);
      }
      const Vec2 q = keff(g, k);
      Mat2c h;
      h << m, cplx(q.x(), -q.y()), cplx(q.x(), q.y()), -m;
      const Eigen::Vector2cd e = (prop ? prop(h) : test::expm_taylor(h, T)) * c;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx w = std::exp(cplx(0.0, k.dot(g.position(i)))) / n;
        out.data[i].up += w * e(0);
        out.data[i].down += w * e(1);
      }
    }
  return out;
}

double max_diff(const SpinorField& a, const SpinorField& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    w = std::max({w, std::abs(a.data[i].up - b.data[i].up), std::abs(a.data[i].down - b.data[i].down)});
  return w;
}

cplx inner(const SpinorField& a, const SpinorField& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    s += std::conj(a.data[i].up) * b.data[i].up + std::conj(a.data[i].down) * b.data[i].down;
  return s;
}

// Mode e^{ik.x} s on a grid.
SpinorField mode(const SiteGrid& g, const Vec2& k, const Eigen::Vector2cd& s) {
  SpinorField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx w = std::exp(cplx(0.0, k.dot(g.position(i))));
    f.data[i] = {w * s(0), w * s(1)};
  }
  return f;
}

}  // namespace

TEST_CASE("plane wave solutions are eigenvectors") {
  for (int n = 0; n < 100; ++n) {
    const Vec2 k(test::uniform(-3, 3), test::uniform(-3, 3));
    const double m = test::uniform(-1, 2);
    for (int branch : {1, -1}) {
      const auto pw = PlaneWaveSolution::make(k, m, branch);
      CHECK(pw.energy == doctest::Approx(branch * std::sqrt(k.squaredNorm() + m * m)).epsilon(1e-14));
      CHECK((dirac_hamiltonian(k, m) * pw.spinor - pw.energy * pw.spinor).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(pw.spinor.norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  const auto zero = PlaneWaveSolution::make(Vec2::Zero(), 0.0, 1);
  CHECK(zero.spinor.norm() == doctest::Approx(1.0));
}

TEST_CASE("mode wavevectors match the reciprocal lattice") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 8, 6, 0.3);
  for (int nu1 = 0; nu1 < 8; ++nu1)
    for (int nu2 = 0; nu2 < 6; ++nu2) {
      const int s1 = nu1 > 4 ? nu1 - 8 : nu1, s2 = nu2 > 3 ? nu2 - 6 : nu2;
      CHECK((mode_wavevector(g, nu1, nu2) - reciprocal(g, s1, s2)).norm() < 1e-12);
    }
}

TEST_CASE("flat evolution examples") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 8, 8, 0.25);
  SUBCASE("zero mode under pure mass") {
    SpinorField f(g);
    for (auto& s : f.data) s = {1.0, 0.0};
    const SpinorField out = flat_evolve(f, 1.0, kPi);
    for (const auto& s : out.data) {
      CHECK(std::abs(s.up + 1.0) < 1e-12);
      CHECK(std::abs(s.down) < 1e-12);
    }
  }
  SUBCASE("massless plane wave picks up exp(-i kappa T)") {
    const Vec2 k = mode_wavevector(g, 1, 0);
    const Vec2 dir = k.normalized();
    // Positive-energy spinor of k . sigma: (1, e^{i arg k}) / sqrt 2, equal to (1, 1) / sqrt 2 along x.
    const Eigen::Vector2cd s = Eigen::Vector2cd(1.0, cplx(dir.x(), dir.y())) / std::sqrt(2.0);
    const SpinorField f = mode(g, k, s);
    const double T = 0.7;
    const SpinorField out = flat_evolve(f, 0.0, T);
    const cplx phase = std::exp(cplx(0.0, -k.norm() * T));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max({worst, std::abs(out.data[i].up - phase * f.data[i].up),
                        std::abs(out.data[i].down - phase * f.data[i].down)});
    CHECK(worst < 1e-12);
  }
  SUBCASE("square grid mode along x with spinor (1, 1)") {
    const SiteGrid sq(SiteGrid::Basis::square, 8, 8, 0.25);
    const Vec2 k = mode_wavevector(sq, 1, 0);
    CHECK(k.y() == 0.0);
    const SpinorField f = mode(sq, k, Eigen::Vector2cd(1.0, 1.0) / std::sqrt(2.0));
    const SpinorField out = flat_evolve(f, 0.0, 1.3);
    const cplx phase = std::exp(cplx(0.0, -k.x() * 1.3));
    for (std::size_t i = 0; i < sq.size(); ++i) CHECK(std::abs(out.data[i].up - phase * f.data[i].up) < 1e-12);
  }
}

TEST_CASE("flat evolution matches a naive DFT with Taylor exponentials") {
  for (auto basis : {SiteGrid::Basis::hexagonal, SiteGrid::Basis::square}) {
    const SiteGrid g(basis, 6, 5, 0.4);
    const SpinorField f = test::random_field(g);
    CHECK(max_diff(flat_evolve(f, 0.7, 1.9), naive_flat_evolve(f, 0.7, 1.9)) < 1e-12);
  }
}

TEST_CASE("flat evolution is unitary and composes") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 16, 12, 0.2);
  const SpinorField f = test::random_field(g);
  const double n0 = test::field_norm(f);
  const SpinorField a = flat_evolve(f, 0.4, 2.3);
  CHECK(std::abs(test::field_norm(a) / n0 - 1.0) < 1e-12);
  const SpinorField b = flat_evolve(flat_evolve(f, 0.4, 0.9), 0.4, 1.4);
  CHECK(max_diff(a, b) < 1e-12);
}

TEST_CASE("generator on flat plane waves") {
  SUBCASE("agrees with the continuum symbol for well-resolved k") {
    const SiteGrid g(SiteGrid::Basis::hexagonal, 640, 4, 0.1);
    const HamiltonianField h = build_generator(MetricFamily::flat(), g, 0.0, 0.3);
    const Vec2 k = mode_wavevector(g, 1, 0);
    const SpinorField f = mode(g, k, Eigen::Vector2cd(0.6, cplx(0.0, 0.8)));
    SpinorField hf(g);
    apply_generator(h, f, hf);
    const Mat2c hd = dirac_hamiltonian(k, 0.3);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Eigen::Vector2cd v = hd * Eigen::Vector2cd(f.data[i].up, f.data[i].down);
      worst = std::max({worst, std::abs(hf.data[i].up - v(0)), std::abs(hf.data[i].down - v(1))});
    }
    CHECK(worst < 1e-10);
  }
  SUBCASE("agrees with the exact stencil symbol for any k") {
    const SiteGrid g(SiteGrid::Basis::hexagonal, 12, 10, 0.3);
    const HamiltonianField h = build_generator(MetricFamily::flat(), g, 0.0, 0.5);
    auto symbol = [](double theta) { return (8.0 * std::sin(theta) - std::sin(2.0 * theta)) / 6.0; };
    const Mat2 grad = (Mat2() << g.eps() * g.e1().transpose(), g.eps() * g.e2().transpose()).finished().inverse();
    for (auto [nu1, nu2] : {std::pair{1, 0}, std::pair{3, 2}, std::pair{5, 7}}) {
      const Vec2 k = mode_wavevector(g, nu1, nu2);
      const Vec2 kab(k.dot(g.eps() * g.e1()), k.dot(g.eps() * g.e2()));
      const Vec2 keff = grad * Vec2(symbol(kab.x()), symbol(kab.y()));
      const SpinorField f = mode(g, k, Eigen::Vector2cd(1.0, cplx(0.3, -0.2)));
      SpinorField hf(g);
      apply_generator(h, f, hf);
      const Mat2c hd = dirac_hamiltonian(keff, 0.5);
      double worst = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Eigen::Vector2cd v = hd * Eigen::Vector2cd(f.data[i].up, f.data[i].down);
        worst = std::max({worst, std::abs(hf.data[i].up - v(0)), std::abs(hf.data[i].down - v(1))});
      }
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("generator coefficients") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 8, 8, 0.2);
  const HamiltonianField flat = build_generator(MetricFamily::flat(), g, 0.0, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(test::max_abs(flat.bx[i] - pauli_x()) < 1e-15);
    CHECK(test::max_abs(flat.by[i] - pauli_y()) < 1e-15);
    CHECK(flat.mass_tilde[i] == 1.0);
  }
  const HamiltonianField conf = build_generator(MetricFamily::conformal(MetricExpression::parse("2")), g, 0.0, 1.0);
  CHECK(test::max_abs(conf.bx[0] - 0.5 * pauli_x()) < 1e-15);
  CHECK(test::max_abs(conf.by[0] - 0.5 * pauli_y()) < 1e-15);
  CHECK(cfl_limit(conf) == doctest::Approx(0.5 * 0.2 / 0.5));
  const HamiltonianField wavy =
      build_generator(MetricFamily::conformal(MetricExpression::parse("1+0.3*sin(x)*sin(y)")), g, 0.0, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(test::max_abs(wavy.bx[i] - wavy.bx[i].adjoint()) < 1e-15);
    CHECK(test::max_abs(wavy.by[i] - wavy.by[i].adjoint()) < 1e-15);
  }
}

TEST_CASE("curved generator is Hermitian and matches the Cartesian reference") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 24, 20, 0.2);
  const auto fam = MetricFamily::custom(MetricExpression::parse("1+0.2*cos(x)"), MetricExpression::parse("-1-0.3*sin(y)^2"),
                                        MetricExpression::parse("0.1*sin(x+y)"), MetricExpression::parse("-1.2"));
  const HamiltonianField h = build_generator(fam, g, 0.0, 0.8);
  for (int n = 0; n < 5; ++n) {
    SpinorField phi = test::random_field(g), chi = test::random_field(g);
    normalize(phi);
    normalize(chi);
    SpinorField hphi(g), hchi(g);
    apply_generator(h, phi, hphi);
    apply_generator(h, chi, hchi);
    CHECK(std::abs(inner(phi, hchi) - inner(hphi, chi)) * g.cell_area() < 1e-12);
    const SpinorField ref = apply_generator_reference(h, chi);
    CHECK(max_diff(ref, hchi) < 1e-11 * std::max(1.0, max_diff(hchi, SpinorField(g))));
  }
}

TEST_CASE("rk4 integrator") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 32, 32, 0.25);
  GaussianPacket p;
  p.center = g.position(16.0, 16.0);
  p.width = 1.2;
  p.momentum = Vec2(0.5, 0.0);
  p.spinor = Eigen::Vector2cd(1.0, 0.0);
  const SpinorField chi0 = gaussian(g, p);
  SUBCASE("zero time returns the initial state") {
    const SpinorField out = evolve_rk4(chi0, MetricFamily::flat(), 0.5, 0.0, 0.0);
    CHECK(out.data == chi0.data);
  }
  SUBCASE("flat metric agrees with the exact semi-discrete evolution") {
    const SiteGrid s(SiteGrid::Basis::hexagonal, 16, 14, 0.5);
    GaussianPacket q = p;
    q.center = s.position(8.0, 7.0);
    q.width = 1.5;
    const SpinorField c0 = gaussian(s, q);
    const double dt = 0.1 * cfl_limit(build_generator(MetricFamily::flat(), s, 0.0, 0.5));
    Rk4Report rep;
    const SpinorField a = evolve_rk4(c0, MetricFamily::flat(), 0.5, 1.0, dt, 1e-8, &rep);
    CHECK(rep.steps > 0);
    CHECK(rep.norm_drift < 1e-8);
    // Per mode, one RK4 step is the degree-4 Taylor polynomial of exp(-i H dt).
    const Propagator rk4 = [&](const Mat2c& h) {
      const Mat2c z = cplx(0.0, -rep.dt) * h;
      const Mat2c r = Mat2c::Identity() + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
      Mat2c out = Mat2c::Identity();
      for (int n = 0; n < rep.steps; ++n) out = r * out;
      return out;
    };
    CHECK(rep.steps * rep.dt == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(l2_distance(a, naive_flat_evolve(c0, 0.5, 1.0, stencil_k, rk4)) < 1e-12);
    // Time stepping error alone stays far below the stencil error.
    const SpinorField semi = naive_flat_evolve(c0, 0.5, 1.0, stencil_k);
    const SpinorField exact = flat_evolve(c0, 0.5, 1.0);
    CHECK(l2_distance(a, semi) < 1e-3 * l2_distance(semi, exact));
  }
  SUBCASE("step halving shrinks the error by about 16") {
    const auto fam = MetricFamily::conformal(MetricExpression::parse("1+0.1*sin(x)*sin(y)"));
    const double dt = 0.4 * cfl_limit(build_generator(fam, g, 0.0, 0.5));
    const SpinorField a = evolve_rk4(chi0, fam, 0.5, 0.5, dt);
    const SpinorField b = evolve_rk4(chi0, fam, 0.5, 0.5, dt / 2);
    const SpinorField c = evolve_rk4(chi0, fam, 0.5, 0.5, dt / 4);
    const double ratio = l2_distance(a, b) / l2_distance(b, c);
    CHECK(ratio > 16 * 0.7);
    CHECK(ratio < 16 * 1.3);
  }
  SUBCASE("explicit steps above the CFL limit are rejected") {
    const double cfl = cfl_limit(build_generator(MetricFamily::flat(), g, 0.0, 0.5));
    CHECK_THROWS_AS(evolve_rk4(chi0, MetricFamily::flat(), 0.5, 1.0, 1.5 * cfl), OracleError);
  }
  SUBCASE("drift budget violations are reported") {
    const double cfl = cfl_limit(build_generator(MetricFamily::flat(), g, 0.0, 0.5));
    SpinorField rough = test::random_field(g);
    normalize(rough);
    CHECK_THROWS_AS(evolve_rk4(rough, MetricFamily::flat(), 0.5, 2.0, cfl, 1e-14), OracleError);
  }
}

TEST_CASE("chi substitution") {
  const SiteGrid g(SiteGrid::Basis::hexagonal, 8, 8, 0.3);
  const SpinorField psi = test::random_field(g);
  CHECK(max_diff(chi_from_psi(psi, MetricFamily::flat()), psi) == 0.0);
  const auto two = MetricFamily::conformal(MetricExpression::parse("2"));
  CHECK(chi_factor(two, {0.0, 0.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-15));
  const SpinorField chi = chi_from_psi(psi, two);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(chi.data[i].up - 2.0 * psi.data[i].up) < 1e-15);
  const auto wavy = MetricFamily::custom(MetricExpression::parse("1.5+sin(x)"), MetricExpression::parse("-2-cos(y)"),
                                         MetricExpression::parse("0.2"), MetricExpression::parse("-1"));
  CHECK(max_diff(psi_from_chi(chi_from_psi(psi, wavy), wavy), psi) < 1e-14);
  // Independent evaluation: g^{1/4} (e^t_0)^{1/2} with e^t_0 = 1 / sqrt(g_tt).
  const SpacetimePoint p{0.0, 0.4, -0.3};
  const Metric2p1 m = wavy.metric_at(p);
  CHECK(chi_factor(wavy, p) == doctest::Approx(std::pow(m.abs_det(), 0.25) / std::pow(m.g_tt(), 0.25)).epsilon(1e-14));
}
