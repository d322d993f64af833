#include "cqw/harness.hpp"

#include <algorithm>
#include <cmath>

#include "cqw/format.hpp"
#include "cqw/reduce.hpp"

namespace cqw {

namespace {

double sum_diff2(const std::vector<Spinor>& a, const std::vector<Spinor>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = std::norm(a[i].up - b[i].up) + std::norm(a[i].down - b[i].down);
  return pairwise_sum(d);
}

int exact_ratio(double coarse, double fine) {
  const long r = std::lround(coarse / fine);
  if (r < 1 || std::abs(r * fine - coarse) > 1e-9 * coarse)
    throw ShapeMismatch("grid spacings " + format_short(coarse) + " and " + format_short(fine) +
                        " are not integer multiples");
  return static_cast<int>(r);
}

struct Sample {
  double a;
  double b;
  double up;
  double down;
};

double circular_mean(const std::vector<Sample>& s, bool axis_b, int n, double total) {
  std::vector<double> re(s.size()), im(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double c = axis_b ? s[i].b : s[i].a;
    const double rho = s[i].up + s[i].down;
    re[i] = rho * std::cos(2.0 * kPi * c / n);
    im[i] = rho * std::sin(2.0 * kPi * c / n);
  }
  const double x = pairwise_sum(re), y = pairwise_sum(im);
  if (std::hypot(x, y) < 1e-12 * std::max(total, 1e-300)) return 0.5 * n;
  double m = std::atan2(y, x) * n / (2.0 * kPi);
  if (m < 0.0) m += n;
  return m;
}

double wrap_centered(double v, int n) {
  v = std::fmod(v, static_cast<double>(n));
  if (v >= 0.5 * n) v -= n;
  if (v < -0.5 * n) v += n;
  return v;
}

Observables observe(const SiteGrid& g, const std::vector<Sample>& s, double weight) {
  Observables o;
  std::vector<double> up(s.size()), down(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    up[i] = s[i].up;
    down[i] = s[i].down;
  }
  const double total = pairwise_sum(up) + pairwise_sum(down);
  o.p_up = pairwise_sum(up) * weight;
  o.p_down = pairwise_sum(down) * weight;
  o.norm = total * weight;
  const double ma = circular_mean(s, false, g.n1(), total);
  const double mb = circular_mean(s, true, g.n2(), total);
  o.mean = g.position(ma, mb);
  std::vector<double> r2(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double da = wrap_centered(s[i].a - ma, g.n1());
    const double db = wrap_centered(s[i].b - mb, g.n2());
    r2[i] = (s[i].up + s[i].down) * g.position(da, db).squaredNorm();
  }
  o.spread = total > 0.0 ? std::sqrt(pairwise_sum(r2) / total) : 0.0;
  return o;
}

}  // namespace

double l2_distance(const SpinorField& a, const SpinorField& b) {
  if (!(a.grid == b.grid)) throw ShapeMismatch("l2_distance of fields on different grids");
  return std::sqrt(sum_diff2(a.data, b.data) * a.weight());
}

double l2_distance(const EdgeField& a, const EdgeField& b) {
  if (a.n1 != b.n1 || a.n2 != b.n2 || a.eps != b.eps)
    throw ShapeMismatch("l2_distance of edge fields with different geometry");
  return std::sqrt(sum_diff2(a.data, b.data) * a.weight());
}

double l2_norm(const SpinorField& a) { return std::sqrt(sum_norm2(a.data) * a.weight()); }
double l2_norm(const EdgeField& a) { return std::sqrt(sum_norm2(a.data) * a.weight()); }

SpinorField restrict_to(const SpinorField& fine, const SiteGrid& coarse) {
  if (fine.grid.basis() != coarse.basis()) throw ShapeMismatch("restriction between different lattice bases");
  const int r = exact_ratio(coarse.eps(), fine.grid.eps());
  if (fine.grid.n1() != r * coarse.n1() || fine.grid.n2() != r * coarse.n2())
    throw ShapeMismatch("restriction between grids covering different domains");
  SpinorField out(coarse);
  for (int b = 0; b < coarse.n2(); ++b)
    for (int a = 0; a < coarse.n1(); ++a) out.at(a, b) = fine.at(r * a, r * b);
  return out;
}

EdgeField restrict_to_edges(const SpinorField& fine, const TriangularWalk& walk) {
  const SiteGrid cg = walk.coin_grid();
  if (fine.grid.basis() != SiteGrid::Basis::hexagonal) throw ShapeMismatch("edges need a hexagonal site grid");
  const int r = exact_ratio(cg.eps(), fine.grid.eps());
  if (fine.grid.n1() != r * cg.n1() || fine.grid.n2() != r * cg.n2())
    throw ShapeMismatch("restriction between grids covering different domains");
  EdgeField out = walk.make_field();
  for (int b = 0; b < walk.n2(); ++b)
    for (int a = 0; a < walk.n1(); ++a)
      for (int k = 0; k < 3; ++k) {
        const auto [p, q] = out.grid_point(a, b, k);
        out.at(a, b, k) = fine.at(r * p, r * q);
      }
  return out;
}

Observables observables(const SpinorField& psi) {
  const SiteGrid& g = psi.grid;
  std::vector<Sample> s(psi.data.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = {static_cast<double>(i % g.n1()), static_cast<double>(i / g.n1()), std::norm(psi.data[i].up),
            std::norm(psi.data[i].down)};
  return observe(g, s, psi.weight());
}

Observables observables(const EdgeField& psi) {
  const SiteGrid g = psi.coin_grid();
  std::vector<Sample> s(psi.data.size());
  for (std::size_t e = 0; e < s.size(); ++e) {
    const std::size_t site = psi.grid_index(e);
    s[e] = {static_cast<double>(site % g.n1()), static_cast<double>(site / g.n1()), std::norm(psi.data[e].up),
            std::norm(psi.data[e].down)};
  }
  return observe(g, s, psi.weight());
}

Mat2c bloch_matrix(const SiteCoins& coins, const LatticeDirections& dirs, double mass_tilde, double eps,
                   const Vec2& k) {
  Mat2c m = Mat2c::Identity();
  for (int i = 0; i < dirs.count; ++i) {
    const double phase = eps * k.dot(dirs.u[i]);
    Mat2c t = Mat2c::Zero();
    t(0, 0) = std::polar(1.0, -phase);
    t(1, 1) = std::polar(1.0, phase);
    const Mat2c f = coins.unitary[i].adjoint() * t * coins.unitary[i] * std::polar(1.0, -eps * coins.gamma[i]);
    m = f * m;
  }
  Mat2c mass = Mat2c::Zero();
  mass(0, 0) = std::polar(1.0, -mass_tilde * eps);
  mass(1, 1) = std::polar(1.0, mass_tilde * eps);
  return mass * m;
}

std::array<double, 2> dispersion_extract(const SiteCoins& coins, const LatticeDirections& dirs, double mass_tilde,
                                         double eps, const Vec2& k) {
  const Mat2c m = bloch_matrix(coins, dirs, mass_tilde, eps, k);
  const cplx half_tr = 0.5 * (m(0, 0) + m(1, 1));
  const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const cplx disc = std::sqrt(half_tr * half_tr - det);
  std::array<double, 2> w{-std::arg(half_tr + disc), -std::arg(half_tr - disc)};
  std::sort(w.begin(), w.end());
  return w;
}

void fit_convergence(ConvergenceReport& report) {
  const std::size_t n = report.points.size();
  if (n < 2) throw Error("a convergence fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : report.points) {
    const double x = std::log(p.eps), y = std::log(p.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  report.slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - report.slope * sx) / n;
  double r2 = 0.0;
  for (const auto& p : report.points) {
    const double d = std::log(p.error) - (intercept + report.slope * std::log(p.eps));
    r2 += d * d;
  }
  report.residual = std::sqrt(r2 / n);
}

int grid_points(const StudySetup& setup, double eps) {
  const long n = std::lround(setup.domain / eps);
  if (n < 4 || std::abs(n * eps - setup.domain) > 1e-9 * setup.domain)
    throw Error("domain " + format_short(setup.domain) + " is not a multiple of eps = " + format_short(eps));
  if (setup.lattice == LatticeKind::triangular && n % 2 != 0)
    throw Error("triangular walk needs an even number of grid points per axis");
  return static_cast<int>(n);
}

SiteGrid study_grid(const StudySetup& setup, double eps) {
  const int n = grid_points(setup, eps);
  const auto basis = setup.lattice == LatticeKind::square ? SiteGrid::Basis::square : SiteGrid::Basis::hexagonal;
  return SiteGrid(basis, n, n, eps);
}

SpinorField study_initial_sites(const StudySetup& setup, const SiteGrid& grid) {
  SpinorField chi = sample_sites(grid, [&](const Vec2& x) {
    return scale(chi_factor(setup.metric, {0.0, x.x(), x.y()}), setup.packet(grid, x));
  });
  normalize(chi);
  return chi;
}

EdgeField study_initial_edges(const StudySetup& setup, const TriangularWalk& walk) {
  const SiteGrid g = walk.coin_grid();
  EdgeField chi = sample_edges(walk, [&](const Vec2& x) {
    return scale(chi_factor(setup.metric, {0.0, x.x(), x.y()}), setup.packet(g, x));
  });
  normalize(chi);
  return chi;
}

SpinorField oracle_solution(const StudySetup& setup, double h) {
  const SiteGrid g = study_grid(setup, h);
  const SpinorField chi0 = study_initial_sites(setup, g);
  if (setup.metric.is_flat()) return flat_evolve(chi0, setup.mass, setup.T);
  return evolve_rk4(chi0, setup.metric, setup.mass, setup.T, 0.0);
}

namespace {

int step_count(const StudySetup& setup, double eps) {
  const long n = std::lround(setup.T / eps);
  if (std::abs(n * eps - setup.T) > 1e-9 * std::max(1.0, setup.T))
    throw Error("T = " + format_short(setup.T) + " is not a multiple of eps = " + format_short(eps));
  return static_cast<int>(n);
}

}  // namespace

SpinorField run_site_walk(const StudySetup& setup, double eps) {
  if (setup.lattice == LatticeKind::triangular) throw Error("run_site_walk called for a triangular setup");
  const SiteGrid g = study_grid(setup, eps);
  EvolveOptions opt;
  opt.steps = step_count(setup, eps);
  opt.compile = setup.compile;
  return evolve(study_initial_sites(setup, g), setup.metric, {eps, setup.mass}, opt);
}

EdgeField run_triangular_walk(const StudySetup& setup, double eps) {
  const int n = grid_points(setup, eps);
  const TriangularWalk walk(n / 2, n / 2, eps);
  EvolveOptions opt;
  opt.steps = step_count(setup, eps);
  opt.compile = setup.compile;
  return walk.evolve(study_initial_edges(setup, walk), setup.metric, {eps, setup.mass}, opt);
}

ConvergenceReport convergence_study(const StudySetup& setup, StudyFields* fields) {
  const auto& eps = setup.epsilons;
  if (eps.size() < 3) throw Error("a convergence study needs at least three eps values");
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (std::abs(eps[i - 1] / eps[i] - 2.0) > 1e-9) throw Error("eps values must halve successively");

  ConvergenceReport report;
  report.lattice = to_string(setup.lattice);
  report.metric = setup.metric.name();
  report.T = setup.T;
  report.domain = setup.domain;
  const double h = std::min(eps.front() / 4.0, eps.back());
  report.oracle_spacing = h;

  const SpinorField oracle = oracle_solution(setup, h);
  const SpinorField oracle_coarse = oracle_solution(setup, 2.0 * h);
  report.oracle_self_error = l2_distance(restrict_to(oracle, oracle_coarse.grid), oracle_coarse);

  for (double e : eps) {
    double err = 0.0;
    if (setup.lattice == LatticeKind::triangular) {
      EdgeField w = run_triangular_walk(setup, e);
      const int n = grid_points(setup, e);
      err = l2_distance(w, restrict_to_edges(oracle, TriangularWalk(n / 2, n / 2, e)));
      if (fields) fields->edges.push_back(std::move(w));
    } else {
      SpinorField w = run_site_walk(setup, e);
      err = l2_distance(w, restrict_to(oracle, w.grid));
      if (fields) fields->sites.push_back(std::move(w));
    }
    report.points.push_back({e, err});
  }
  double min_err = report.points.front().error;
  for (const auto& p : report.points) min_err = std::min(min_err, p.error);
  if (report.oracle_self_error > 0.1 * min_err)
    throw OracleError("oracle self-convergence error " + format_short(report.oracle_self_error) +
                      " is not an order of magnitude below the walk error " + format_short(min_err));
  fit_convergence(report);
  return report;
}

}  // namespace cqw
