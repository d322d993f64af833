#include "cqw/oracle.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "cqw/format.hpp"
#include "cqw/reduce.hpp"

namespace cqw {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// FFTW owns its buffers; plans are created and destroyed under the planner lock.
class Dft2 {
 public:
  Dft2(int n1, int n2) : n_(static_cast<std::size_t>(n1) * n2) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(n2, n1, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n2, n1, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Dft2() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Dft2(const Dft2&) = delete;
  Dft2& operator=(const Dft2&) = delete;

  cplx* data() { return reinterpret_cast<cplx*>(buf_); }
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }

 private:
  std::size_t n_;
  fftw_complex* buf_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

int signed_mode(int nu, int n) { return nu > n / 2 ? nu - n : nu; }

double hermitian_norm(const Mat2c& m) {
  const double mean = 0.5 * (m(0, 0).real() + m(1, 1).real());
  const double half = 0.5 * (m(0, 0).real() - m(1, 1).real());
  const double rad = std::sqrt(half * half + std::norm(m(0, 1)));
  return std::max(std::abs(mean + rad), std::abs(mean - rad));
}

inline Spinor axpy(cplx a, const Spinor& x, const Spinor& y) { return {a * x.up + y.up, a * x.down + y.down}; }

Spinor stencil(const std::vector<Spinor>& f, std::size_t m2, std::size_t m1, std::size_t p1, std::size_t p2) {
  constexpr double c = 1.0 / 12.0;
  return {c * (-f[p2].up + 8.0 * f[p1].up - 8.0 * f[m1].up + f[m2].up),
          c * (-f[p2].down + 8.0 * f[p1].down - 8.0 * f[m1].down + f[m2].down)};
}

}  // namespace

Mat2c dirac_hamiltonian(const Vec2& k, double m) {
  Mat2c h;
  h << m, cplx(k.x(), -k.y()), cplx(k.x(), k.y()), -m;
  return h;
}

PlaneWaveSolution PlaneWaveSolution::make(const Vec2& k, double m, int branch) {
  if (branch != 1 && branch != -1) throw Error("plane-wave branch must be +1 or -1");
  PlaneWaveSolution s;
  s.k = k;
  s.branch = branch;
  s.energy = branch * std::sqrt(k.squaredNorm() + m * m);
  const cplx kp(k.x(), k.y());
  // (H - E) v = 0 has the two candidate solutions below; take the better conditioned one.
  Eigen::Vector2cd v1(std::conj(kp), s.energy - m);
  Eigen::Vector2cd v2(s.energy + m, kp);
  Eigen::Vector2cd v = v1.norm() >= v2.norm() ? v1 : v2;
  if (v.norm() == 0.0) v = branch > 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
  s.spinor = v / v.norm();
  return s;
}

Vec2 mode_wavevector(const SiteGrid& grid, int nu1, int nu2) {
  Mat2 e;
  e.row(0) = grid.e1().transpose();
  e.row(1) = grid.e2().transpose();
  const Vec2 rhs(2.0 * kPi * signed_mode(nu1, grid.n1()) / (grid.n1() * grid.eps()),
                 2.0 * kPi * signed_mode(nu2, grid.n2()) / (grid.n2() * grid.eps()));
  return e.inverse() * rhs;
}

SpinorField flat_evolve(const SpinorField& psi0, double m, double T) {
  const SiteGrid& g = psi0.grid;
  const std::size_t n = g.size();
  Dft2 up(g.n1(), g.n2()), down(g.n1(), g.n2());
  for (std::size_t i = 0; i < n; ++i) {
    up.data()[i] = psi0.data[i].up;
    down.data()[i] = psi0.data[i].down;
  }
  up.forward();
  down.forward();
  const int n1 = g.n1(), n2 = g.n2();
#pragma omp parallel for schedule(static)
  for (int nu2 = 0; nu2 < n2; ++nu2) {
    for (int nu1 = 0; nu1 < n1; ++nu1) {
      const std::size_t i = static_cast<std::size_t>(nu2) * n1 + nu1;
      const Vec2 k = mode_wavevector(g, nu1, nu2);
      const Mat2c h = dirac_hamiltonian(k, m);
      const double e = std::sqrt(k.squaredNorm() + m * m);
      Mat2c u = std::cos(e * T) * Mat2c::Identity();
      if (e > 0.0) u -= cplx(0.0, std::sin(e * T) / e) * h;
      const Spinor s = mul(u, Spinor{up.data()[i], down.data()[i]});
      up.data()[i] = s.up;
      down.data()[i] = s.down;
    }
  }
  up.backward();
  down.backward();
  SpinorField out(g);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.data[i] = {up.data()[i] * inv, down.data()[i] * inv};
  return out;
}

double HamiltonianField::max_b_norm() const {
  double r = 0.0;
  for (std::size_t i = 0; i < bx.size(); ++i) r = std::max({r, hermitian_norm(bx[i]), hermitian_norm(by[i])});
  return r;
}

HamiltonianField build_generator(const MetricFamily& metric, const SiteGrid& grid, double t, double mass) {
  HamiltonianField h{grid, {}, {}, {}, {}, {}};
  const std::size_t n = grid.size();
  h.bx.resize(n);
  h.by.resize(n);
  h.mass_tilde.resize(n);
  h.ca.resize(n);
  h.cb.resize(n);
  const auto cx = grid.dx_coefficients();
  const auto cy = grid.dy_coefficients();
  const Mat2c sx = pauli_x(), sy = pauli_y();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 x = grid.position(i);
    const Tetrad e = metric.tetrad_at({t, x.x(), x.y()});
    const DeformationMatrix d = deformation_at(e);
    if (d.boost_column().cwiseAbs().maxCoeff() > 1e-14) throw GeometryError("metric with shift is not supported");
    const Mat2 l = d.spatial();
    h.bx[i] = l(0, 0) * sx + l(0, 1) * sy;
    h.by[i] = l(1, 0) * sx + l(1, 1) * sy;
    h.mass_tilde[i] = mass / e.e_t0();
    h.ca[i] = cx[0] * h.bx[i] + cy[0] * h.by[i];
    h.cb[i] = cx[1] * h.bx[i] + cy[1] * h.by[i];
  }
  return h;
}

std::vector<Spinor> lattice_derivative(const SiteGrid& g, const std::vector<Spinor>& f, int axis) {
  std::vector<Spinor> out(f.size());
  const int n1 = g.n1(), n2 = g.n2();
  const int da = axis == 0 ? 1 : 0, db = axis == 0 ? 0 : 1;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n2; ++b)
    for (int a = 0; a < n1; ++a)
      out[g.index(a, b)] = stencil(f, g.index(a - 2 * da, b - 2 * db), g.index(a - da, b - db),
                                   g.index(a + da, b + db), g.index(a + 2 * da, b + 2 * db));
  return out;
}

void apply_generator(const HamiltonianField& h, const SpinorField& chi, SpinorField& out) {
  const SiteGrid& g = h.grid;
  if (!(chi.grid == g)) throw ShapeMismatch("field and generator live on different grids");
  if (&chi == &out) {
    const SpinorField copy = chi;
    apply_generator(h, copy, out);
    return;
  }
  if (!(out.grid == g)) out = SpinorField(g);
  const std::size_t n = g.size();
  std::vector<Spinor> wa(n), wb(n);
  const int n1 = g.n1(), n2 = g.n2();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    wa[i] = mul(h.ca[i], chi.data[i]);
    wb[i] = mul(h.cb[i], chi.data[i]);
  }
  const cplx mhalf_i(0.0, -0.5);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n2; ++b) {
    for (int a = 0; a < n1; ++a) {
      const std::size_t am2 = g.index(a - 2, b), am1 = g.index(a - 1, b), ap1 = g.index(a + 1, b),
                        ap2 = g.index(a + 2, b);
      const std::size_t bm2 = g.index(a, b - 2), bm1 = g.index(a, b - 1), bp1 = g.index(a, b + 1),
                        bp2 = g.index(a, b + 2);
      const std::size_t s = g.index(a, b);
      const Spinor d1 = mul(h.ca[s], stencil(chi.data, am2, am1, ap1, ap2));
      const Spinor d2 = mul(h.cb[s], stencil(chi.data, bm2, bm1, bp1, bp2));
      const Spinor d3 = stencil(wa, am2, am1, ap1, ap2);
      const Spinor d4 = stencil(wb, bm2, bm1, bp1, bp2);
      const Spinor sum{d1.up + d2.up + d3.up + d4.up, d1.down + d2.down + d3.down + d4.down};
      const double mt = h.mass_tilde[s];
      out.data[s] = axpy(mhalf_i, sum, Spinor{mt * chi.data[s].up, -mt * chi.data[s].down});
    }
  }
}

SpinorField apply_generator_reference(const HamiltonianField& h, const SpinorField& chi) {
  const SiteGrid& g = h.grid;
  if (!(chi.grid == g)) throw ShapeMismatch("field and generator live on different grids");
  const std::size_t n = g.size();
  const auto cx = g.dx_coefficients();
  const auto cy = g.dy_coefficients();
  auto cartesian = [&](const std::vector<Spinor>& f, const std::array<double, 2>& c) {
    const auto fa = lattice_derivative(g, f, 0);
    const auto fb = lattice_derivative(g, f, 1);
    std::vector<Spinor> r(n);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = {c[0] * fa[i].up + c[1] * fb[i].up, c[0] * fa[i].down + c[1] * fb[i].down};
    return r;
  };
  std::vector<Spinor> wx(n), wy(n);
  for (std::size_t i = 0; i < n; ++i) {
    wx[i] = mul(h.bx[i], chi.data[i]);
    wy[i] = mul(h.by[i], chi.data[i]);
  }
  const auto dx_chi = cartesian(chi.data, cx);
  const auto dy_chi = cartesian(chi.data, cy);
  const auto dx_w = cartesian(wx, cx);
  const auto dy_w = cartesian(wy, cy);
  SpinorField out(g);
  for (std::size_t i = 0; i < n; ++i) {
    const Spinor a = mul(h.bx[i], dx_chi[i]);
    const Spinor b = mul(h.by[i], dy_chi[i]);
    const Spinor sum{a.up + b.up + dx_w[i].up + dy_w[i].up, a.down + b.down + dx_w[i].down + dy_w[i].down};
    const double mt = h.mass_tilde[i];
    out.data[i] = {cplx(0.0, -0.5) * sum.up + mt * chi.data[i].up, cplx(0.0, -0.5) * sum.down - mt * chi.data[i].down};
  }
  return out;
}

double cfl_limit(const HamiltonianField& h) {
  const double b = h.max_b_norm();
  return b > 0.0 ? 0.5 * h.grid.eps() / b : 0.5 * h.grid.eps();
}

namespace {

class DriftExceeded : public OracleError {
 public:
  using OracleError::OracleError;
};

SpinorField rk4_fixed(const SpinorField& chi0, const MetricFamily& metric, double mass, double T, double dt,
                      double drift_budget, HamiltonianField h, Rk4Report* report);

}  // namespace

SpinorField evolve_rk4(const SpinorField& chi0, const MetricFamily& metric, double mass, double T, double dt,
                       double drift_budget, Rk4Report* report) {
  if (!(T >= 0.0)) throw OracleError("evolution time must be non-negative");
  const SiteGrid& g = chi0.grid;
  HamiltonianField h = build_generator(metric, g, 0.0, mass);
  const double limit = cfl_limit(h);
  const bool automatic = dt <= 0.0;
  if (automatic) dt = 0.5 * limit;
  if (dt > limit * (1.0 + 1e-12))
    throw OracleError("time step " + format_short(dt) + " violates the CFL bound " + format_short(limit));
  if (T == 0.0) {
    if (report) *report = {0, dt, 0.0};
    return chi0;
  }
  if (!automatic) return rk4_fixed(chi0, metric, mass, T, dt, drift_budget, h, report);
  // RK4 damps a mode of frequency omega by about (omega dt)^6 / 72 per step, so
  // an automatic step is halved until the drift fits the budget.
  for (int attempt = 0;; ++attempt) {
    try {
      return rk4_fixed(chi0, metric, mass, T, dt, drift_budget, h, report);
    } catch (const DriftExceeded&) {
      if (attempt >= 6) throw;
      dt *= 0.5;
    }
  }
}

namespace {

SpinorField rk4_fixed(const SpinorField& chi0, const MetricFamily& metric, double mass, double T, double dt,
                      double drift_budget, HamiltonianField h, Rk4Report* report) {
  const SiteGrid& g = chi0.grid;
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  dt = T / steps;

  const bool is_static = metric.is_static();
  const std::size_t n = g.size();
  const double norm0 = sum_norm2(chi0.data);
  double drift = 0.0;

  SpinorField chi = chi0, stage(g), k(g), acc(g);
  HamiltonianField h_mid = h, h_end = h;
  const cplx mi(0.0, -1.0);
  auto combine = [&](SpinorField& dst, const SpinorField& base, cplx c, const SpinorField& kk) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) dst.data[i] = axpy(c, kk.data[i], base.data[i]);
  };
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    if (!is_static) {
      h = build_generator(metric, g, t, mass);
      h_mid = build_generator(metric, g, t + 0.5 * dt, mass);
      h_end = build_generator(metric, g, t + dt, mass);
      if (dt > std::min({cfl_limit(h), cfl_limit(h_mid), cfl_limit(h_end)}) * (1.0 + 1e-12))
        throw OracleError("time step violates the CFL bound at t = " + format_short(t));
    }
    // k_j stores H applied to the stage; the -i factor is folded into the coefficients.
    apply_generator(h, chi, k);
    acc = chi;
    combine(acc, acc, mi * (dt / 6.0), k);
    combine(stage, chi, mi * (0.5 * dt), k);
    apply_generator(h_mid, stage, k);
    combine(acc, acc, mi * (dt / 3.0), k);
    combine(stage, chi, mi * (0.5 * dt), k);
    apply_generator(h_mid, stage, k);
    combine(acc, acc, mi * (dt / 3.0), k);
    combine(stage, chi, mi * dt, k);
    apply_generator(h_end, stage, k);
    combine(acc, acc, mi * (dt / 6.0), k);
    std::swap(chi, acc);
    const double norm = sum_norm2(chi.data);
    drift = std::max(drift, norm0 > 0.0 ? std::abs(norm - norm0) / norm0 : 0.0);
    if (drift > drift_budget)
      throw DriftExceeded("relative norm drift " + format_short(drift) + " exceeded the budget " +
                          format_short(drift_budget) + " at step " + format_short(s));
  }
  if (report) *report = {steps, dt, drift};
  return chi;
}

}  // namespace

double chi_factor(const MetricFamily& metric, const SpacetimePoint& p) {
  const double g = metric.metric_at(p).abs_det();
  const double et0 = metric.tetrad_at(p).e_t0();
  return std::pow(g, 0.25) * std::sqrt(et0);
}

SpinorField chi_from_psi(const SpinorField& psi, const MetricFamily& metric, double t) {
  SpinorField out(psi.grid);
  for (std::size_t i = 0; i < psi.data.size(); ++i) {
    const Vec2 x = psi.grid.position(i);
    out.data[i] = scale(chi_factor(metric, {t, x.x(), x.y()}), psi.data[i]);
  }
  return out;
}

SpinorField psi_from_chi(const SpinorField& chi, const MetricFamily& metric, double t) {
  SpinorField out(chi.grid);
  for (std::size_t i = 0; i < chi.data.size(); ++i) {
    const Vec2 x = chi.grid.position(i);
    out.data[i] = scale(1.0 / chi_factor(metric, {t, x.x(), x.y()}), chi.data[i]);
  }
  return out;
}

}  // namespace cqw
