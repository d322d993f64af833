#include "cqw/honeycomb_walk.hpp"

namespace cqw {

namespace {

void check_shapes(const SpinorField& psi, const CoinField& coins, const WalkParams& params) {
  if (!(psi.grid == coins.grid()))
    throw ShapeMismatch("spinor field and coin field live on different grids");
  if (params.eps != psi.grid.eps()) throw ShapeMismatch("walk step does not match the grid spacing");
}

// Periodic wrap for offsets of at most one period.
int wrap_near(int x, int n) { return x < 0 ? x + n : (x >= n ? x - n : x); }

cplx mass_phase(double m_tilde, double eps) { return std::polar(1.0, -m_tilde * eps); }

}  // namespace

StepTables step_tables(const CoinField& coins, const WalkParams& params) {
  StepTables t;
  t.count = coins.directions().count;
  const std::size_t n = coins.size();
  t.gamma.resize(n * t.count);
  t.unitary.resize(n * t.count);
  t.mass.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
    for (int i = 0; i < t.count; ++i) {
      t.gamma[i * n + s] = std::polar(1.0, -params.eps * coins[s].gamma[i]);
      t.unitary[i * n + s] = coins[s].unitary[i];
    }
    t.mass[s] = mass_phase(params.mass * coins[s].inv_et0, params.eps);
  }
  return t;
}

std::vector<double> mass_tilde_grid(const CoinField& coins, double mass) {
  std::vector<double> m(coins.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mass * coins[i].inv_et0;
  return m;
}

LatticeDirections directions_for(const SiteGrid& grid) {
  return grid.basis() == SiteGrid::Basis::hexagonal ? LatticeDirections::hexagonal() : LatticeDirections::square();
}

std::array<int, 2> lattice_step(SiteGrid::Basis basis, int i) {
  if (basis == SiteGrid::Basis::square) return i == 0 ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
  switch (i) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    default: return {-1, -1};
  }
}

SpinorField translate(const SpinorField& psi, int i) {
  const SiteGrid& g = psi.grid;
  const auto [da, db] = lattice_step(g.basis(), i);
  SpinorField out(g);
  for (int b = 0; b < g.n2(); ++b)
    for (int a = 0; a < g.n1(); ++a) {
      Spinor& s = out.data[g.index(a, b)];
      s.up = psi.data[g.index(a - da, b - db)].up;
      s.down = psi.data[g.index(a + da, b + db)].down;
    }
  return out;
}

SpinorField translate_inverse(const SpinorField& psi, int i) {
  const SiteGrid& g = psi.grid;
  const auto [da, db] = lattice_step(g.basis(), i);
  SpinorField out(g);
  for (int b = 0; b < g.n2(); ++b)
    for (int a = 0; a < g.n1(); ++a) {
      Spinor& s = out.data[g.index(a, b)];
      s.up = psi.data[g.index(a + da, b + db)].up;
      s.down = psi.data[g.index(a - da, b - db)].down;
    }
  return out;
}

SpinorField step_reference(const SpinorField& psi, const CoinField& coins, const WalkParams& params) {
  check_shapes(psi, coins, params);
  const int count = coins.directions().count;
  SpinorField cur = psi;
  for (int i = 0; i < count; ++i) {
    for (std::size_t s = 0; s < cur.data.size(); ++s)
      cur.data[s] = scale(std::polar(1.0, -params.eps * coins[s].gamma[i]), cur.data[s]);
    for (std::size_t s = 0; s < cur.data.size(); ++s) cur.data[s] = mul(coins[s].unitary[i], cur.data[s]);
    cur = translate(cur, i);
    for (std::size_t s = 0; s < cur.data.size(); ++s) cur.data[s] = mul_adjoint(coins[s].unitary[i], cur.data[s]);
  }
  for (std::size_t s = 0; s < cur.data.size(); ++s) {
    const cplx ph = mass_phase(params.mass * coins[s].inv_et0, params.eps);
    cur.data[s].up *= ph;
    cur.data[s].down *= std::conj(ph);
  }
  return cur;
}

void step(const SpinorField& psi, const CoinField& coins, const WalkParams& params, SpinorField& out) {
  check_shapes(psi, coins, params);
  step(psi, coins, step_tables(coins, params), out);
}

void step(const SpinorField& psi, const CoinField& coins, const StepTables& tables, SpinorField& out) {
  if (!(psi.grid == coins.grid())) throw ShapeMismatch("spinor field and coin field live on different grids");
  if (tables.mass.size() != coins.size()) throw ShapeMismatch("step tables do not match the coin field");
  if (&psi == &out) {
    const SpinorField copy = psi;
    step(copy, coins, tables, out);
    return;
  }
  const SiteGrid& g = psi.grid;
  const int count = tables.count;
  const std::size_t n = coins.size();
  const int n1 = g.n1(), n2 = g.n2();
  if (!(out.grid == g)) out = SpinorField(g);
  SpinorField tmp(g);
  const std::vector<Spinor>* src = &psi.data;
  std::vector<Spinor>* dst = (count % 2 == 1) ? &out.data : &tmp.data;
  for (int i = 0; i < count; ++i) {
    const auto [da, db] = lattice_step(g.basis(), i);
    const std::vector<Spinor>& in = *src;
    std::vector<Spinor>& res = *dst;
    const bool last = i == count - 1;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < n2; ++b) {
      const std::size_t row = static_cast<std::size_t>(b) * n1;
      const std::size_t row_u = static_cast<std::size_t>(wrap_near(b - db, n2)) * n1;
      const std::size_t row_d = static_cast<std::size_t>(wrap_near(b + db, n2)) * n1;
      for (int a = 0; a < n1; ++a) {
        const std::size_t iu = row_u + wrap_near(a - da, n1);
        const std::size_t id = row_d + wrap_near(a + da, n1);
        // Only the up row of the source coin product and the down row of the
        // other survive the shift.
        const Spinor pu = scale(tables.gamma[i * n + iu], in[iu]);
        const Spinor pd = scale(tables.gamma[i * n + id], in[id]);
        const Mat2c& uu = tables.unitary[i * n + iu];
        const Mat2c& ud = tables.unitary[i * n + id];
        const std::size_t s = row + a;
        Spinor r = mul_adjoint(tables.unitary[i * n + s],
                               Spinor{uu(0, 0) * pu.up + uu(0, 1) * pu.down, ud(1, 0) * pd.up + ud(1, 1) * pd.down});
        if (last) {
          const cplx ph = tables.mass[s];
          r.up *= ph;
          r.down *= std::conj(ph);
        }
        res[s] = r;
      }
    }
    src = dst;
    dst = (dst == &out.data) ? &tmp.data : &out.data;
  }
}

SpinorField step(const SpinorField& psi, const CoinField& coins, const WalkParams& params) {
  SpinorField out(psi.grid);
  step(psi, coins, params, out);
  return out;
}

SpinorField evolve(const SpinorField& psi0, const MetricFamily& metric, const WalkParams& params,
                   const EvolveOptions& options, const WalkObserver& observer) {
  if (options.steps < 0) throw Error("number of steps must be non-negative");
  const SiteGrid& g = psi0.grid;
  if (params.eps != g.eps()) throw ShapeMismatch("walk step does not match the grid spacing");
  const LatticeDirections dirs = directions_for(g);
  int period = options.recompile_every;
  if (period <= 0) period = metric.is_static() ? 0 : 1;

  SpinorField cur = psi0;
  SpinorField next(g);
  if (observer) observer(0, 0.0, cur);
  if (options.steps == 0) return cur;
  CoinField coins = compile_coins(metric, g, dirs, 0.0, options.compile);
  StepTables tables = step_tables(coins, params);
  for (int n = 0; n < options.steps; ++n) {
    const double t = n * params.eps;
    if (n > 0 && period > 0 && n % period == 0) {
      coins = compile_coins(metric, g, dirs, t, options.compile);
      tables = step_tables(coins, params);
    }
    step(cur, coins, tables, next);
    std::swap(cur, next);
    if (observer) observer(n + 1, (n + 1) * params.eps, cur);
  }
  return cur;
}

}  // namespace cqw
