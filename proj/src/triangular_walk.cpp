#include "cqw/triangular_walk.hpp"

namespace cqw {

NeighborMap::NeighborMap(int n1, int n2) : n1_(n1), n2_(n2) {
  if (n1 < 2 || n2 < 2) throw Error("triangular grid needs at least 2 x 2 cells");
}

TriangleRef NeighborMap::neighbor(const TriangleRef& v, int k) const {
  static constexpr int kUp[3][2] = {{0, 0}, {-1, 0}, {0, -1}};
  const int s = v.up ? 1 : -1;
  const int a = v.a + s * kUp[k][0];
  const int b = v.b + s * kUp[k][1];
  return {((a % n1_) + n1_) % n1_, ((b % n2_) + n2_) % n2_, !v.up};
}

std::size_t NeighborMap::edge(const TriangleRef& v, int k) const {
  const TriangleRef owner = v.up ? v : neighbor(v, k);
  return (static_cast<std::size_t>(owner.b) * n1_ + owner.a) * 3 + static_cast<std::size_t>(k);
}

NeighborMap build_neighbor_map(int n1, int n2) { return NeighborMap(n1, n2); }

TriangularWalk::TriangularWalk(int n1, int n2, double eps) : n1_(n1), n2_(n2), eps_(eps), map_(n1, n2) {
  const EdgeField layout(n1, n2, eps);
  const std::size_t edges = layout.data.size();
  up_src_.resize(edges);
  down_src_.resize(edges);
  site_.resize(edges);
  for (int b = 0; b < n2; ++b)
    for (int a = 0; a < n1; ++a) {
      const TriangleRef up{a, b, true};
      for (int k = 0; k < 3; ++k) {
        const std::size_t e = layout.edge_index(a, b, k);
        const int prev = (k + 2) % 3;
        up_src_[e] = map_.edge(up, prev);
        down_src_[e] = map_.edge(map_.neighbor(up, k), prev);
        site_[e] = layout.grid_index(e);
      }
    }
}

void TriangularWalk::check(const EdgeField& psi, const CoinField& coins) const {
  if (psi.n1 != n1_ || psi.n2 != n2_ || psi.eps != eps_)
    throw ShapeMismatch("edge field does not match the walk geometry");
  if (!(coins.grid() == coin_grid())) throw ShapeMismatch("coin field is not sampled on the edge grid");
}

EdgeField TriangularWalk::substep_reference(const EdgeField& psi, const CoinField& coins) const {
  check(psi, coins);
  const std::size_t edges = psi.data.size();
  // A source on side j feeds the destination on side j + 1.
  std::vector<Spinor> moved(edges);
  for (std::size_t e = 0; e < edges; ++e) {
    const int d = direction(static_cast<int>((e + 1) % 3));
    const SiteCoins& c = coins[site_[e]];
    moved[e] = scale(std::polar(1.0, -eps_ * c.gamma[d]), psi.data[e]);
  }
  for (std::size_t e = 0; e < edges; ++e) {
    const int d = direction(static_cast<int>((e + 1) % 3));
    moved[e] = mul(coins[site_[e]].unitary[d], moved[e]);
  }
  EdgeField out(n1_, n2_, eps_);
  for (std::size_t e = 0; e < edges; ++e) out.data[e] = Spinor{moved[up_src_[e]].up, moved[down_src_[e]].down};
  for (std::size_t e = 0; e < edges; ++e) {
    const int d = direction(static_cast<int>(e % 3));
    out.data[e] = mul_adjoint(coins[site_[e]].unitary[d], out.data[e]);
  }
  return out;
}

void TriangularWalk::substep(const EdgeField& psi, const CoinField& coins, EdgeField& out) const {
  check(psi, coins);
  substep(psi, coins, step_tables(coins, {eps_, 0.0}), out);
}

void TriangularWalk::substep(const EdgeField& psi, const CoinField& coins, const StepTables& tables,
                             EdgeField& out) const {
  check(psi, coins);
  if (tables.mass.size() != coins.size()) throw ShapeMismatch("step tables do not match the coin field");
  if (&psi == &out) {
    const EdgeField copy = psi;
    substep(copy, coins, tables, out);
    return;
  }
  if (out.n1 != n1_ || out.n2 != n2_ || out.eps != eps_) out = make_field();
  const std::ptrdiff_t edges = static_cast<std::ptrdiff_t>(psi.data.size());
  const std::size_t n = coins.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < edges; ++e) {
    const int d = direction(static_cast<int>(e % 3));
    const std::size_t us = up_src_[e], ds = down_src_[e];
    const std::size_t cu = site_[us], cd = site_[ds];
    const Spinor pu = scale(tables.gamma[d * n + cu], psi.data[us]);
    const Spinor pd = scale(tables.gamma[d * n + cd], psi.data[ds]);
    const Mat2c& uu = tables.unitary[d * n + cu];
    const Mat2c& ud = tables.unitary[d * n + cd];
    out.data[e] = mul_adjoint(tables.unitary[d * n + site_[e]],
                              Spinor{uu(0, 0) * pu.up + uu(0, 1) * pu.down, ud(1, 0) * pd.up + ud(1, 1) * pd.down});
  }
}

void TriangularWalk::apply_mass(EdgeField& psi, const StepTables& tables) const {
  const std::ptrdiff_t edges = static_cast<std::ptrdiff_t>(psi.data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < edges; ++e) {
    const cplx ph = tables.mass[site_[e]];
    psi.data[e].up *= ph;
    psi.data[e].down *= std::conj(ph);
  }
}

EdgeField TriangularWalk::step_reference(const EdgeField& psi, const CoinField& coins,
                                         const WalkParams& params) const {
  if (params.eps != eps_) throw ShapeMismatch("walk step does not match the grid spacing");
  EdgeField cur = psi;
  for (int i = 0; i < 3; ++i) cur = substep_reference(cur, coins);
  for (std::size_t e = 0; e < cur.data.size(); ++e) {
    const cplx ph = std::polar(1.0, -params.mass * coins[site_[e]].inv_et0 * params.eps);
    cur.data[e].up *= ph;
    cur.data[e].down *= std::conj(ph);
  }
  return cur;
}

void TriangularWalk::step(const EdgeField& psi, const CoinField& coins, const WalkParams& params,
                          EdgeField& out) const {
  if (params.eps != eps_) throw ShapeMismatch("walk step does not match the grid spacing");
  check(psi, coins);
  step(psi, coins, step_tables(coins, params), out);
}

void TriangularWalk::step(const EdgeField& psi, const CoinField& coins, const StepTables& tables,
                          EdgeField& out) const {
  EdgeField tmp = make_field();
  substep(psi, coins, tables, out);
  substep(out, coins, tables, tmp);
  substep(tmp, coins, tables, out);
  apply_mass(out, tables);
}

EdgeField TriangularWalk::step(const EdgeField& psi, const CoinField& coins, const WalkParams& params) const {
  EdgeField out = make_field();
  step(psi, coins, params, out);
  return out;
}

EdgeField TriangularWalk::evolve(const EdgeField& psi0, const MetricFamily& metric, const WalkParams& params,
                                 const EvolveOptions& options, const Observer& observer) const {
  if (options.steps < 0) throw Error("number of steps must be non-negative");
  if (params.eps != eps_) throw ShapeMismatch("walk step does not match the grid spacing");
  const SiteGrid g = coin_grid();
  const LatticeDirections dirs = LatticeDirections::hexagonal();
  int period = options.recompile_every;
  if (period <= 0) period = metric.is_static() ? 0 : 1;

  EdgeField cur = psi0;
  EdgeField next = make_field();
  if (observer) observer(0, 0.0, cur);
  if (options.steps == 0) return cur;
  CoinField coins = compile_coins(metric, g, dirs, 0.0, options.compile);
  StepTables tables = step_tables(coins, params);
  for (int n = 0; n < options.steps; ++n) {
    if (n > 0 && period > 0 && n % period == 0) {
      coins = compile_coins(metric, g, dirs, n * eps_, options.compile);
      tables = step_tables(coins, params);
    }
    step(cur, coins, tables, next);
    std::swap(cur, next);
    if (observer) observer(n + 1, (n + 1) * eps_, cur);
  }
  return cur;
}

}  // namespace cqw
