// Serial reference kernels against the fused OpenMP kernels. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "cqw/harness.hpp"

using namespace cqw;

namespace {

const MetricFamily& wavy() {
  static const MetricFamily f = MetricFamily::conformal(MetricExpression::parse("1+0.3*sin(x)*sin(y)"));
  return f;
}

SpinorField packet(const SiteGrid& g) {
  GaussianPacket p;
  p.center = g.position(g.n1() / 2.0, g.n2() / 2.0);
  p.width = 8 * g.eps();
  p.momentum = Vec2(1.0, 0.5);
  return gaussian(g, p);
}

void honeycomb_reference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SiteGrid g(SiteGrid::Basis::hexagonal, n, n, 0.1);
  const CoinField coins = compile_coins(wavy(), g, directions_for(g), 0.0);
  SpinorField f = packet(g);
  for (auto _ : state) {
    f = step_reference(f, coins, {0.1, 0.5});
    benchmark::DoNotOptimize(f.data.data());
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}

void honeycomb_fused(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SiteGrid g(SiteGrid::Basis::hexagonal, n, n, 0.1);
  const CoinField coins = compile_coins(wavy(), g, directions_for(g), 0.0);
  const StepTables tables = step_tables(coins, {0.1, 0.5});
  SpinorField f = packet(g), next(g);
  for (auto _ : state) {
    step(f, coins, tables, next);
    std::swap(f, next);
    benchmark::DoNotOptimize(f.data.data());
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}

void triangular_reference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TriangularWalk w(n, n, 0.1);
  const CoinField coins = compile_coins(wavy(), w.coin_grid(), LatticeDirections::hexagonal(), 0.0);
  EdgeField f = restrict_to_edges(packet(w.coin_grid()), w);
  for (auto _ : state) {
    f = w.substep_reference(f, coins);
    benchmark::DoNotOptimize(f.data.data());
  }
  state.SetItemsProcessed(state.iterations() * f.data.size());
}

void triangular_fused(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TriangularWalk w(n, n, 0.1);
  const CoinField coins = compile_coins(wavy(), w.coin_grid(), LatticeDirections::hexagonal(), 0.0);
  const StepTables tables = step_tables(coins, {0.1, 0.5});
  EdgeField f = restrict_to_edges(packet(w.coin_grid()), w), next = w.make_field();
  for (auto _ : state) {
    w.substep(f, coins, tables, next);
    std::swap(f, next);
    benchmark::DoNotOptimize(f.data.data());
  }
  state.SetItemsProcessed(state.iterations() * f.data.size());
}

}  // namespace

BENCHMARK(honeycomb_reference)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(honeycomb_fused)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(triangular_reference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(triangular_fused)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
