#pragma once

// Honeycomb (three-direction) and square quantum walks on a periodic
// Bravais grid. One step is
//   psi <- exp(-i m~ eps sigma_z) prod_i [U_i^dag T_i U_i exp(-i eps gamma_i)] psi
// with the factors for i = 0, 1, 2 applied in that order.

#include <functional>

#include "cqw/coin.hpp"
#include "cqw/lattice.hpp"
#include "cqw/metric_family.hpp"

namespace cqw {

struct WalkParams {
  double eps = 0.1;
  double mass = 0.0;
};

/// Per-step kernel inputs laid out by direction for streaming access:
/// entry [i * sites + s] holds exp(-i eps gamma_i(s)) and U_i(s);
/// mass[s] = exp(-i m~(s) eps).
struct StepTables {
  int count = 0;
  std::vector<cplx> gamma;
  std::vector<Mat2c> unitary;
  std::vector<cplx> mass;
};

StepTables step_tables(const CoinField& coins, const WalkParams& params);

/// Per-site m~ = m / e^t_0 read from the compiled coins.
std::vector<double> mass_tilde_grid(const CoinField& coins, double mass);

/// Lattice step of direction i in (a, b) coordinates.
std::array<int, 2> lattice_step(SiteGrid::Basis basis, int i);

/// Up component pulled from site - step_i, down component from site + step_i.
SpinorField translate(const SpinorField& psi, int i);
/// Inverse of translate(psi, i).
SpinorField translate_inverse(const SpinorField& psi, int i);

/// Unfused, single-threaded step: each factor is its own pass over the grid.
SpinorField step_reference(const SpinorField& psi, const CoinField& coins, const WalkParams& params);

/// Fused OpenMP step; bitwise equal to step_reference. `out` is resized as needed.
void step(const SpinorField& psi, const CoinField& coins, const WalkParams& params, SpinorField& out);
SpinorField step(const SpinorField& psi, const CoinField& coins, const WalkParams& params);
/// Same, with tables from step_tables(coins, params).
void step(const SpinorField& psi, const CoinField& coins, const StepTables& tables, SpinorField& out);

struct EvolveOptions {
  int steps = 0;
  /// Recompile period in steps; 0 means every step for time-dependent
  /// metrics and once for static ones.
  int recompile_every = 0;
  CompileOptions compile{};
};

/// Called with (step index, time, state) at step 0 and after every step.
using WalkObserver = std::function<void(int, double, const SpinorField&)>;

SpinorField evolve(const SpinorField& psi0, const MetricFamily& metric, const WalkParams& params,
                   const EvolveOptions& options, const WalkObserver& observer = {});

LatticeDirections directions_for(const SiteGrid& grid);

}  // namespace cqw
