#pragma once

// Continuum reference solutions for the rescaled spinor chi:
//   i d_t chi = -(i/2) {B^s, d_s} chi + m~ sigma_z chi,   B^s = Lambda^s_1 sigma_x + Lambda^s_2 sigma_y.
// Fields live on a periodic SiteGrid (usually the rhombic hexagonal one).

#include <Eigen/Dense>

#include "cqw/coin.hpp"
#include "cqw/lattice.hpp"
#include "cqw/metric_family.hpp"

namespace cqw {

/// Flat Dirac Hamiltonian k_x sigma_x + k_y sigma_y + m sigma_z.
Mat2c dirac_hamiltonian(const Vec2& k, double m);

struct PlaneWaveSolution {
  Vec2 k = Vec2::Zero();
  int branch = +1;
  double energy = 0.0;
  Eigen::Vector2cd spinor = Eigen::Vector2cd::Zero();

  /// Unit eigenvector of dirac_hamiltonian(k, m) with energy branch * sqrt(|k|^2 + m^2).
  static PlaneWaveSolution make(const Vec2& k, double m, int branch);
};

/// Physical wavevector of DFT mode (nu1, nu2) on the grid; indices are taken in (-N/2, N/2].
Vec2 mode_wavevector(const SiteGrid& grid, int nu1, int nu2);

/// Exact evolution exp(-i T H_D) by FFT and per-mode 2x2 exponentials.
SpinorField flat_evolve(const SpinorField& psi0, double m, double T);

struct HamiltonianField {
  SiteGrid grid;
  std::vector<Mat2c> bx;
  std::vector<Mat2c> by;
  std::vector<double> mass_tilde;
  /// Lattice-axis coefficient matrices: d_x B^x + d_y B^y = ca d_a + cb d_b.
  std::vector<Mat2c> ca;
  std::vector<Mat2c> cb;

  double max_b_norm() const;
};

HamiltonianField build_generator(const MetricFamily& metric, const SiteGrid& grid, double t, double mass);

/// 4th-order periodic central difference along lattice axis 0 (a) or 1 (b), per unit index.
std::vector<Spinor> lattice_derivative(const SiteGrid& grid, const std::vector<Spinor>& f, int axis);

/// out = H chi (OpenMP, partition independent).
void apply_generator(const HamiltonianField& h, const SpinorField& chi, SpinorField& out);
/// Straightforward serial evaluation from B^x, B^y and Cartesian derivatives.
SpinorField apply_generator_reference(const HamiltonianField& h, const SpinorField& chi);

/// Largest stable step 0.5 h / max ||B||.
double cfl_limit(const HamiltonianField& h);

struct Rk4Report {
  int steps = 0;
  double dt = 0.0;
  double norm_drift = 0.0;
};

/// Classic RK4 on d chi/dt = -i H chi. dt <= 0 picks half the CFL limit; the step is
/// shrunk so T is an integer number of steps. Throws OracleError on a CFL
/// violation or when the relative norm drift exceeds `drift_budget`.
SpinorField evolve_rk4(const SpinorField& chi0, const MetricFamily& metric, double mass, double T, double dt,
                       double drift_budget = 1e-8, Rk4Report* report = nullptr);

/// g^{1/4} (e^t_0)^{1/2} at a point.
double chi_factor(const MetricFamily& metric, const SpacetimePoint& p);
SpinorField chi_from_psi(const SpinorField& psi, const MetricFamily& metric, double t = 0.0);
SpinorField psi_from_chi(const SpinorField& chi, const MetricFamily& metric, double t = 0.0);

}  // namespace cqw
