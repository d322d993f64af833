#pragma once

// Error metrics, observables, dispersion extraction and convergence studies.

#include <array>
#include <string>
#include <vector>

#include "cqw/coin.hpp"
#include "cqw/honeycomb_walk.hpp"
#include "cqw/initial_state.hpp"
#include "cqw/lattice.hpp"
#include "cqw/metric_family.hpp"
#include "cqw/oracle.hpp"
#include "cqw/triangular_walk.hpp"

namespace cqw {

/// sqrt(sum |a - b|^2 * weight); throws ShapeMismatch for different grids.
double l2_distance(const SpinorField& a, const SpinorField& b);
double l2_distance(const EdgeField& a, const EdgeField& b);
double l2_norm(const SpinorField& a);
double l2_norm(const EdgeField& a);

/// Samples a fine field at the sites of a coarser grid that shares its domain and origin.
SpinorField restrict_to(const SpinorField& fine, const SiteGrid& coarse);
/// Samples a site field at the edge midpoints of a triangular walk.
EdgeField restrict_to_edges(const SpinorField& fine, const TriangularWalk& walk);

struct Observables {
  double norm = 0.0;
  Vec2 mean = Vec2::Zero();
  double spread = 0.0;
  double p_up = 0.0;
  double p_down = 0.0;
};

/// Norm, periodic (circular) mean position, RMS spread about the mean and
/// per-component probabilities.
Observables observables(const SpinorField& psi);
Observables observables(const EdgeField& psi);

/// Eigenphases (ascending) of the one-step Bloch matrix at wavevector k for
/// homogeneous coins; phase omega is defined by lambda = exp(-i omega).
std::array<double, 2> dispersion_extract(const SiteCoins& coins, const LatticeDirections& dirs, double mass_tilde,
                                         double eps, const Vec2& k);
/// The 2x2 Bloch matrix itself.
Mat2c bloch_matrix(const SiteCoins& coins, const LatticeDirections& dirs, double mass_tilde, double eps,
                   const Vec2& k);

struct ConvergencePoint {
  double eps = 0.0;
  double error = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  double slope = 0.0;
  /// RMS residual of the log-log least-squares fit.
  double residual = 0.0;
  /// ||chi_h - chi_2h|| of the oracle.
  double oracle_self_error = 0.0;
  double oracle_spacing = 0.0;
  std::string lattice;
  std::string metric;
  double T = 0.0;
  double domain = 0.0;
};

/// Least-squares slope of log(error) against log(eps).
void fit_convergence(ConvergenceReport& report);

struct StudySetup {
  LatticeKind lattice = LatticeKind::honeycomb;
  MetricFamily metric = MetricFamily::flat();
  double mass = 0.0;
  double T = 1.0;
  /// Side length of the periodic domain along each lattice axis.
  double domain = 12.8;
  /// Physical packet; the walk and the oracle both start from chi = factor * psi, normalized.
  GaussianPacket packet{};
  std::vector<double> epsilons;
  CompileOptions compile{};
};

/// Number of sites per axis of the eps-grid covering the domain; throws when incommensurate.
int grid_points(const StudySetup& setup, double eps);
SiteGrid study_grid(const StudySetup& setup, double eps);
SpinorField study_initial_sites(const StudySetup& setup, const SiteGrid& grid);
EdgeField study_initial_edges(const StudySetup& setup, const TriangularWalk& walk);

/// Oracle chi(T) on the grid of spacing h (flat_evolve for the flat family, RK4 otherwise).
SpinorField oracle_solution(const StudySetup& setup, double h);

/// Walk state at time T for one eps, as a site field or an edge field.
SpinorField run_site_walk(const StudySetup& setup, double eps);
EdgeField run_triangular_walk(const StudySetup& setup, double eps);

struct StudyFields {
  std::vector<SpinorField> sites;
  std::vector<EdgeField> edges;
};

/// Runs every eps, compares against the oracle and fits the slope. Throws
/// OracleError when the oracle self-convergence is not an order of magnitude
/// below the smallest walk error.
ConvergenceReport convergence_study(const StudySetup& setup, StudyFields* fields = nullptr);

}  // namespace cqw
