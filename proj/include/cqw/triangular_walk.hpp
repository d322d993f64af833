#pragma once

// Quantum walk on the edges of a periodic triangulation.
//
// A substep rotates every spinor one side onward inside its triangle: the up
// component of edge (v, k) comes from side k-1 of the up triangle v, the down
// component from side k-1 of the down triangle across side k. Each hop moves
// the up component by +eps u_d and the down component by -eps u_d, where
// d = direction(k). The coin used for a hop is U_d sampled at the edge it
// acts on. A full step is three substeps followed by the mass phase.

#include <functional>

#include "cqw/coin.hpp"
#include "cqw/honeycomb_walk.hpp"
#include "cqw/lattice.hpp"
#include "cqw/metric_family.hpp"

namespace cqw {

struct TriangleRef {
  int a = 0;
  int b = 0;
  bool up = true;

  friend bool operator==(const TriangleRef&, const TriangleRef&) = default;
};

class NeighborMap {
 public:
  NeighborMap(int n1, int n2);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  /// Triangle across side k of v; up and down triangles alternate.
  TriangleRef neighbor(const TriangleRef& v, int k) const;
  /// Owner-indexed edge shared by v and its neighbor across side k.
  std::size_t edge(const TriangleRef& v, int k) const;

 private:
  int n1_;
  int n2_;
};

NeighborMap build_neighbor_map(int n1, int n2);

class TriangularWalk {
 public:
  TriangularWalk(int n1, int n2, double eps);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double eps() const { return eps_; }
  const NeighborMap& neighbors() const { return map_; }
  /// The eps-spaced hexagonal grid holding every edge midpoint.
  SiteGrid coin_grid() const { return SiteGrid(SiteGrid::Basis::hexagonal, 2 * n1_, 2 * n2_, eps_); }
  EdgeField make_field() const { return EdgeField(n1_, n2_, eps_); }

  /// Hop direction of the substep landing on side k.
  static int direction(int k) {
    static constexpr int kDir[3] = {1, 0, 2};
    return kDir[k];
  }
  std::size_t up_source(std::size_t edge) const { return up_src_[edge]; }
  std::size_t down_source(std::size_t edge) const { return down_src_[edge]; }
  /// Coin-grid site of an edge midpoint.
  std::size_t coin_site(std::size_t edge) const { return site_[edge]; }

  /// Three-pass single-threaded substep.
  EdgeField substep_reference(const EdgeField& psi, const CoinField& coins) const;
  /// Fused OpenMP substep, bitwise equal to substep_reference.
  void substep(const EdgeField& psi, const CoinField& coins, EdgeField& out) const;
  /// Same, with tables from step_tables(coins, params); the mass table is not used.
  void substep(const EdgeField& psi, const CoinField& coins, const StepTables& tables, EdgeField& out) const;

  EdgeField step_reference(const EdgeField& psi, const CoinField& coins, const WalkParams& params) const;
  void step(const EdgeField& psi, const CoinField& coins, const WalkParams& params, EdgeField& out) const;
  EdgeField step(const EdgeField& psi, const CoinField& coins, const WalkParams& params) const;
  void step(const EdgeField& psi, const CoinField& coins, const StepTables& tables, EdgeField& out) const;

  using Observer = std::function<void(int, double, const EdgeField&)>;
  EdgeField evolve(const EdgeField& psi0, const MetricFamily& metric, const WalkParams& params,
                   const EvolveOptions& options, const Observer& observer = {}) const;

 private:
  void check(const EdgeField& psi, const CoinField& coins) const;
  void apply_mass(EdgeField& psi, const StepTables& tables) const;

  int n1_;
  int n2_;
  double eps_;
  NeighborMap map_;
  std::vector<std::size_t> up_src_;
  std::vector<std::size_t> down_src_;
  std::vector<std::size_t> site_;
};

}  // namespace cqw
