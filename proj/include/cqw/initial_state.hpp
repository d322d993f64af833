#pragma once

// Initial data sampled onto site grids and triangle edges.

#include <functional>

#include <Eigen/Dense>

#include "cqw/lattice.hpp"
#include "cqw/triangular_walk.hpp"

namespace cqw {

using PointFunction = std::function<Spinor(const Vec2&)>;

/// spinor * exp(-|x - c|^2 / (2 w^2)) * exp(i k . (x - c)), with x - c the
/// minimal-image displacement on the periodic domain of `grid`.
struct GaussianPacket {
  Vec2 center = Vec2::Zero();
  double width = 1.0;
  Vec2 momentum = Vec2::Zero();
  Eigen::Vector2cd spinor{1.0, 0.0};

  Spinor operator()(const SiteGrid& grid, const Vec2& x) const;
};

/// Displacement x - c reduced to the lattice cell centred on c.
Vec2 minimal_image(const SiteGrid& grid, const Vec2& x, const Vec2& c);

SpinorField sample_sites(const SiteGrid& grid, const PointFunction& f);
EdgeField sample_edges(const TriangularWalk& walk, const PointFunction& f);

/// Scales to sum |psi|^2 * weight = 1 (no-op for the zero field).
void normalize(SpinorField& psi);
void normalize(EdgeField& psi);

SpinorField gaussian(const SiteGrid& grid, const GaussianPacket& packet);
EdgeField gaussian(const TriangularWalk& walk, const GaussianPacket& packet);

/// Nearest wavevector that is periodic on the grid.
Vec2 commensurate_wavevector(const SiteGrid& grid, const Vec2& k);
/// Normalized plane wave of the flat Dirac equation on the given branch; k is snapped first.
SpinorField plane_wave(const SiteGrid& grid, const Vec2& k, double mass, int branch);
EdgeField plane_wave(const TriangularWalk& walk, const Vec2& k, double mass, int branch);

/// Unit-weight spinor at a single site (edge), zero elsewhere.
SpinorField delta(const SiteGrid& grid, int a, int b, const Spinor& s);
EdgeField delta(const TriangularWalk& walk, int a, int b, int k, const Spinor& s);

}  // namespace cqw
