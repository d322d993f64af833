#pragma once

// Periodic lattices and the spinor fields that live on them.
//
// A SiteGrid is a periodic Bravais grid of n1 x n2 sites; site (a, b) sits at
// eps * (a * e1 + b * e2) and is stored at index b * n1 + a. The honeycomb
// basis is e1 = u0 = (1, 0), e2 = u1 = (-1/2, sqrt(3)/2); the square basis is
// the Cartesian one.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cqw/types.hpp"

namespace cqw {

enum class LatticeKind : std::uint32_t { honeycomb = 0, triangular = 1, square = 2 };

std::string to_string(LatticeKind kind);
LatticeKind lattice_kind_from_string(const std::string& s);

/// The three 120-degree directions u0, u1, u2 (u0 + u1 + u2 = 0).
inline const std::array<Vec2, 3>& hex_directions() {
  static const std::array<Vec2, 3> u{Vec2(1.0, 0.0), Vec2(-0.5, 0.5 * std::sqrt(3.0)),
                                     Vec2(-0.5, -0.5 * std::sqrt(3.0))};
  return u;
}

class SiteGrid {
 public:
  enum class Basis { hexagonal, square };

  SiteGrid(Basis basis, int n1, int n2, double eps);

  Basis basis() const { return basis_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double eps() const { return eps_; }
  std::size_t size() const { return static_cast<std::size_t>(n1_) * static_cast<std::size_t>(n2_); }

  Vec2 e1() const;
  Vec2 e2() const;
  /// Physical position of (possibly fractional) lattice coordinates.
  Vec2 position(double a, double b) const { return eps_ * (a * e1() + b * e2()); }
  Vec2 position(std::size_t index) const {
    return position(static_cast<double>(index % n1_), static_cast<double>(index / n1_));
  }
  double cell_area() const;

  int wrap1(int a) const { return ((a % n1_) + n1_) % n1_; }
  int wrap2(int b) const { return ((b % n2_) + n2_) % n2_; }
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(wrap2(b)) * n1_ + static_cast<std::size_t>(wrap1(a));
  }

  /// d/dx = dx[0] * d/da + dx[1] * d/db (lattice-coordinate derivatives), same for d/dy.
  std::array<double, 2> dx_coefficients() const;
  std::array<double, 2> dy_coefficients() const;

  friend bool operator==(const SiteGrid& a, const SiteGrid& b) {
    return a.basis_ == b.basis_ && a.n1_ == b.n1_ && a.n2_ == b.n2_ && a.eps_ == b.eps_;
  }

 private:
  Basis basis_;
  int n1_;
  int n2_;
  double eps_;
};

/// One spinor per site of a honeycomb (hexagonal Bravais) or square grid.
struct SpinorField {
  SiteGrid grid;
  std::vector<Spinor> data;

  explicit SpinorField(const SiteGrid& g) : grid(g), data(g.size()) {}

  LatticeKind kind() const {
    return grid.basis() == SiteGrid::Basis::hexagonal ? LatticeKind::honeycomb : LatticeKind::square;
  }
  Spinor& at(int a, int b) { return data[grid.index(a, b)]; }
  const Spinor& at(int a, int b) const { return data[grid.index(a, b)]; }
  double weight() const { return grid.cell_area(); }
};

/// Spinors on the shared edges of a periodic triangulation.
///
/// The cell grid holds n1 x n2 unit cells, each with one up and one down
/// triangle. Edges are stored once, owned by their up triangle: index
/// (b * n1 + a) * 3 + k for side k of up triangle (a, b). The up component of
/// an edge spinor belongs to the up triangle, the down component to the down
/// triangle across the edge. Triangles have side 2 eps, and every edge
/// midpoint lies on the eps-spaced hexagonal Bravais grid of 2 n1 x 2 n2 sites
/// returned by coin_grid().
struct EdgeField {
  int n1;
  int n2;
  double eps;
  std::vector<Spinor> data;

  EdgeField(int cells1, int cells2, double spacing);

  std::size_t cells() const { return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2); }
  std::size_t edge_index(int a, int b, int k) const;
  Spinor& at(int a, int b, int k) { return data[edge_index(a, b, k)]; }
  const Spinor& at(int a, int b, int k) const { return data[edge_index(a, b, k)]; }

  SiteGrid coin_grid() const { return SiteGrid(SiteGrid::Basis::hexagonal, 2 * n1, 2 * n2, eps); }
  /// Lattice coordinates (p, q) of the edge midpoint on coin_grid().
  std::array<int, 2> grid_point(int a, int b, int k) const;
  std::size_t grid_index(std::size_t edge) const;
  Vec2 position(std::size_t edge) const;
  double weight() const;
};

}  // namespace cqw
