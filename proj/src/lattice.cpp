#include "cqw/lattice.hpp"

#include <cmath>

namespace cqw {

std::string to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::honeycomb: return "honeycomb";
    case LatticeKind::triangular: return "triangular";
    case LatticeKind::square: return "square";
  }
  return "unknown";
}

LatticeKind lattice_kind_from_string(const std::string& s) {
  if (s == "honeycomb") return LatticeKind::honeycomb;
  if (s == "triangular") return LatticeKind::triangular;
  if (s == "square") return LatticeKind::square;
  throw Error("unknown lattice kind '" + s + "'");
}

SiteGrid::SiteGrid(Basis basis, int n1, int n2, double eps) : basis_(basis), n1_(n1), n2_(n2), eps_(eps) {
  if (n1 < 1 || n2 < 1) throw Error("grid dimensions must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error("grid spacing must be positive");
}

Vec2 SiteGrid::e1() const { return basis_ == Basis::hexagonal ? hex_directions()[0] : Vec2(1.0, 0.0); }

Vec2 SiteGrid::e2() const { return basis_ == Basis::hexagonal ? hex_directions()[1] : Vec2(0.0, 1.0); }

double SiteGrid::cell_area() const {
  const Vec2 a = e1(), b = e2();
  return eps_ * eps_ * std::abs(a.x() * b.y() - a.y() * b.x());
}

// f(a, b) = F(eps (a e1 + b e2)) gives [d/da, d/db] = eps [e1; e2] grad F, so
// grad F = (eps [e1; e2])^{-1} [d/da, d/db].
std::array<double, 2> SiteGrid::dx_coefficients() const {
  if (basis_ == Basis::square) return {1.0 / eps_, 0.0};
  return {1.0 / eps_, 0.0};
}

std::array<double, 2> SiteGrid::dy_coefficients() const {
  if (basis_ == Basis::square) return {0.0, 1.0 / eps_};
  const double s3 = std::sqrt(3.0);
  return {1.0 / (s3 * eps_), 2.0 / (s3 * eps_)};
}

EdgeField::EdgeField(int cells1, int cells2, double spacing)
    : n1(cells1), n2(cells2), eps(spacing), data(static_cast<std::size_t>(cells1) * cells2 * 3) {
  if (cells1 < 2 || cells2 < 2) throw Error("triangular grid needs at least 2 x 2 cells");
  if (!(spacing > 0.0)) throw Error("grid spacing must be positive");
}

std::size_t EdgeField::edge_index(int a, int b, int k) const {
  const int wa = ((a % n1) + n1) % n1;
  const int wb = ((b % n2) + n2) % n2;
  return (static_cast<std::size_t>(wb) * n1 + wa) * 3 + static_cast<std::size_t>(k);
}

// Up triangle (a, b) has vertices V0, V0 + A1, V0 + A2 with V0 = eps (-2a u0 + 2b u1),
// A1 = -2 eps u0, A2 = 2 eps u1; side k is opposite vertex k.
std::array<int, 2> EdgeField::grid_point(int a, int b, int k) const {
  const int p0 = -2 * a, q0 = 2 * b;
  switch (k) {
    case 0: return {p0 - 1, q0 + 1};
    case 1: return {p0, q0 + 1};
    default: return {p0 - 1, q0};
  }
}

std::size_t EdgeField::grid_index(std::size_t edge) const {
  const std::size_t cell = edge / 3;
  const int k = static_cast<int>(edge % 3);
  const auto [p, q] = grid_point(static_cast<int>(cell % n1), static_cast<int>(cell / n1), k);
  return coin_grid().index(p, q);
}

Vec2 EdgeField::position(std::size_t edge) const { return coin_grid().position(grid_index(edge)); }

double EdgeField::weight() const { return coin_grid().cell_area() * 4.0 / 3.0; }

}  // namespace cqw
