#include "cqw/initial_state.hpp"

#include <cmath>

#include "cqw/oracle.hpp"
#include "cqw/reduce.hpp"

namespace cqw {

namespace {

double wrap_centered(double v, int n) {
  v = std::fmod(v, static_cast<double>(n));
  if (v >= 0.5 * n) v -= n;
  if (v < -0.5 * n) v += n;
  return v;
}

}  // namespace

Vec2 minimal_image(const SiteGrid& grid, const Vec2& x, const Vec2& c) {
  Mat2 e;
  e.col(0) = grid.eps() * grid.e1();
  e.col(1) = grid.eps() * grid.e2();
  Vec2 ab = e.inverse() * (x - c);
  ab.x() = wrap_centered(ab.x(), grid.n1());
  ab.y() = wrap_centered(ab.y(), grid.n2());
  return e * ab;
}

Spinor GaussianPacket::operator()(const SiteGrid& grid, const Vec2& x) const {
  const Vec2 d = minimal_image(grid, x, center);
  const cplx amp = std::exp(-d.squaredNorm() / (2.0 * width * width)) * std::polar(1.0, momentum.dot(d));
  return {amp * spinor[0], amp * spinor[1]};
}

SpinorField sample_sites(const SiteGrid& grid, const PointFunction& f) {
  SpinorField psi(grid);
  for (std::size_t i = 0; i < psi.data.size(); ++i) psi.data[i] = f(grid.position(i));
  return psi;
}

EdgeField sample_edges(const TriangularWalk& walk, const PointFunction& f) {
  EdgeField psi = walk.make_field();
  for (std::size_t e = 0; e < psi.data.size(); ++e) psi.data[e] = f(psi.position(e));
  return psi;
}

void normalize(SpinorField& psi) {
  const double n = sum_norm2(psi.data) * psi.weight();
  if (n > 0.0)
    for (auto& s : psi.data) s = scale(1.0 / std::sqrt(n), s);
}

void normalize(EdgeField& psi) {
  const double n = sum_norm2(psi.data) * psi.weight();
  if (n > 0.0)
    for (auto& s : psi.data) s = scale(1.0 / std::sqrt(n), s);
}

SpinorField gaussian(const SiteGrid& grid, const GaussianPacket& packet) {
  SpinorField psi = sample_sites(grid, [&](const Vec2& x) { return packet(grid, x); });
  normalize(psi);
  return psi;
}

EdgeField gaussian(const TriangularWalk& walk, const GaussianPacket& packet) {
  const SiteGrid g = walk.coin_grid();
  EdgeField psi = sample_edges(walk, [&](const Vec2& x) { return packet(g, x); });
  normalize(psi);
  return psi;
}

Vec2 commensurate_wavevector(const SiteGrid& grid, const Vec2& k) {
  const double s1 = k.dot(grid.eps() * grid.e1()) * grid.n1() / (2.0 * kPi);
  const double s2 = k.dot(grid.eps() * grid.e2()) * grid.n2() / (2.0 * kPi);
  int nu1 = static_cast<int>(std::lround(s1)) % grid.n1();
  int nu2 = static_cast<int>(std::lround(s2)) % grid.n2();
  if (nu1 < 0) nu1 += grid.n1();
  if (nu2 < 0) nu2 += grid.n2();
  return mode_wavevector(grid, nu1, nu2);
}

namespace {

PointFunction plane_wave_function(const Vec2& k, double mass, int branch) {
  const PlaneWaveSolution pw = PlaneWaveSolution::make(k, mass, branch);
  return [pw](const Vec2& x) {
    const cplx ph = std::polar(1.0, pw.k.dot(x));
    return Spinor{ph * pw.spinor[0], ph * pw.spinor[1]};
  };
}

}  // namespace

SpinorField plane_wave(const SiteGrid& grid, const Vec2& k, double mass, int branch) {
  SpinorField psi = sample_sites(grid, plane_wave_function(commensurate_wavevector(grid, k), mass, branch));
  normalize(psi);
  return psi;
}

EdgeField plane_wave(const TriangularWalk& walk, const Vec2& k, double mass, int branch) {
  EdgeField psi =
      sample_edges(walk, plane_wave_function(commensurate_wavevector(walk.coin_grid(), k), mass, branch));
  normalize(psi);
  return psi;
}

SpinorField delta(const SiteGrid& grid, int a, int b, const Spinor& s) {
  SpinorField psi(grid);
  psi.at(a, b) = s;
  return psi;
}

EdgeField delta(const TriangularWalk& walk, int a, int b, int k, const Spinor& s) {
  EdgeField psi = walk.make_field();
  psi.at(a, b, k) = s;
  return psi;
}

}  // namespace cqw
