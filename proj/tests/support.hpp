#pragma once

// Shared helpers for the unit tests: seeded random fields and coins, and
// small independent reference computations.

#include <random>

#include "cqw/coin.hpp"
#include "cqw/honeycomb_walk.hpp"
#include "cqw/lattice.hpp"
#include "cqw/triangular_walk.hpp"

namespace cqw::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240917);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline cplx random_cplx() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

inline Spinor random_spinor() { return {random_cplx(), random_cplx()}; }

inline SpinorField random_field(const SiteGrid& g) {
  SpinorField f(g);
  for (auto& s : f.data) s = random_spinor();
  return f;
}

inline EdgeField random_edges(int n1, int n2, double eps) {
  EdgeField f(n1, n2, eps);
  for (auto& s : f.data) s = random_spinor();
  return f;
}

/// Coins with independent random angles, phases and masses at every site.
inline CoinField random_coins(const SiteGrid& g, const LatticeDirections& dirs) {
  CoinField c(g, dirs, 0.0);
  for (std::size_t s = 0; s < c.size(); ++s) {
    SiteCoins& sc = c[s];
    for (int i = 0; i < 3; ++i) {
      sc.angles[i] = {uniform(0.0, kPi), uniform(-kPi, kPi)};
      sc.unitary[i] = unitary_from_angles(sc.angles[i]);
      sc.gamma[i] = uniform(-2.0, 2.0);
    }
    sc.inv_et0 = uniform(0.5, 1.5);
  }
  return c;
}

inline double max_abs(const Mat2c& m) { return m.cwiseAbs().maxCoeff(); }

/// exp(-i t H) by scaling, Taylor series and squaring.
inline Mat2c expm_taylor(const Mat2c& h, double t) {
  const Mat2c a = cplx(0.0, -t) * h;
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  const Mat2c b = a / std::pow(2.0, squarings);
  Mat2c term = Mat2c::Identity();
  Mat2c sum = Mat2c::Identity();
  for (int n = 1; n < 30; ++n) {
    term = term * b / static_cast<double>(n);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

inline double field_norm(const SpinorField& f) {
  long double s = 0.0;
  for (const auto& x : f.data) s += x.norm2();
  return static_cast<double>(s);
}

inline double field_norm(const EdgeField& f) {
  long double s = 0.0;
  for (const auto& x : f.data) s += x.norm2();
  return static_cast<double>(s);
}

}  // namespace cqw::test
