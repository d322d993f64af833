#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cqw {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat2c = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;

/// Two-component spinor amplitude (spin up, spin down).
struct Spinor {
  cplx up{0.0, 0.0};
  cplx down{0.0, 0.0};

  double norm2() const { return std::norm(up) + std::norm(down); }
  friend bool operator==(const Spinor&, const Spinor&) = default;
};

inline Spinor mul(const Mat2c& m, const Spinor& s) {
  return {m(0, 0) * s.up + m(0, 1) * s.down, m(1, 0) * s.up + m(1, 1) * s.down};
}

inline Spinor mul_adjoint(const Mat2c& m, const Spinor& s) {
  return {std::conj(m(0, 0)) * s.up + std::conj(m(1, 0)) * s.down,
          std::conj(m(0, 1)) * s.up + std::conj(m(1, 1)) * s.down};
}

inline Spinor scale(cplx c, const Spinor& s) { return {c * s.up, c * s.down}; }

// Error hierarchy. Each maps to a distinct CLI exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Lambda lies outside the region a coin set can absorb (fast necessary-condition check).
class CoinInfeasible : public Error {
 public:
  using Error::Error;
};

/// Newton did not converge from the seed nor from any restart.
class CoinNoSolution : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& pointer, const std::string& what)
      : Error(pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace cqw
