#pragma once

// Run configuration parsed from strict JSON. Every validation failure throws
// ConfigError carrying the JSON pointer of the offending field.

#include <optional>
#include <string>
#include <vector>

#include "cqw/coin.hpp"
#include "cqw/initial_state.hpp"
#include "cqw/lattice.hpp"
#include "cqw/metric_family.hpp"

namespace cqw {

struct LatticeConfig {
  LatticeKind kind = LatticeKind::honeycomb;
  /// Sites per axis (honeycomb, square) or unit cells per axis (triangular).
  int n1 = 0;
  int n2 = 0;
  double epsilon = 0.0;
};

struct InitialConfig {
  enum class Kind { gaussian, plane_wave, delta };
  Kind kind = Kind::gaussian;
  GaussianPacket gaussian{};
  Vec2 k = Vec2::Zero();
  int branch = 1;
  std::array<int, 2> site{0, 0};
  int edge = 0;
  Spinor spinor{cplx(1.0, 0.0), cplx(0.0, 0.0)};
};

struct OutputConfig {
  std::string directory = ".";
  int dump_every = 0;
  std::vector<std::string> observables{"norm"};

  bool wants(const std::string& name) const;
};

struct StudyConfig {
  std::vector<double> epsilons;
};

struct OracleConfig {
  /// <= 0 selects the step automatically.
  double dt = 0.0;
  double drift_budget = 1e-8;
};

struct DispersionConfig {
  std::vector<Vec2> k;
};

struct RunConfig {
  LatticeConfig lattice;
  MetricFamily metric = MetricFamily::flat();
  double mass = 0.0;
  int steps = 0;
  double T = 0.0;
  int recompile_every = 0;
  InitialConfig initial;
  OutputConfig output;
  std::optional<StudyConfig> study;
  OracleConfig oracle;
  DispersionConfig dispersion;
  CompileOptions compile{};

  /// Physical side length of the periodic domain along each lattice axis.
  double domain1() const;
  double domain2() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace cqw
