#include "cqw/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cqw/format.hpp"
#include "cqw/harness.hpp"
#include "cqw/snapshot.hpp"

namespace cqw {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

SiteGrid site_grid(const RunConfig& c) {
  const auto basis = c.lattice.kind == LatticeKind::square ? SiteGrid::Basis::square : SiteGrid::Basis::hexagonal;
  return SiteGrid(basis, c.lattice.n1, c.lattice.n2, c.lattice.epsilon);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream f(fs::path(dir) / name, std::ios::binary);
  if (!f) throw Error("cannot open " + (fs::path(dir) / name).string() + " for writing");
  return f;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  auto f = open_out(dir, name);
  f << j.dump(2) << '\n';
}

// The walk evolves the rescaled field chi; a packet given in psi is converted.
SpinorField initial_sites(const RunConfig& c, const SiteGrid& g) {
  const InitialConfig& in = c.initial;
  switch (in.kind) {
    case InitialConfig::Kind::gaussian: {
      SpinorField chi = sample_sites(g, [&](const Vec2& x) {
        return scale(chi_factor(c.metric, {0.0, x.x(), x.y()}), in.gaussian(g, x));
      });
      normalize(chi);
      return chi;
    }
    case InitialConfig::Kind::plane_wave:
      return plane_wave(g, in.k, c.mass, in.branch);
    case InitialConfig::Kind::delta:
      return delta(g, in.site[0], in.site[1], in.spinor);
  }
  throw Error("unknown initial state");
}

EdgeField initial_edges(const RunConfig& c, const TriangularWalk& walk) {
  const InitialConfig& in = c.initial;
  switch (in.kind) {
    case InitialConfig::Kind::gaussian: {
      const SiteGrid g = walk.coin_grid();
      EdgeField chi = sample_edges(walk, [&](const Vec2& x) {
        return scale(chi_factor(c.metric, {0.0, x.x(), x.y()}), in.gaussian(g, x));
      });
      normalize(chi);
      return chi;
    }
    case InitialConfig::Kind::plane_wave:
      return plane_wave(walk, in.k, c.mass, in.branch);
    case InitialConfig::Kind::delta:
      return delta(walk, in.site[0], in.site[1], in.edge, in.spinor);
  }
  throw Error("unknown initial state");
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.cqw", step);
  return buf;
}

StudySetup study_setup(const RunConfig& c) {
  if (!c.study) throw ConfigError("/study", "missing required section");
  if (c.initial.kind != InitialConfig::Kind::gaussian)
    throw ConfigError("/initial", "convergence studies need a gaussian initial state");
  if (c.lattice.n1 != c.lattice.n2) throw ConfigError("/lattice", "convergence studies need n1 == n2");
  StudySetup s;
  s.lattice = c.lattice.kind;
  s.metric = c.metric;
  s.mass = c.mass;
  s.T = c.T;
  s.domain = c.domain1();
  s.packet = c.initial.gaussian;
  s.epsilons = c.study->epsilons;
  s.compile = c.compile;
  return s;
}

void write_study(const ConvergenceReport& r, const std::string& dir) {
  {
    auto f = open_out(dir, "study.csv");
    CsvWriter csv(f, {"epsilon", "l2_error"});
    for (const auto& p : r.points) csv.row({p.eps, p.error});
  }
  json j;
  j["lattice"] = r.lattice;
  j["metric"] = r.metric;
  j["T"] = r.T;
  j["domain"] = r.domain;
  j["slope"] = r.slope;
  j["fit_residual"] = r.residual;
  j["oracle_self_error"] = r.oracle_self_error;
  j["oracle_spacing"] = r.oracle_spacing;
  j["epsilon"] = json::array();
  j["l2_error"] = json::array();
  for (const auto& p : r.points) {
    j["epsilon"].push_back(p.eps);
    j["l2_error"].push_back(p.error);
  }
  write_json(dir, "study.json", j);
}

class NullBuffer : public std::streambuf {
 protected:
  int overflow(int c) override { return c; }
};

}  // namespace

void run_compile(const RunConfig& c, const std::string& dir, std::ostream& log) {
  const SiteGrid g = c.lattice.kind == LatticeKind::triangular
                         ? TriangularWalk(c.lattice.n1, c.lattice.n2, c.lattice.epsilon).coin_grid()
                         : site_grid(c);
  const LatticeDirections dirs = directions_for(g);
  CompileStats stats;
  const CoinField coins = compile_coins(c.metric, g, dirs, 0.0, c.compile, &stats);

  {
    auto f = open_out(dir, "coins.csv");
    std::vector<std::string> cols{"a", "b", "x", "y"};
    for (int i = 0; i < dirs.count; ++i) {
      const std::string s = std::to_string(i);
      cols.insert(cols.end(), {"theta" + s, "phi" + s, "gamma" + s});
    }
    CsvWriter csv(f, cols);
    std::vector<double> row;
    for (std::size_t idx = 0; idx < coins.size(); ++idx) {
      const Vec2 x = g.position(idx);
      row = {static_cast<double>(idx % g.n1()), static_cast<double>(idx / g.n1()), x.x(), x.y()};
      for (int i = 0; i < dirs.count; ++i)
        row.insert(row.end(), {coins[idx].angles[i].theta, coins[idx].angles[i].phi, coins[idx].gamma[i]});
      csv.row(row);
    }
  }
  json j;
  j["lattice"] = to_string(c.lattice.kind);
  j["metric"] = c.metric.name();
  j["n1"] = g.n1();
  j["n2"] = g.n2();
  j["epsilon"] = g.eps();
  j["sites"] = coins.size();
  j["unitarity_residual"] = coins.unitarity_residual();
  j["c1_residual"] = coins.c1_residual();
  j["c2_residual"] = coins.c2_residual();
  j["parallel"] = stats.used_parallel;
  j["fell_back"] = stats.fell_back;
  write_json(dir, "coins.json", j);
  log << "compiled " << coins.size() << " sites; C1 residual " << format_short(coins.c1_residual())
      << ", C2 residual " << format_short(coins.c2_residual()) << '\n';
}

void run_walk(const RunConfig& c, const std::string& dir, std::ostream& log) {
  auto f = open_out(dir, "observables.csv");
  const bool densities = c.output.wants("densities");
  std::vector<std::string> cols{"step", "time", "norm", "mean_x", "mean_y", "spread"};
  if (densities) cols.insert(cols.end(), {"p_up", "p_down"});
  CsvWriter csv(f, cols);
  const int dump = c.output.dump_every;

  auto record = [&](int step, double t, const Observables& o) {
    std::vector<double> row{static_cast<double>(step), t, o.norm, o.mean.x(), o.mean.y(), o.spread};
    if (densities) row.insert(row.end(), {o.p_up, o.p_down});
    csv.row(row);
  };
  auto dump_due = [&](int step) { return step == 0 ? true : dump > 0 && step % dump == 0; };

  EvolveOptions opt;
  opt.steps = c.steps;
  opt.recompile_every = c.recompile_every;
  opt.compile = c.compile;
  const WalkParams params{c.lattice.epsilon, c.mass};

  double final_norm = 0.0;
  if (c.lattice.kind == LatticeKind::triangular) {
    const TriangularWalk walk(c.lattice.n1, c.lattice.n2, c.lattice.epsilon);
    walk.evolve(initial_edges(c, walk), c.metric, params, opt, [&](int step, double t, const EdgeField& psi) {
      const Observables o = observables(psi);
      record(step, t, o);
      final_norm = o.norm;
      if (dump_due(step)) write_snapshot_file((fs::path(dir) / snapshot_name(step)).string(), to_snapshot(psi));
    });
  } else {
    evolve(initial_sites(c, site_grid(c)), c.metric, params, opt, [&](int step, double t, const SpinorField& psi) {
      const Observables o = observables(psi);
      record(step, t, o);
      final_norm = o.norm;
      if (dump_due(step)) write_snapshot_file((fs::path(dir) / snapshot_name(step)).string(), to_snapshot(psi));
    });
  }
  log << "ran " << c.steps << " steps on the " << to_string(c.lattice.kind) << " lattice; final norm "
      << format_double(final_norm) << '\n';
  if (c.study) run_study(c, dir, log);
}

void run_study(const RunConfig& c, const std::string& dir, std::ostream& log) {
  const StudySetup s = study_setup(c);
  const ConvergenceReport r = convergence_study(s);
  write_study(r, dir);
  log << "study slope " << format_short(r.slope) << " (fit residual " << format_short(r.residual)
      << ", oracle self error " << format_short(r.oracle_self_error) << ")\n";
}

void run_oracle(const RunConfig& c, const std::string& dir, std::ostream& log) {
  const SiteGrid g = c.lattice.kind == LatticeKind::triangular
                         ? TriangularWalk(c.lattice.n1, c.lattice.n2, c.lattice.epsilon).coin_grid()
                         : site_grid(c);
  // The oracle always works on the Bravais grid; the square lattice keeps its own basis.
  const SpinorField chi0 = initial_sites(c, g);
  json j;
  j["T"] = c.T;
  j["n1"] = g.n1();
  j["n2"] = g.n2();
  j["spacing"] = g.eps();
  SpinorField chi = chi0;
  if (c.metric.is_flat()) {
    chi = flat_evolve(chi0, c.mass, c.T);
    j["method"] = "spectral";
  } else {
    Rk4Report rep;
    chi = evolve_rk4(chi0, c.metric, c.mass, c.T, c.oracle.dt, c.oracle.drift_budget, &rep);
    j["method"] = "rk4";
    j["steps"] = rep.steps;
    j["dt"] = rep.dt;
    j["norm_drift"] = rep.norm_drift;
  }
  j["final_norm"] = l2_norm(chi);
  write_snapshot_file((fs::path(dir) / "oracle.cqw").string(), to_snapshot(chi));
  write_json(dir, "oracle.json", j);
  log << "oracle evolved to T = " << format_short(c.T) << " (" << j["method"].get<std::string>() << ")\n";
}

void run_dispersion(const RunConfig& c, const std::string& dir, std::ostream& log) {
  if (c.lattice.kind == LatticeKind::triangular)
    throw ConfigError("/lattice/kind", "dispersion is available for the honeycomb and square lattices");
  if (!c.metric.is_homogeneous_in_space())
    throw ConfigError("/metric", "dispersion needs a spatially homogeneous metric");
  const double eps = c.lattice.epsilon;
  const SiteGrid g(site_grid(c).basis(), 4, 4, eps);
  const LatticeDirections dirs = directions_for(g);
  const CoinField coins = compile_coins(c.metric, g, dirs, 0.0);
  const SiteCoins& sc = coins[0];
  const double mt = c.mass * sc.inv_et0;

  std::vector<Vec2> ks = c.dispersion.k;
  if (ks.empty())
    for (int i = 1; i <= 20; ++i) ks.emplace_back(0.1 * i, 0.05 * i);

  auto f = open_out(dir, "dispersion.csv");
  CsvWriter csv(f, {"kx", "ky", "omega_minus", "omega_plus", "exact_minus", "exact_plus"});
  double worst = 0.0;
  for (const Vec2& k : ks) {
    const auto w = dispersion_extract(sc, dirs, mt, eps, k);
    const Vec2 q = sc.lambda.transpose() * k;
    const double e = eps * std::sqrt(q.squaredNorm() + mt * mt);
    csv.row({k.x(), k.y(), w[0], w[1], -e, e});
    worst = std::max({worst, std::abs(w[0] + e), std::abs(w[1] - e)});
  }
  log << "dispersion at " << ks.size() << " wavevectors; max phase error " << format_short(worst) << '\n';
}

int execute_text(const std::string& verb, const std::string& text, const RunnerOptions& options, std::ostream& out,
                 std::ostream& err) {
  NullBuffer null_buf;
  std::ostream null_stream(&null_buf);
  std::ostream& log = options.quiet ? null_stream : out;
  try {
    const RunConfig c = parse_config(text);
    const std::string dir = options.out_dir.empty() ? c.output.directory : options.out_dir;
    fs::create_directories(dir);
    if (verb == "compile")
      run_compile(c, dir, log);
    else if (verb == "run")
      run_walk(c, dir, log);
    else if (verb == "study")
      run_study(c, dir, log);
    else if (verb == "oracle")
      run_oracle(c, dir, log);
    else if (verb == "dispersion")
      run_dispersion(c, dir, log);
    else {
      err << "error: unknown verb '" << verb << "' (allowed: compile, run, study, oracle, dispersion)\n";
      return kExitOther;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CoinInfeasible& e) {
    err << "coin infeasible: " << e.what() << '\n';
    return kExitCoin;
  } catch (const CoinNoSolution& e) {
    err << "coin solver failed: " << e.what() << '\n';
    return kExitCoin;
  } catch (const OracleError& e) {
    err << "oracle error: " << e.what() << '\n';
    return kExitOracle;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOther;
  }
}

int execute(const std::string& verb, const std::string& config_path, const RunnerOptions& options, std::ostream& out,
            std::ostream& err) {
  std::ifstream in(config_path);
  if (!in) {
    err << "config error: cannot read " << config_path << '\n';
    return kExitConfig;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return execute_text(verb, ss.str(), options, out, err);
}

}  // namespace cqw
