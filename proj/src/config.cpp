#include "cqw/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cqw/format.hpp"

namespace cqw {

namespace {

using json = nlohmann::json;

std::string child(const std::string& ptr, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~')
      escaped += "~0";
    else if (c == '/')
      escaped += "~1";
    else
      escaped += c;
  }
  return ptr + "/" + escaped;
}

std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

// Object accessor that rejects unknown keys and reports JSON pointers.
class Obj {
 public:
  Obj(const json& j, std::string ptr, std::set<std::string> allowed) : j_(j), ptr_(std::move(ptr)) {
    if (!j.is_object()) throw ConfigError(ptr_.empty() ? "/" : ptr_, "expected an object");
    for (const auto& [key, value] : j.items())
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError(child(ptr_, key), "unknown key (allowed: " + list + ")");
      }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& at(const std::string& key) const {
    if (!has(key)) throw ConfigError(child(ptr_, key), "missing required field");
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return child(ptr_, key); }
  const std::string& ptr() const { return ptr_; }

  double number(const std::string& key) const { return as_number(at(key), path(key)); }
  double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  int integer(const std::string& key) const { return as_integer(at(key), path(key)); }
  int integer_or(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }
  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError(path(key), "expected a boolean");
    return at(key).get<bool>();
  }
  std::string string(const std::string& key) const {
    if (!at(key).is_string()) throw ConfigError(path(key), "expected a string");
    return at(key).get<std::string>();
  }

  static double as_number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ConfigError(ptr, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(ptr, "expected a finite number");
    return d;
  }
  static int as_integer(const json& v, const std::string& ptr) {
    if (!v.is_number_integer()) throw ConfigError(ptr, "expected an integer");
    const auto i = v.get<long long>();
    if (i < -2147483647LL || i > 2147483647LL) throw ConfigError(ptr, "integer out of range");
    return static_cast<int>(i);
  }

 private:
  const json& j_;
  std::string ptr_;
};

Vec2 vec2(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(ptr, "expected an array of two numbers");
  return {Obj::as_number(v[0], child(ptr, std::size_t{0})), Obj::as_number(v[1], child(ptr, std::size_t{1}))};
}

cplx complex_value(const json& v, const std::string& ptr) {
  if (v.is_number()) return {Obj::as_number(v, ptr), 0.0};
  if (v.is_array() && v.size() == 2)
    return {Obj::as_number(v[0], child(ptr, std::size_t{0})), Obj::as_number(v[1], child(ptr, std::size_t{1}))};
  throw ConfigError(ptr, "expected a number or a [re, im] pair");
}

Spinor spinor_value(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(ptr, "expected a two-component spinor");
  Spinor s{complex_value(v[0], child(ptr, std::size_t{0})), complex_value(v[1], child(ptr, std::size_t{1}))};
  if (s.norm2() == 0.0) throw ConfigError(ptr, "spinor must be nonzero");
  return s;
}

MetricExpression expression(const json& v, const std::string& ptr) {
  if (v.is_number()) return MetricExpression::constant(Obj::as_number(v, ptr));
  if (!v.is_string()) throw ConfigError(ptr, "expected an expression string or a number");
  try {
    return MetricExpression::parse(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ConfigError(ptr, std::string("invalid expression: ") + e.what());
  }
}

LatticeConfig parse_lattice(const json& j) {
  const Obj o(j, "/lattice", {"kind", "n1", "n2", "epsilon"});
  LatticeConfig l;
  const std::string kind = o.string("kind");
  if (kind == "honeycomb")
    l.kind = LatticeKind::honeycomb;
  else if (kind == "triangular")
    l.kind = LatticeKind::triangular;
  else if (kind == "square")
    l.kind = LatticeKind::square;
  else
    throw ConfigError(o.path("kind"), "invalid value '" + kind + "' (allowed: honeycomb, triangular, square)");
  l.n1 = o.integer("n1");
  l.n2 = o.integer("n2");
  const int min_dim = l.kind == LatticeKind::triangular ? 2 : 1;
  if (l.n1 < min_dim) throw ConfigError(o.path("n1"), "must be at least " + std::to_string(min_dim));
  if (l.n2 < min_dim) throw ConfigError(o.path("n2"), "must be at least " + std::to_string(min_dim));
  l.epsilon = o.number("epsilon");
  if (!(l.epsilon > 0.0)) throw ConfigError(o.path("epsilon"), "must be positive");
  return l;
}

MetricFamily parse_metric(const json& j) {
  if (!j.is_object() || !j.contains("family")) throw ConfigError("/metric/family", "missing required field");
  if (!j.at("family").is_string()) throw ConfigError("/metric/family", "expected a string");
  const std::string family = j.at("family").get<std::string>();
  try {
    if (family == "flat") {
      Obj(j, "/metric", {"family"});
      return MetricFamily::flat();
    }
    if (family == "homogeneous") {
      const Obj o(j, "/metric", {"family", "lambda"});
      const json& l = o.at("lambda");
      const std::string p = o.path("lambda");
      if (!l.is_array() || l.size() != 2) throw ConfigError(p, "expected a 2x2 array");
      const MetricExpression zero = MetricExpression::constant(0.0);
      std::array<std::array<MetricExpression, 2>, 2> m{{{zero, zero}, {zero, zero}}};
      for (std::size_t r = 0; r < 2; ++r) {
        if (!l[r].is_array() || l[r].size() != 2) throw ConfigError(child(p, r), "expected a row of two entries");
        for (std::size_t c = 0; c < 2; ++c) {
          m[r][c] = expression(l[r][c], child(child(p, r), c));
          if (m[r][c].depends_on('x') || m[r][c].depends_on('y'))
            throw ConfigError(child(child(p, r), c), "homogeneous entries may depend on t only");
        }
      }
      return MetricFamily::homogeneous(m);
    }
    if (family == "conformal") {
      const Obj o(j, "/metric", {"family", "f"});
      return MetricFamily::conformal(expression(o.at("f"), o.path("f")));
    }
    if (family == "custom") {
      const Obj o(j, "/metric", {"family", "g_tt", "g_xx", "g_xy", "g_yy"});
      const MetricExpression gxy =
          o.has("g_xy") ? expression(o.at("g_xy"), o.path("g_xy")) : MetricExpression::constant(0.0);
      return MetricFamily::custom(expression(o.at("g_tt"), o.path("g_tt")), expression(o.at("g_xx"), o.path("g_xx")),
                                  gxy, expression(o.at("g_yy"), o.path("g_yy")));
    }
  } catch (const GeometryError& e) {
    throw ConfigError("/metric", e.what());
  }
  throw ConfigError("/metric/family",
                    "invalid value '" + family + "' (allowed: flat, homogeneous, conformal, custom)");
}

InitialConfig parse_initial(const json& j, const LatticeConfig& lat) {
  const Obj o(j, "/initial", {"gaussian", "plane_wave", "delta"});
  if (j.size() != 1) throw ConfigError("/initial", "exactly one of gaussian, plane_wave, delta is required");
  InitialConfig c;
  if (o.has("gaussian")) {
    const Obj g(o.at("gaussian"), o.path("gaussian"), {"center", "width", "momentum", "spinor"});
    c.kind = InitialConfig::Kind::gaussian;
    c.gaussian.center = vec2(g.at("center"), g.path("center"));
    c.gaussian.width = g.number("width");
    if (!(c.gaussian.width > 0.0)) throw ConfigError(g.path("width"), "must be positive");
    c.gaussian.momentum = g.has("momentum") ? vec2(g.at("momentum"), g.path("momentum")) : Vec2::Zero();
    const Spinor s = g.has("spinor") ? spinor_value(g.at("spinor"), g.path("spinor")) : Spinor{1.0, 0.0};
    const double n = std::sqrt(s.norm2());
    c.gaussian.spinor = Eigen::Vector2cd(s.up / n, s.down / n);
  } else if (o.has("plane_wave")) {
    const Obj p(o.at("plane_wave"), o.path("plane_wave"), {"k", "branch"});
    c.kind = InitialConfig::Kind::plane_wave;
    c.k = vec2(p.at("k"), p.path("k"));
    c.branch = p.integer_or("branch", 1);
    if (c.branch != 1 && c.branch != -1) throw ConfigError(p.path("branch"), "must be +1 or -1");
  } else {
    const Obj d(o.at("delta"), o.path("delta"), {"site", "edge", "spinor"});
    c.kind = InitialConfig::Kind::delta;
    if (d.has("site")) {
      const json& s = d.at("site");
      if (!s.is_array() || s.size() != 2) throw ConfigError(d.path("site"), "expected [a, b]");
      c.site = {Obj::as_integer(s[0], child(d.path("site"), std::size_t{0})),
                Obj::as_integer(s[1], child(d.path("site"), std::size_t{1}))};
    }
    c.edge = d.integer_or("edge", 0);
    if (c.edge < 0 || c.edge > 2) throw ConfigError(d.path("edge"), "must be 0, 1 or 2");
    if (d.has("edge") && lat.kind != LatticeKind::triangular)
      throw ConfigError(d.path("edge"), "only meaningful on the triangular lattice");
    c.spinor = d.has("spinor") ? spinor_value(d.at("spinor"), d.path("spinor")) : Spinor{1.0, 0.0};
  }
  return c;
}

}  // namespace

bool OutputConfig::wants(const std::string& name) const {
  return std::find(observables.begin(), observables.end(), name) != observables.end();
}

double RunConfig::domain1() const {
  return lattice.kind == LatticeKind::triangular ? 2.0 * lattice.n1 * lattice.epsilon : lattice.n1 * lattice.epsilon;
}

double RunConfig::domain2() const {
  return lattice.kind == LatticeKind::triangular ? 2.0 * lattice.n2 * lattice.epsilon : lattice.n2 * lattice.epsilon;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  const Obj root(j, "", {"lattice", "metric", "mass", "time", "initial", "output", "study", "oracle", "dispersion",
                         "compile", "recompile_every"});
  RunConfig c;
  c.lattice = parse_lattice(root.at("lattice"));
  c.metric = root.has("metric") ? parse_metric(root.at("metric")) : MetricFamily::flat();
  c.mass = root.number_or("mass", 0.0);
  c.recompile_every = root.integer_or("recompile_every", 0);
  if (c.recompile_every < 0) throw ConfigError("/recompile_every", "must be non-negative");

  {
    const Obj t(root.at("time"), "/time", {"steps", "T"});
    const double eps = c.lattice.epsilon;
    if (!t.has("steps") && !t.has("T")) throw ConfigError("/time", "one of steps or T is required");
    if (t.has("steps")) {
      c.steps = t.integer("steps");
      if (c.steps < 0) throw ConfigError("/time/steps", "must be non-negative");
    }
    if (t.has("T")) {
      c.T = t.number("T");
      if (c.T < 0.0) throw ConfigError("/time/T", "must be non-negative");
      const double n = std::round(c.T / eps);
      if (std::abs(n * eps - c.T) > 1e-9 * std::max(1.0, c.T))
        throw ConfigError("/time/T", "must be an integer multiple of epsilon = " + format_short(eps));
      if (t.has("steps") && static_cast<int>(n) != c.steps)
        throw ConfigError("/time", "steps and T are inconsistent (T / epsilon = " + format_short(n) + ")");
      c.steps = static_cast<int>(n);
    }
    c.T = c.steps * eps;
  }

  c.initial = root.has("initial") ? parse_initial(root.at("initial"), c.lattice) : InitialConfig{};
  if (!root.has("initial")) {
    c.initial.gaussian.center = Vec2::Zero();
    c.initial.gaussian.width = 1.0;
  }

  c.output.dump_every = c.steps;
  if (root.has("output")) {
    const Obj o(root.at("output"), "/output", {"directory", "dump_every", "observables"});
    if (o.has("directory")) c.output.directory = o.string("directory");
    c.output.dump_every = o.integer_or("dump_every", c.steps);
    if (c.output.dump_every < 0) throw ConfigError(o.path("dump_every"), "must be non-negative");
    if (o.has("observables")) {
      const json& l = o.at("observables");
      if (!l.is_array()) throw ConfigError(o.path("observables"), "expected an array of names");
      c.output.observables.clear();
      static const std::set<std::string> known{"norm", "mean", "spread", "densities"};
      for (std::size_t i = 0; i < l.size(); ++i) {
        const std::string p = child(o.path("observables"), i);
        if (!l[i].is_string() || !known.count(l[i].get<std::string>()))
          throw ConfigError(p, "invalid observable (allowed: norm, mean, spread, densities)");
        c.output.observables.push_back(l[i].get<std::string>());
      }
    }
  }

  if (root.has("study")) {
    const Obj s(root.at("study"), "/study", {"epsilons"});
    const json& l = s.at("epsilons");
    if (!l.is_array() || l.size() < 3) throw ConfigError(s.path("epsilons"), "expected at least three values");
    StudyConfig sc;
    for (std::size_t i = 0; i < l.size(); ++i) {
      const double e = Obj::as_number(l[i], child(s.path("epsilons"), i));
      if (!(e > 0.0)) throw ConfigError(child(s.path("epsilons"), i), "must be positive");
      if (i > 0 && std::abs(sc.epsilons.back() / e - 2.0) > 1e-9)
        throw ConfigError(child(s.path("epsilons"), i), "each value must halve the previous one");
      sc.epsilons.push_back(e);
    }
    c.study = sc;
  }

  if (root.has("oracle")) {
    const Obj o(root.at("oracle"), "/oracle", {"dt", "drift_budget"});
    c.oracle.dt = o.number_or("dt", 0.0);
    c.oracle.drift_budget = o.number_or("drift_budget", 1e-8);
    if (!(c.oracle.drift_budget > 0.0)) throw ConfigError(o.path("drift_budget"), "must be positive");
  }

  if (root.has("dispersion")) {
    const Obj d(root.at("dispersion"), "/dispersion", {"k"});
    const json& l = d.at("k");
    if (!l.is_array() || l.empty()) throw ConfigError(d.path("k"), "expected a non-empty array of wavevectors");
    for (std::size_t i = 0; i < l.size(); ++i) c.dispersion.k.push_back(vec2(l[i], child(d.path("k"), i)));
  }

  if (root.has("compile")) {
    const Obj o(root.at("compile"), "/compile", {"parallel", "band_rows"});
    c.compile.parallel = o.boolean_or("parallel", false);
    c.compile.band_rows = o.integer_or("band_rows", 0);
    if (c.compile.band_rows < 0) throw ConfigError(o.path("band_rows"), "must be non-negative");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read configuration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cqw
