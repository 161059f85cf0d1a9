#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ergodic/errors.hpp"
#include "ergodic/rng.hpp"

// Flat configuration files: one `key = value` per line, dotted keys, `#`
// starts a comment. Later lines override earlier ones.

namespace ergodic {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
  return d;
}

}  // namespace detail

class Config {
 public:
  static Config parse(std::istream& is, const std::string& origin = "<config>") {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw InputError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw InputError(origin + ":" + std::to_string(lineno) + ": empty key");
      c.set(key, value);
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path + "'");
    return parse(in, path);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> raw(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string str(const std::string& key, const std::string& dflt) const { return raw(key).value_or(dflt); }

  double num(const std::string& key, double dflt) const {
    auto v = raw(key);
    return v ? detail::to_double(key, *v) : dflt;
  }

  std::uint64_t uint(const std::string& key, std::uint64_t dflt) const {
    auto v = raw(key);
    if (!v) return dflt;
    const double d = detail::to_double(key, *v);
    if (d < 0.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      throw InputError("config: '" + key + "' expects a nonnegative integer");
    }
    return static_cast<std::uint64_t>(d);
  }

  bool flag(const std::string& key, bool dflt) const {
    auto v = raw(key);
    if (!v) return dflt;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw InputError("config: '" + key + "' expects a boolean");
  }

  /// Keys under `prefix.` with the prefix stripped.
  std::map<std::string, std::string> section(const std::string& prefix) const {
    std::map<std::string, std::string> out;
    const std::string p = prefix + ".";
    for (const auto& [k, v] : values_) {
      if (k.rfind(p, 0) == 0) {
        used_.insert(k);
        out[k.substr(p.size())] = v;
      }
    }
    return out;
  }

  /// Keys that were never read.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) out.push_back(k);
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

enum class SchemeKind { euler, milstein, jump };

inline SchemeKind parse_scheme(const std::string& s) {
  if (s == "euler") return SchemeKind::euler;
  if (s == "milstein") return SchemeKind::milstein;
  if (s == "jump_euler" || s == "jump") return SchemeKind::jump;
  throw InputError("unknown scheme '" + s + "'");
}

inline std::string to_string(SchemeKind s) {
  switch (s) {
    case SchemeKind::euler: return "euler";
    case SchemeKind::milstein: return "milstein";
    case SchemeKind::jump: return "jump_euler";
  }
  return "?";
}

struct BumpSpec {
  std::vector<double> center;
  double radius = 1.0;
};

struct RunConfig {
  std::string model = "ou";
  std::map<std::string, double> model_params;

  // Lyapunov overrides (quadratic V = v0 + scale |x|^2)
  std::optional<double> lyap_v0;
  std::optional<double> lyap_scale;
  std::string lyap_psi = "poly";  // poly | exp
  std::optional<double> lyap_p;
  double lyap_lambda = 0.1;
  std::optional<double> lyap_a;

  SchemeKind scheme = SchemeKind::euler;
  LevyAreaMode levy_area = LevyAreaMode::commutative;
  IncrementMode increments = IncrementMode::gaussian;
  std::uint64_t seed = 1;

  double gamma1 = 0.5;
  double theta = 1.0 / 3.0;
  bool equal_weights = true;
  double eta1 = 0.5;
  double kappa = 1.0 / 3.0;

  std::uint64_t steps = 100000;
  std::uint64_t replicas = 8;
  std::vector<double> x0;

  int monomials = 2;
  std::vector<BumpSpec> bumps;
  bool generator = false;

  std::string reference = "none";  // none | speed_measure | levy_ou_moments
  bool check = true;
  double check_alpha = 1.0;
  double check_beta = 3.0;
  double check_rho = 2.0;
  double check_s = 2.0;
  double check_q = 1.0;
  double check_c_sigma = 10.0;
  std::optional<double> check_b_phi_c;
  std::optional<double> check_dominance_c;
  std::uint64_t check_horizon = 10'000'000;

  std::string output_dir = "out";
};

/// "c1;c2:r, c1;c2:r" -> bumps
inline std::vector<BumpSpec> parse_bumps(const std::string& s) {
  std::vector<BumpSpec> out;
  for (const auto& item : detail::split(s, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InputError("functionals.bumps: expected center:radius, got '" + item + "'");
    BumpSpec b;
    for (const auto& c : detail::split(item.substr(0, colon), ';')) b.center.push_back(detail::to_double("functionals.bumps", c));
    b.radius = detail::to_double("functionals.bumps", detail::trim(item.substr(colon + 1)));
    if (b.center.empty() || !(b.radius > 0.0)) throw InputError("functionals.bumps: invalid bump '" + item + "'");
    out.push_back(std::move(b));
  }
  return out;
}

inline RunConfig parse_run_config(const Config& c) {
  RunConfig r;
  r.model = c.str("model", r.model);
  for (const auto& [k, v] : c.section("model")) r.model_params[k] = detail::to_double("model." + k, v);

  if (c.has("lyapunov.v0")) r.lyap_v0 = c.num("lyapunov.v0", 1.0);
  if (c.has("lyapunov.scale")) r.lyap_scale = c.num("lyapunov.scale", 1.0);
  r.lyap_psi = c.str("lyapunov.psi", r.lyap_psi);
  if (r.lyap_psi != "poly" && r.lyap_psi != "exp") throw InputError("lyapunov.psi must be poly or exp");
  if (c.has("lyapunov.p")) r.lyap_p = c.num("lyapunov.p", 1.0);
  r.lyap_lambda = c.num("lyapunov.lambda", r.lyap_lambda);
  if (c.has("lyapunov.a")) r.lyap_a = c.num("lyapunov.a", 1.0);

  r.scheme = parse_scheme(c.str("scheme", "euler"));
  if (c.has("jump.q")) {
    if (r.scheme != SchemeKind::jump) throw InputError("jump.q needs scheme = jump_euler");
    r.model_params["q"] = c.num("jump.q", 1.0);
  }
  // truncations F_gamma come with the catalog entry; no other selector exists yet
  if (c.str("jump.truncation", "catalog") != "catalog") throw InputError("jump.truncation must be catalog");
  r.levy_area = parse_levy_area_mode(c.str("milstein.levy_area", "commutative"));
  r.increments = parse_increment_mode(c.str("rng.mode", "gaussian"));
  r.seed = c.uint("rng.seed", r.seed);

  r.gamma1 = c.num("step.gamma1", r.gamma1);
  r.theta = c.num("step.theta", r.theta);
  const std::string weight = c.str("weight", "equal_to_step");
  if (weight == "equal_to_step") {
    r.equal_weights = true;
  } else if (weight == "polynomial") {
    r.equal_weights = false;
  } else {
    throw InputError("weight must be equal_to_step or polynomial");
  }
  r.eta1 = c.num("weight.eta1", r.eta1);
  r.kappa = c.num("weight.kappa", r.kappa);
  if (!r.equal_weights && (!c.has("weight.eta1") || !c.has("weight.kappa"))) {
    throw InputError("weight = polynomial needs weight.eta1 and weight.kappa");
  }

  r.steps = c.uint("run.steps", r.steps);
  r.replicas = c.uint("run.replicas", r.replicas);
  if (r.steps < 1) throw InputError("run.steps must be at least 1");
  if (r.replicas < 1) throw InputError("run.replicas must be at least 1");
  if (auto x0 = c.raw("run.x0")) {
    for (const auto& t : detail::split(*x0, ',')) r.x0.push_back(detail::to_double("run.x0", t));
  }

  r.monomials = static_cast<int>(c.uint("functionals.monomials", 2));
  if (auto b = c.raw("functionals.bumps")) r.bumps = parse_bumps(*b);
  r.generator = c.flag("functionals.generator", false);
  if (r.generator && r.bumps.empty()) throw InputError("functionals.generator needs functionals.bumps");

  r.reference = c.str("reference", r.reference);
  if (r.reference != "none" && r.reference != "speed_measure" && r.reference != "levy_ou_moments") {
    throw InputError("unknown reference '" + r.reference + "'");
  }
  r.check = c.flag("check", true);
  r.check_alpha = c.num("check.alpha", r.check_alpha);
  r.check_beta = c.num("check.beta", r.check_beta);
  r.check_rho = c.num("check.rho", r.check_rho);
  r.check_s = c.num("check.s", r.check_s);
  r.check_q = c.num("check.q", r.check_q);
  r.check_c_sigma = c.num("check.c_sigma", r.check_c_sigma);
  if (c.has("check.b_phi_c")) r.check_b_phi_c = c.num("check.b_phi_c", 0.0);
  if (c.has("check.dominance_c")) r.check_dominance_c = c.num("check.dominance_c", 0.0);
  r.check_horizon = c.uint("check.horizon", r.check_horizon);

  r.output_dir = c.str("output.dir", r.output_dir);

  const auto unused = c.unused();
  if (!unused.empty()) throw InputError("config: unknown key '" + unused.front() + "'");
  return r;
}

}  // namespace ergodic
