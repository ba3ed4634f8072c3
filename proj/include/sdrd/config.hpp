#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sdrd/errors.hpp"
#include "sdrd/fdm.hpp"
#include "sdrd/model.hpp"
#include "sdrd/solver.hpp"

namespace sdrd {

enum class RunKind { Simulate, CheckHypotheses, Converge, CompareOracle, VerifyEstimates, Sweep };

struct OracleParams {
  int cells = 256;
  double dt = 1e-4;
  std::vector<double> times;
  double tolerance = 5e-3;
};

struct HypothesesParams {
  double range = 50.0;
  int grid = 2001;
  int tau_trials = 64;
};

struct EstimateParams {
  std::vector<double> amplitudes;  // initial-data scaling family
  bool smoothing = false;          // also run the smoothing check on a bump datum
  SpatialProfile bump;
  double smoothing_horizon = 5.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  SolverConfig solver;
  RunKind kind = RunKind::Simulate;
  std::vector<int> mode_levels;                    // converge
  OracleParams oracle;                             // compare-oracle
  HypothesesParams hypotheses;                     // check-hypotheses
  EstimateParams estimates;                        // verify-estimates
  std::map<std::string, std::vector<double>> sweep;  // sweep parameter lists
  std::string out_dir = "out";
  std::string digest;
};

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

class ConfigParser {
 public:
  explicit ConfigParser(const nlohmann::json& root) : root_(root) {}

  ExperimentConfig parse(const std::string& name) {
    ExperimentConfig cfg;
    cfg.name = name;

    const nlohmann::json* problem = object(root_, "", "problem", true);
    if (problem != nullptr) parse_problem(*problem, cfg.problem);

    const nlohmann::json* solver = object(root_, "", "solver", true);
    if (solver != nullptr) {
      cfg.solver.modes = static_cast<int>(number(*solver, "solver", "modes", true, 8));
      cfg.solver.dt = number(*solver, "solver", "dt", true, 1e-3);
      cfg.solver.horizon = number(*solver, "solver", "horizon", true, 1.0);
      cfg.solver.history_dt = number(*solver, "solver", "history_dt", false, 0.0);
    }

    const nlohmann::json* run = object(root_, "", "run", true);
    if (run != nullptr) parse_run(*run, cfg);

    if (const nlohmann::json* out = object(root_, "", "output", false)) {
      if (out->contains("dir") && (*out)["dir"].is_string())
        cfg.out_dir = (*out)["dir"].get<std::string>();
    }

    if (!issues_.empty())
      throw ConfigError("configuration has " + std::to_string(issues_.size()) + " violation(s)",
                        issues_);

    cfg.digest = fnv1a_hex(root_.dump());
    if (root_.contains("problem")) cfg.problem.digest = fnv1a_hex(root_["problem"].dump());
    return cfg;
  }

 private:
  void issue(const std::string& path, const std::string& what) {
    issues_.push_back(path.empty() ? what : path + ": " + what);
  }

  const nlohmann::json* object(const nlohmann::json& j, const std::string& path,
                               const char* key, bool required) {
    if (!j.contains(key)) {
      if (required) issue(join(path, key), "missing required block");
      return nullptr;
    }
    if (!j[key].is_object()) {
      issue(join(path, key), "must be an object");
      return nullptr;
    }
    return &j[key];
  }

  double number(const nlohmann::json& j, const std::string& path, const char* key,
                bool required, double fallback) {
    if (!j.contains(key)) {
      if (required) issue(join(path, key), "missing required number");
      return fallback;
    }
    if (!j[key].is_number()) {
      issue(join(path, key), "must be a number");
      return fallback;
    }
    return j[key].get<double>();
  }

  // edge lengths accept the string "pi" so exact unit spectra are expressible
  double length_value(const nlohmann::json& j, const std::string& path, const char* key,
                      bool required, double fallback) {
    if (j.contains(key) && j[key].is_string()) {
      const std::string s = j[key].get<std::string>();
      if (s == "pi") return std::numbers::pi;
      issue(join(path, key), "unrecognized length string '" + s + "' (only \"pi\" is supported)");
      return fallback;
    }
    return number(j, path, key, required, fallback);
  }

  static std::string join(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
  }

  void parse_problem(const nlohmann::json& p, ProblemSpec& out) {
    if (const nlohmann::json* dom = object(p, "problem", "domain", true)) {
      out.domain.dimension = static_cast<int>(number(*dom, "problem.domain", "dimension", false, 1));
      out.domain.length = length_value(*dom, "problem.domain", "length", true, 1.0);
      out.domain.length2 =
          length_value(*dom, "problem.domain", "length2", out.domain.dimension == 2, 1.0);
      if (out.domain.dimension != 1 && out.domain.dimension != 2)
        issue("problem.domain.dimension", "must be 1 or 2");
      if (!(out.domain.length > 0.0)) issue("problem.domain.length", "must be positive");
      if (out.domain.dimension == 2 && !(out.domain.length2 > 0.0))
        issue("problem.domain.length2", "must be positive");
    }

    if (const nlohmann::json* f = object(p, "problem", "f", false)) parse_f(*f, out.f);
    if (const nlohmann::json* g = object(p, "problem", "g", false)) parse_g(*g, out.g);

    if (const nlohmann::json* k = object(p, "problem", "constants", true)) {
      out.constants.p = number(*k, "problem.constants", "p", true, 1.0);
      out.constants.beta = number(*k, "problem.constants", "beta", true, 1.0);
      out.constants.a0 = number(*k, "problem.constants", "a0", false, 1.0);
      out.constants.b0 = number(*k, "problem.constants", "b0", false, 1.0);
      out.constants.beta0 = number(*k, "problem.constants", "beta0", true, 2.0);
      out.constants.lambda = number(*k, "problem.constants", "lambda", false, 1.0);
      out.constants.n_const = number(*k, "problem.constants", "n", false, 1.0);
      if (!(out.constants.beta0 > out.constants.beta))
        issue("problem.constants", "beta0 must exceed beta, required by (H1)");
      if (!(out.constants.p >= 1.0) || !(out.constants.beta >= 1.0))
        issue("problem.constants", "p and beta must be >= 1");
    }

    if (const nlohmann::json* d = object(p, "problem", "delay", true)) {
      const std::string kind = d->contains("kind") && (*d)["kind"].is_string()
                                   ? (*d)["kind"].get<std::string>()
                                   : (issue("problem.delay.kind", "missing delay kind"), "constant");
      out.delay.r = number(*d, "problem.delay", "r", true, 0.0);
      if (kind == "constant") {
        out.delay.kind = DelayKind::Constant;
        out.delay.tau0 = number(*d, "problem.delay", "tau0", true, 0.0);
      } else if (kind == "state_norm_current") {
        out.delay.kind = DelayKind::StateNormCurrent;
        out.delay.c = number(*d, "problem.delay", "c", false, 1.0);
      } else if (kind == "state_norm_window") {
        out.delay.kind = DelayKind::StateNormWindow;
        out.delay.c = number(*d, "problem.delay", "c", false, 1.0);
      } else {
        issue("problem.delay.kind", "unrecognized kind '" + kind + "'");
      }
      if (out.delay.r < 0.0) issue("problem.delay.r", "must be >= 0");
      if (out.delay.kind == DelayKind::Constant &&
          (out.delay.tau0 < 0.0 || out.delay.tau0 > out.delay.r))
        issue("problem.delay.tau0", "must lie in [0, r]");
    }

    if (const nlohmann::json* h = object(p, "problem", "forcing", false)) {
      if (h->contains("terms") && (*h)["terms"].is_array()) {
        int i = 0;
        for (const auto& term : (*h)["terms"]) {
          ForcingTerm ft;
          parse_signal(term, "problem.forcing.terms[" + std::to_string(i) + "]", ft.signal);
          parse_profile(term, "problem.forcing.terms[" + std::to_string(i) + "]", ft.profile);
          out.forcing.terms.push_back(std::move(ft));
          ++i;
        }
      }
    }

    if (const nlohmann::json* phi = object(p, "problem", "phi", true)) {
      if (!phi->contains("terms") || !(*phi)["terms"].is_array()) {
        issue("problem.phi.terms", "missing term list (use [] for zero data)");
      } else {
        int i = 0;
        for (const auto& term : (*phi)["terms"]) {
          InitialHistoryTerm ht;
          parse_signal(term, "problem.phi.terms[" + std::to_string(i) + "]", ht.signal);
          parse_profile(term, "problem.phi.terms[" + std::to_string(i) + "]", ht.profile);
          out.phi.terms.push_back(std::move(ht));
          ++i;
        }
      }
    }

    if (p.contains("q")) {
      if (!p["q"].is_array()) {
        issue("problem.q", "must be an array of exponents");
      } else {
        out.q_list.clear();
        for (const auto& v : p["q"]) {
          if (!v.is_number() || v.get<double>() < 1.0)
            issue("problem.q", "exponents must be numbers >= 1");
          else
            out.q_list.push_back(v.get<double>());
        }
        if (out.q_list.empty()) out.q_list.push_back(2.0);
      }
    }
  }

  void parse_f(const nlohmann::json& f, FSpec& out) {
    const std::string type =
        f.contains("type") && f["type"].is_string() ? f["type"].get<std::string>() : "poly";
    if (type == "zero") {
      out = PolyF{};
    } else if (type == "poly") {
      PolyF pf;
      if (f.contains("coeffs") && f["coeffs"].is_array())
        for (const auto& c : f["coeffs"]) pf.coeffs.push_back(c.get<double>());
      else
        issue("problem.f.coeffs", "poly f requires a coefficient array");
      out = std::move(pf);
    } else if (type == "signed_power") {
      SignedPowerF sf;
      sf.lambda = number(f, "problem.f", "lambda", true, 1.0);
      sf.exponent = number(f, "problem.f", "exponent", true, 3.0);
      if (f.contains("tail") && f["tail"].is_array())
        for (const auto& c : f["tail"]) sf.tail.push_back(c.get<double>());
      if (!(sf.lambda > 0.0)) issue("problem.f.lambda", "must be positive");
      if (!(sf.exponent >= 1.0)) issue("problem.f.exponent", "must be >= 1");
      out = std::move(sf);
    } else {
      issue("problem.f.type", "unrecognized type '" + type + "'");
    }
  }

  void parse_g(const nlohmann::json& g, GSpec& out) {
    GPoly gp;
    if (g.contains("terms")) {
      if (!g["terms"].is_array()) {
        issue("problem.g.terms", "must be an array");
      } else {
        int i = 0;
        for (const auto& t : g["terms"]) {
          GTerm term;
          term.iu = static_cast<int>(
              number(t, "problem.g.terms[" + std::to_string(i) + "]", "u_power", false, 0));
          term.iv = static_cast<int>(
              number(t, "problem.g.terms[" + std::to_string(i) + "]", "v_power", false, 0));
          term.c = number(t, "problem.g.terms[" + std::to_string(i) + "]", "c", true, 0.0);
          if (term.iu < 0 || term.iv < 0)
            issue("problem.g.terms[" + std::to_string(i) + "]", "powers must be >= 0");
          gp.terms.push_back(term);
          ++i;
        }
      }
    }
    out = std::move(gp);
  }

  void parse_signal(const nlohmann::json& t, const std::string& path, TimeSignal& out) {
    out.amplitude = number(t, path, "amplitude", true, 0.0);
    out.decay = number(t, path, "decay", false, 0.0);
    out.omega = number(t, path, "omega", false, 0.0);
    out.phase = number(t, path, "phase", false, 0.0);
    if (out.decay < 0.0) issue(path + ".decay", "must be >= 0 (declared bound)");
  }

  void parse_profile(const nlohmann::json& t, const std::string& path, SpatialProfile& out) {
    if (!t.contains("profile") || !t["profile"].is_object()) {
      issue(path + ".profile", "missing profile block");
      return;
    }
    const nlohmann::json& pr = t["profile"];
    const std::string kind =
        pr.contains("kind") && pr["kind"].is_string() ? pr["kind"].get<std::string>() : "mode";
    out.scale = number(pr, path + ".profile", "scale", false, 1.0);
    if (kind == "mode") {
      out.kind = SpatialProfile::Kind::Mode;
      out.m1 = static_cast<int>(number(pr, path + ".profile", "m1", false, 1.0));
      out.m2 = static_cast<int>(number(pr, path + ".profile", "m2", false, 1.0));
    } else if (kind == "sinpow") {
      out.kind = SpatialProfile::Kind::SinPow;
      out.power = static_cast<int>(number(pr, path + ".profile", "power", true, 1.0));
    } else if (kind == "bump") {
      out.kind = SpatialProfile::Kind::Bump;
      out.center = number(pr, path + ".profile", "center", true, 0.5);
      out.width = number(pr, path + ".profile", "width", true, 0.1);
    } else if (kind == "modal") {
      out.kind = SpatialProfile::Kind::Modal;
      if (pr.contains("coeffs") && pr["coeffs"].is_array())
        for (const auto& c : pr["coeffs"]) out.coeffs.push_back(c.get<double>());
      else
        issue(path + ".profile.coeffs", "modal profile requires a coefficient array");
    } else {
      issue(path + ".profile.kind", "unrecognized kind '" + kind + "'");
    }
  }

  void parse_run(const nlohmann::json& run, ExperimentConfig& cfg) {
    const std::string kind = run.contains("kind") && run["kind"].is_string()
                                 ? run["kind"].get<std::string>()
                                 : (issue("run.kind", "missing run kind"), "simulate");
    if (kind == "simulate") {
      cfg.kind = RunKind::Simulate;
    } else if (kind == "check-hypotheses") {
      cfg.kind = RunKind::CheckHypotheses;
      cfg.hypotheses.range = number(run, "run", "range", false, 50.0);
      cfg.hypotheses.grid = static_cast<int>(number(run, "run", "grid", false, 2001));
      cfg.hypotheses.tau_trials = static_cast<int>(number(run, "run", "tau_trials", false, 64));
    } else if (kind == "converge") {
      cfg.kind = RunKind::Converge;
      if (run.contains("mode_levels") && run["mode_levels"].is_array())
        for (const auto& v : run["mode_levels"]) cfg.mode_levels.push_back(v.get<int>());
      else
        issue("run.mode_levels", "converge requires a mode level list");
    } else if (kind == "compare-oracle") {
      cfg.kind = RunKind::CompareOracle;
      cfg.oracle.cells = static_cast<int>(number(run, "run", "fdm_cells", false, 256));
      cfg.oracle.dt = number(run, "run", "fdm_dt", false, 1e-4);
      cfg.oracle.tolerance = number(run, "run", "tolerance", false, 5e-3);
      if (run.contains("times") && run["times"].is_array())
        for (const auto& v : run["times"]) cfg.oracle.times.push_back(v.get<double>());
      else
        issue("run.times", "compare-oracle requires comparison times");
    } else if (kind == "verify-estimates") {
      cfg.kind = RunKind::VerifyEstimates;
      if (run.contains("amplitudes") && run["amplitudes"].is_array())
        for (const auto& v : run["amplitudes"]) cfg.estimates.amplitudes.push_back(v.get<double>());
      else
        issue("run.amplitudes", "verify-estimates requires an amplitude family");
      cfg.estimates.smoothing = run.value("smoothing", false);
      if (cfg.estimates.smoothing) {
        nlohmann::json holder;
        holder["profile"] = run.contains("bump") ? run["bump"] : nlohmann::json::object();
        cfg.estimates.bump.kind = SpatialProfile::Kind::Bump;
        parse_profile(holder, "run.bump", cfg.estimates.bump);
        cfg.estimates.smoothing_horizon = number(run, "run", "smoothing_horizon", false, 5.0);
      }
    } else if (kind == "sweep") {
      cfg.kind = RunKind::Sweep;
      if (const nlohmann::json* params = object(run, "run", "parameters", true)) {
        for (const auto& [key, values] : params->items()) {
          if (key != "phi_amplitude" && key != "dt" && key != "modes") {
            issue("run.parameters." + key,
                  "unsupported sweep parameter (use phi_amplitude, dt, modes)");
            continue;
          }
          if (!values.is_array()) {
            issue("run.parameters." + key, "must be an array");
            continue;
          }
          std::vector<double> list;
          for (const auto& v : values) list.push_back(v.get<double>());
          cfg.sweep[key] = std::move(list);
        }
      }
    } else {
      issue("run.kind", "unrecognized run kind '" + kind + "'");
    }
  }

  const nlohmann::json& root_;
  std::vector<std::string> issues_;
};

}  // namespace detail

// Parses and validates a configuration document; every schema violation found
// is reported, not just the first.
inline ExperimentConfig parse_config(const nlohmann::json& root, const std::string& name) {
  return detail::ConfigParser(root).parse(name);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path, {"file not readable: " + path});
  nlohmann::json root;
  try {
    is >> root;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path, {e.what()});
  }
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
  return parse_config(root, name);
}

// Scales every initial-history term; used to build amplitude families.
inline ProblemSpec scaled_phi(ProblemSpec problem, double amplitude) {
  for (auto& term : problem.phi.terms) term.signal.amplitude *= amplitude;
  if (!problem.digest.empty())
    problem.digest = fnv1a_hex(problem.digest + "|phi_scale=" + std::to_string(amplitude));
  return problem;
}

}  // namespace sdrd
