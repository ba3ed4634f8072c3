#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sdrd/config.hpp"
#include "sdrd/csv.hpp"
#include "sdrd/estimates.hpp"
#include "sdrd/fdm.hpp"
#include "sdrd/report.hpp"
#include "sdrd/solver.hpp"
#include "sdrd/version.hpp"

namespace sdrd {

struct CliOptions {
  std::string out_dir;  // overrides the config output dir when non-empty
  int jobs = 1;
  bool dump_modes = false;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitPrecondition = 2,
  kExitBlowup = 3,
  kExitIo = 4,
};

namespace detail {

inline void parallel_for(int jobs, std::size_t count,
                         const std::function<void(std::size_t)>& body) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const int n = std::min<int>(jobs, static_cast<int>(count));
  workers.reserve(n);
  std::vector<std::exception_ptr> errors(count);
  for (int w = 0; w < n; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : workers) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class RunContext {
 public:
  RunContext(const ExperimentConfig& cfg, const CliOptions& opts)
      : cfg_(cfg), opts_(opts), start_(std::chrono::steady_clock::now()) {
    dir_ = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
    std::filesystem::create_directories(dir_);
  }

  std::string path(const std::string& file) const { return dir_ + "/" + file; }

  void note_artifact(const std::string& file) { artifacts_.push_back(file); }

  void write_manifest(const std::string& status) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    nlohmann::json m;
    m["config_digest"] = cfg_.digest;
    m["problem_digest"] = cfg_.problem.digest;
    m["version"] = kVersion;
    m["experiment"] = cfg_.name;
    m["status"] = status;
    m["wall_time_s"] = wall;
    m["artifacts"] = artifacts_;
    std::ofstream os(path("manifest.json"));
    if (!os) throw std::runtime_error("cannot write manifest");
    os << m.dump(2) << "\n";
  }

 private:
  const ExperimentConfig& cfg_;
  const CliOptions& opts_;
  std::string dir_;
  std::vector<std::string> artifacts_;
  std::chrono::steady_clock::time_point start_;
};

inline void print_check(const CheckResult& c) {
  std::cout << "CHECK " << c.check_id << " " << c.reference << ": "
            << (c.pass ? "PASS" : "FAIL");
  for (const auto& [k, v] : c.constants) std::cout << " " << k << "=" << v;
  if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
  std::cout << "\n";
}

inline int run_simulate(const ExperimentConfig& cfg, const CliOptions& opts, RunContext& ctx) {
  const EigenBasis basis = EigenBasis::build(cfg.problem.domain, cfg.solver.modes);
  const Trajectory traj = solve(cfg.problem, cfg.solver, basis);
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << "\n";
  const NormSeries series = norm_series(basis, traj, cfg.problem.q_list);
  write_trajectory_csv(ctx.path("trajectory.csv"), series, &traj, opts.dump_modes);
  ctx.note_artifact("trajectory.csv");
  if (!traj.completed()) {
    std::cerr << "blowup suspected at t = " << traj.blowup_time << "\n";
    ctx.write_manifest("blowup-suspected");
    return kExitBlowup;
  }
  std::cout << "trajectory written: " << traj.rows() << " samples, end t = "
            << traj.end_time() << "\n";
  ctx.write_manifest("completed");
  return kExitOk;
}

inline int run_check_hypotheses(const ExperimentConfig& cfg, RunContext& ctx) {
  Report report;
  const auto h0 =
      check_H0(cfg.problem.f, cfg.problem.g, cfg.problem.constants, cfg.hypotheses.range,
               cfg.hypotheses.grid);
  CheckResult r0;
  r0.check_id = "hypothesis.h0";
  r0.reference = "(H0)";
  r0.pass = h0.pass;
  r0.constants = {{"tightest_ratio", h0.tightest_ratio},
                  {"range", h0.range},
                  {"grid", static_cast<double>(h0.grid)}};
  if (h0.witness) {
    r0.constants.emplace_back("witness_u", h0.witness->u);
    r0.constants.emplace_back("witness_v", h0.witness->v);
    r0.constants.emplace_back("witness_value", h0.witness->lhs);
    r0.constants.emplace_back("witness_bound", h0.witness->bound);
    r0.detail = "declared growth bound violated";
  } else {
    r0.detail = "growth bound holds on the sampled range";
  }
  r0.inputs_digest = fnv1a_hex(cfg.digest + r0.check_id);
  report.checks.push_back(r0);

  const auto h1 = check_H1(cfg.problem.f, cfg.problem.constants, cfg.hypotheses.range,
                           cfg.hypotheses.grid);
  CheckResult r1;
  r1.check_id = "hypothesis.h1";
  r1.reference = "(H1)";
  r1.pass = h1.pass;
  r1.constants = {{"measured_min_n", h1.measured_min_n},
                  {"declared_n", cfg.problem.constants.n_const},
                  {"range", h1.range}};
  if (h1.witness) {
    r1.constants.emplace_back("witness_s", h1.witness->u);
    r1.constants.emplace_back("witness_value", h1.witness->lhs);
    r1.constants.emplace_back("witness_bound", h1.witness->bound);
    r1.detail = "dissipative sign condition violated";
  } else {
    r1.detail = "sign condition holds on the sampled range";
  }
  r1.inputs_digest = fnv1a_hex(cfg.digest + r1.check_id);
  report.checks.push_back(r1);

  // randomized delay audit: tau must land in [0, r] and stay Lipschitz in phi
  CheckResult r2;
  r2.check_id = "hypothesis.h2";
  r2.reference = "(H2)";
  r2.pass = true;
  std::mt19937 rng(0x5d5du);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  const double r = cfg.problem.delay.r;
  std::vector<std::pair<HistorySegment, HistorySegment>> trials;
  const auto make_history = [&](double scale) {
    HistorySegment seg(r);
    const int nodes = 5;
    for (int i = 0; i <= nodes; ++i) {
      Eigen::VectorXd a(4);
      for (int j = 0; j < 4; ++j) a[j] = scale * unif(rng);
      seg.push(-r + (r > 0.0 ? r * i / nodes : i), a);
    }
    return seg;
  };
  try {
    for (int trial = 0; trial < cfg.hypotheses.tau_trials; ++trial) {
      HistorySegment a = make_history(1.0);
      HistorySegment b = make_history(1.0 + 0.1 * (trial % 7));
      eval_tau(cfg.problem.delay, 0.0, a);
      eval_tau(cfg.problem.delay, 0.0, b);
      trials.emplace_back(std::move(a), std::move(b));
    }
    const double lip = estimate_tau_lipschitz(cfg.problem.delay, 0.0, trials);
    r2.constants = {{"empirical_lipschitz", lip},
                    {"trials", static_cast<double>(cfg.hypotheses.tau_trials)}};
    r2.detail = "tau landed in [0, r] on every randomized history";
  } catch (const SpecViolation& e) {
    r2.pass = false;
    r2.detail = e.what();
  }
  r2.inputs_digest = fnv1a_hex(cfg.digest + r2.check_id);
  report.checks.push_back(r2);

  for (const auto& c : report.checks) print_check(c);
  write_report(ctx.path("report.json"), report);
  ctx.note_artifact("report.json");
  ctx.write_manifest(report.all_pass() ? "pass" : "fail");
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

inline int run_converge(const ExperimentConfig& cfg, RunContext& ctx) {
  const ConvergenceStudy study = convergence_study(cfg.problem, cfg.solver, cfg.mode_levels);
  std::ofstream os(ctx.path("convergence.csv"));
  os << "k_coarse, k_fine, max_l2_diff\n";
  for (std::size_t i = 0; i < study.diffs.size(); ++i)
    os << study.levels[i] << ", " << study.levels[i + 1] << ", " << fmt17(study.diffs[i])
       << "\n";
  os.close();
  ctx.note_artifact("convergence.csv");

  Report report;
  CheckResult c;
  c.check_id = "converge.modes";
  c.reference = "(2.3)";
  c.pass = study.nonincreasing;
  for (std::size_t i = 0; i < study.diffs.size(); ++i)
    c.constants.emplace_back(
        "diff_" + std::to_string(study.levels[i]) + "_" + std::to_string(study.levels[i + 1]),
        study.diffs[i]);
  c.detail = c.pass ? "successive differences nonincreasing" : "refinement failed to converge";
  c.inputs_digest = fnv1a_hex(cfg.digest + c.check_id);
  report.checks.push_back(c);
  print_check(c);
  write_report(ctx.path("report.json"), report);
  ctx.note_artifact("report.json");
  ctx.write_manifest(c.pass ? "pass" : "fail");
  return c.pass ? kExitOk : kExitCheckFailed;
}

inline int run_compare_oracle(const ExperimentConfig& cfg, RunContext& ctx) {
  const EigenBasis basis = EigenBasis::build(cfg.problem.domain, cfg.solver.modes);
  const Trajectory spectral = solve(cfg.problem, cfg.solver, basis);
  if (!spectral.completed())
    throw BlowupError("spectral run blowup-suspected at t = " +
                          std::to_string(spectral.blowup_time),
                      spectral.blowup_time);
  FdmConfig fcfg;
  fcfg.cells = cfg.oracle.cells;
  fcfg.dt = cfg.oracle.dt;
  fcfg.horizon = cfg.solver.horizon;
  const FdmTrajectory grid = fdm_solve(cfg.problem, fcfg);
  if (!grid.completed())
    throw BlowupError("oracle run blowup-suspected at t = " + std::to_string(grid.blowup_time),
                      grid.blowup_time);

  const auto rows = compare(basis, spectral, grid, cfg.oracle.times);
  std::ofstream os(ctx.path("comparison.csv"));
  os << "t, rel_l2\n";
  bool pass = true;
  Report report;
  for (const auto& row : rows) {
    os << fmt17(row.t) << ", " << fmt17(row.rel_l2) << "\n";
    CheckResult c;
    c.check_id = "oracle.t" + std::to_string(row.t);
    c.reference = "(1.1)";
    c.pass = row.rel_l2 <= cfg.oracle.tolerance;
    c.constants = {{"rel_l2", row.rel_l2}, {"tolerance", cfg.oracle.tolerance}};
    c.detail = c.pass ? "spectral and finite-difference solutions agree"
                      : "solvers disagree beyond tolerance";
    c.inputs_digest = fnv1a_hex(cfg.digest + c.check_id);
    pass = pass && c.pass;
    print_check(c);
    report.checks.push_back(c);
  }
  os.close();
  ctx.note_artifact("comparison.csv");
  write_report(ctx.path("report.json"), report);
  ctx.note_artifact("report.json");
  ctx.write_manifest(pass ? "pass" : "fail");
  return pass ? kExitOk : kExitCheckFailed;
}

inline int run_verify_estimates(const ExperimentConfig& cfg, const CliOptions& opts,
                                RunContext& ctx) {
  const double q = cfg.problem.primary_q();
  const CriticalExponents ce = critical_exponents(cfg.problem.constants);
  if (!(q > ce.q_c))
    throw PreconditionError(
        "estimate verification requires q > q_c by the critical exponent rule, Eq. (1.3): q = " +
        std::to_string(q) + ", q_c = " + std::to_string(ce.q_c));

  const EigenBasis basis = EigenBasis::build(cfg.problem.domain, cfg.solver.modes);
  const std::size_t n = cfg.estimates.amplitudes.size();
  if (n < 3)
    throw PreconditionError("verify-estimates needs a family of at least 3 amplitudes");

  std::vector<Trajectory> runs(n);
  parallel_for(opts.jobs, n, [&](std::size_t i) {
    const ProblemSpec scaled = scaled_phi(cfg.problem, cfg.estimates.amplitudes[i]);
    runs[i] = solve(scaled, cfg.solver, basis);
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!runs[i].completed())
      throw BlowupError("family run " + std::to_string(i) + " blowup-suspected at t = " +
                            std::to_string(runs[i].blowup_time),
                        runs[i].blowup_time);

  std::vector<NormSeries> family(n);
  parallel_for(opts.jobs, n, [&](std::size_t i) {
    family[i] = norm_series(basis, runs[i], cfg.problem.q_list);
  });
  for (std::size_t i = 0; i < n; ++i) {
    const std::string file = "run_" + std::to_string(i) + ".csv";
    write_trajectory_csv(ctx.path(file), family[i], &runs[i], opts.dump_modes);
    ctx.note_artifact(file);
  }

  Report report;
  const auto add = [&](CheckResult c, const std::string& tag) {
    c.check_id += tag;
    c.inputs_digest = fnv1a_hex(cfg.digest + c.check_id);
    print_check(c);
    report.checks.push_back(std::move(c));
  };
  for (std::size_t i = 0; i < n; ++i) {
    add(verify_decay(family[i], DecayNormKind::Lq, q, cfg.problem.constants),
        ".amp" + std::to_string(i));
    add(verify_decay(family[i], DecayNormKind::V1, q, cfg.problem.constants),
        ".amp" + std::to_string(i));
  }
  add(verify_v2_budget(family, q), "");
  add(verify_linf_bound(family), "");
  add(absorbing_check(family, cfg.estimates.amplitudes), "");

  if (cfg.estimates.smoothing) {
    ProblemSpec bumpy = cfg.problem;
    bumpy.phi.terms.clear();
    bumpy.phi.terms.push_back({TimeSignal{1.0, 0.0, 0.0, 0.0}, cfg.estimates.bump});
    if (!bumpy.digest.empty()) bumpy.digest = fnv1a_hex(bumpy.digest + "|smoothing_bump");
    SolverConfig scfg = cfg.solver;
    scfg.horizon = cfg.estimates.smoothing_horizon;
    const Trajectory bump_run = solve(bumpy, scfg, basis);
    if (!bump_run.completed())
      throw BlowupError("smoothing run blowup-suspected at t = " +
                            std::to_string(bump_run.blowup_time),
                        bump_run.blowup_time);
    const NormSeries bump_series = norm_series(basis, bump_run, cfg.problem.q_list);
    const std::string file = "run_smoothing.csv";
    write_trajectory_csv(ctx.path(file), bump_series, &bump_run, opts.dump_modes);
    ctx.note_artifact(file);
    add(verify_smoothing(bump_series, q, cfg.problem.domain.dimension, cfg.problem.constants),
        "");
  }

  write_report(ctx.path("report.json"), report);
  ctx.note_artifact("report.json");
  ctx.write_manifest(report.all_pass() ? "pass" : "fail");
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

inline int run_sweep(const ExperimentConfig& cfg, const CliOptions& opts, RunContext& ctx) {
  // cartesian expansion over the configured parameter lists
  std::vector<std::pair<std::string, std::vector<double>>> axes(cfg.sweep.begin(),
                                                                cfg.sweep.end());
  std::vector<std::vector<double>> combos{{}};
  for (const auto& [name, values] : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& base : combos)
      for (double v : values) {
        auto c = base;
        c.push_back(v);
        next.push_back(std::move(c));
      }
    combos = std::move(next);
  }
  if (combos.empty() || axes.empty())
    throw PreconditionError("sweep requires at least one parameter list");

  std::vector<int> status(combos.size(), kExitOk);
  parallel_for(opts.jobs, combos.size(), [&](std::size_t i) {
    ProblemSpec problem = cfg.problem;
    SolverConfig solver = cfg.solver;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const std::string& name = axes[a].first;
      const double v = combos[i][a];
      if (name == "phi_amplitude") problem = scaled_phi(problem, v);
      if (name == "dt") solver.dt = v;
      if (name == "modes") solver.modes = static_cast<int>(v);
    }
    const EigenBasis basis = EigenBasis::build(problem.domain, solver.modes);
    const Trajectory traj = solve(problem, solver, basis);
    const NormSeries series = norm_series(basis, traj, problem.q_list);
    const std::string dir = "run_" + std::to_string(i);
    std::filesystem::create_directories(ctx.path(dir));
    write_trajectory_csv(ctx.path(dir + "/trajectory.csv"), series, &traj, opts.dump_modes);
    status[i] = traj.completed() ? kExitOk : kExitBlowup;
  });
  for (std::size_t i = 0; i < combos.size(); ++i)
    ctx.note_artifact("run_" + std::to_string(i) + "/trajectory.csv");

  int exit = kExitOk;
  for (int s : status)
    if (s != kExitOk) exit = kExitBlowup;
  std::cout << "sweep: " << combos.size() << " runs, "
            << (exit == kExitOk ? "all completed" : "blowup suspected in at least one run")
            << "\n";
  ctx.write_manifest(exit == kExitOk ? "completed" : "blowup-suspected");
  return exit;
}

}  // namespace detail

// Executes one experiment; returns the process exit code.
// 0 all-pass, 1 check failed, 2 precondition/schema, 3 blowup, 4 I/O.
inline int run_experiment(const ExperimentConfig& cfg, const CliOptions& opts) {
  try {
    detail::RunContext ctx(cfg, opts);
    switch (cfg.kind) {
      case RunKind::Simulate: return detail::run_simulate(cfg, opts, ctx);
      case RunKind::CheckHypotheses: return detail::run_check_hypotheses(cfg, ctx);
      case RunKind::Converge: return detail::run_converge(cfg, ctx);
      case RunKind::CompareOracle: return detail::run_compare_oracle(cfg, ctx);
      case RunKind::VerifyEstimates: return detail::run_verify_estimates(cfg, opts, ctx);
      case RunKind::Sweep: return detail::run_sweep(cfg, opts, ctx);
    }
    return kExitPrecondition;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    return kExitPrecondition;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const BlowupError& e) {
    std::cerr << "blowup suspected: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const SpecViolation& e) {
    std::cerr << "declared-spec violation: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace sdrd
