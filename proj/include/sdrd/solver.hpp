#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdrd/basis.hpp"
#include "sdrd/errors.hpp"
#include "sdrd/history.hpp"
#include "sdrd/model.hpp"
#include "sdrd/norms.hpp"

namespace sdrd {

struct SolverConfig {
  int modes = 8;        // per-axis mode count in 2D
  double dt = 1e-3;
  double horizon = 1.0;
  double history_dt = 0.0;  // initial-history sampling resolution; 0 means dt

  double effective_history_dt() const { return history_dt > 0.0 ? history_dt : dt; }

  void validate(double r) const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (modes < 1) throw std::invalid_argument("mode count must be >= 1");
    if (r > 0.0 && dt > r / 8.0 * (1.0 + 1e-12))
      throw PreconditionError("dt must not exceed r/8 so the history resolves the delay window (dt = " +
                              std::to_string(dt) + ", r = " + std::to_string(r) + ")");
  }

  std::optional<std::string> stability_warning(double mu_max) const {
    if (dt > 1.0 / mu_max)
      return "dt = " + std::to_string(dt) + " exceeds 1/mu_k = " +
             std::to_string(1.0 / mu_max) + "; explicit reaction terms may be under-resolved";
    return std::nullopt;
  }
};

enum class RunStatus { Completed, BlowupSuspected };

// Modal coefficients above this magnitude (or non-finite) are treated as a
// suspected finite-time blowup; the run must fail loudly, not silently.
inline constexpr double kBlowupThreshold = 1e12;

struct Trajectory {
  std::vector<double> times;        // ascending; history nodes then uniform steps
  std::vector<double> taus;         // realized delay at each time; NaN before t=0
  std::vector<ModalState> states;

  double origin = 0.0;              // step times are origin + n*dt exactly
  double dt = 0.0;
  long long last_step_index = 0;
  std::size_t first_step_row = 0;   // row holding the t = origin state

  RunStatus status = RunStatus::Completed;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  std::string problem_digest;
  int modes = 0;
  double phi_projection_ratio = 1.0;
  std::vector<std::string> warnings;

  std::size_t rows() const { return times.size(); }
  double end_time() const { return times.back(); }
  bool completed() const { return status == RunStatus::Completed; }
};

struct InitialIngest {
  HistorySegment segment;
  double projection_ratio = 1.0;     // ||phi_k|| / ||phi|| in Linf(-r,0;Lq)
  std::vector<double> node_times;
};

namespace detail {

// History node times over [-r, 0] at resolution h, ascending, first node
// pinned to exactly -r.
inline std::vector<double> history_node_times(double r, double h) {
  std::vector<double> thetas;
  if (r == 0.0) {
    thetas.push_back(0.0);
    return thetas;
  }
  const int back = static_cast<int>(std::ceil(r / h - 1e-12));
  thetas.push_back(-r);
  for (int j = back - 1; j >= 0; --j) {
    const double th = -j * h;
    if (th > -r + 1e-12 * std::max(1.0, r)) thetas.push_back(th);
  }
  return thetas;
}

inline Eigen::VectorXd phi_on_grid(const ProblemSpec& p, const EigenBasis& basis,
                                   double theta) {
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(basis.grid_size());
  for (const auto& term : p.phi.terms)
    vals += term.signal(theta) * profile_on_grid(term.profile, basis);
  return vals;
}

inline bool state_blown_up(const ModalState& a) {
  if (!a.allFinite()) return true;
  return a.cwiseAbs().maxCoeff() > kBlowupThreshold;
}

}  // namespace detail

// Samples phi at the configured resolution over [-r, 0], projects each sample
// onto the first k modes, and measures the Linf(-r,0;Lq) norm ratio of the
// projected history against the ingested one. Ratios above 8 violate the
// declared admissibility bound for approximating initial data.
inline InitialIngest approximate_initial(const ProblemSpec& problem, const EigenBasis& basis,
                                         const SolverConfig& config) {
  const double r = problem.delay.r;
  const std::vector<double> thetas =
      detail::history_node_times(r, config.effective_history_dt());

  InitialIngest out{HistorySegment(r), 1.0, thetas};
  const double q = problem.primary_q();
  double norm_raw = 0.0, norm_projected = 0.0;
  for (double th : thetas) {
    const Eigen::VectorXd vals = detail::phi_on_grid(problem, basis, th);
    if (!vals.allFinite())
      throw std::invalid_argument("initial history evaluation produced non-finite values");
    const ModalState a = basis.project(vals);
    norm_raw = std::max(norm_raw, basis.lq_norm_of_samples(vals, q));
    norm_projected = std::max(norm_projected, basis.lq_norm(a, q));
    out.segment.push(th, a);
  }
  out.projection_ratio = norm_raw == 0.0 ? 1.0 : norm_projected / norm_raw;
  if (out.projection_ratio > 8.0)
    throw SpecViolation("projected initial history exceeds the admissible Lq ratio: " +
                        std::to_string(out.projection_ratio) + " > 8");
  return out;
}

// One exponential-Euler update: the stiff linear part is propagated exactly,
// the reaction/delay/forcing part enters through the integrated factor
// (1 - e^{-mu dt})/mu evaluated stably via expm1.
inline double exponential_euler_update(double mu, double a, double f, double dt) {
  return std::exp(-mu * dt) * a + (-std::expm1(-mu * dt) / mu) * f;
}

namespace detail {

struct StepWorkspace {
  Eigen::VectorXd decay;   // e^{-mu dt} per mode
  Eigen::VectorXd kick;    // (1 - e^{-mu dt})/mu per mode
  std::vector<Eigen::VectorXd> forcing_grids;

  StepWorkspace(const ProblemSpec& p, const EigenBasis& basis, double dt) {
    const Eigen::VectorXd& mu = basis.eigenvalues();
    decay = (-mu * dt).array().exp();
    kick.resize(mu.size());
    for (Eigen::Index j = 0; j < mu.size(); ++j)
      kick[j] = -std::expm1(-mu[j] * dt) / mu[j];
    forcing_grids.reserve(p.forcing.terms.size());
    for (const auto& term : p.forcing.terms)
      forcing_grids.push_back(profile_on_grid(term.profile, basis));
  }

  // Modal right-hand side F(t) = P_k[f(u) + g(u, u(t - tau)) + h(t)].
  Eigen::VectorXd modal_rhs(const ProblemSpec& p, const EigenBasis& basis, double t,
                            const ModalState& a, const ModalState& delayed) const {
    const Eigen::VectorXd u = basis.synthesize(a);
    const Eigen::VectorXd v = basis.synthesize(delayed);
    Eigen::VectorXd grid = eval_reaction_on_grid(p, u, v);
    for (std::size_t i = 0; i < forcing_grids.size(); ++i)
      grid += p.forcing.terms[i].signal(t) * forcing_grids[i];
    return basis.project(grid);
  }
};

inline Trajectory run_steps(const ProblemSpec& problem, const SolverConfig& config,
                            const EigenBasis& basis, HistorySegment seg,
                            Trajectory traj, long long first_step, long long steps) {
  const StepWorkspace ws(problem, basis, config.dt);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::size_t row = traj.rows() - 1;  // row of the state at the current step time
  for (long long step = first_step; step < first_step + steps; ++step) {
    const double t = traj.origin + static_cast<double>(step) * config.dt;
    const ModalState a = traj.states[row];
    if (detail::state_blown_up(a)) {
      traj.status = RunStatus::BlowupSuspected;
      traj.blowup_time = t;
      traj.last_step_index = step;
      return traj;
    }
    const double tau = eval_tau(problem.delay, t, seg);
    traj.taus[row] = tau;
    const ModalState delayed = seg.sample(t - tau);
    const Eigen::VectorXd rhs = ws.modal_rhs(problem, basis, t, a, delayed);
    if (!rhs.allFinite()) {
      traj.status = RunStatus::BlowupSuspected;
      traj.blowup_time = t;
      traj.last_step_index = step;
      return traj;
    }
    ModalState next = ws.decay.cwiseProduct(a) + ws.kick.cwiseProduct(rhs);
    const double t_next = traj.origin + static_cast<double>(step + 1) * config.dt;
    seg.push(t_next, next);
    traj.times.push_back(t_next);
    traj.taus.push_back(nan);
    traj.states.push_back(std::move(next));
    ++row;
  }
  traj.last_step_index = first_step + steps;
  // realized delay at the final sample, for a complete record
  if (!detail::state_blown_up(traj.states.back()))
    traj.taus[row] = eval_tau(problem.delay, traj.times[row], seg);
  return traj;
}

}  // namespace detail

// Integrates the Galerkin system over [0, horizon] from the ingested initial
// history. Deterministic: identical inputs give bitwise-identical output.
inline Trajectory solve(const ProblemSpec& problem, const SolverConfig& config,
                        const EigenBasis& basis) {
  problem.validate();
  config.validate(problem.delay.r);
  if (basis.modes_per_axis() != config.modes)
    throw std::invalid_argument("basis mode count does not match solver config");

  InitialIngest ingest = approximate_initial(problem, basis, config);

  Trajectory traj;
  traj.origin = 0.0;
  traj.dt = config.dt;
  traj.problem_digest = problem.digest;
  traj.modes = config.modes;
  traj.phi_projection_ratio = ingest.projection_ratio;
  if (auto w = config.stability_warning(basis.eigenvalues().maxCoeff()))
    traj.warnings.push_back(*w);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : ingest.segment.samples()) {
    traj.times.push_back(s.t);
    traj.taus.push_back(nan);
    traj.states.push_back(s.state);
  }
  traj.first_step_row = traj.rows() - 1;

  const long long steps = std::llround(config.horizon / config.dt);
  if (steps < 1) throw std::invalid_argument("horizon shorter than one step");
  return detail::run_steps(problem, config, basis, std::move(ingest.segment),
                           std::move(traj), 0, steps);
}

// Extends a completed trajectory by extra_horizon, reusing its tail as the
// initial history verbatim so the union equals a single longer solve bitwise.
inline Trajectory continue_solve(const ProblemSpec& problem, const SolverConfig& config,
                                 const EigenBasis& basis, const Trajectory& prev,
                                 double extra_horizon) {
  problem.validate();
  config.validate(problem.delay.r);
  if (!prev.completed())
    throw PreconditionError("cannot continue a blowup-suspected trajectory");
  if (prev.dt != config.dt)
    throw std::invalid_argument("continuation requires the original dt");
  if (!prev.problem_digest.empty() && !problem.digest.empty() &&
      prev.problem_digest != problem.digest)
    throw std::invalid_argument("continuation requires the original problem spec");

  const double r = problem.delay.r;
  const double t_end = prev.end_time();
  std::size_t cut = prev.rows() - 1;
  while (cut > 0 && prev.times[cut] > t_end - r) --cut;

  HistorySegment seg(r);
  Trajectory traj;
  traj.origin = prev.origin;
  traj.dt = config.dt;
  traj.problem_digest = prev.problem_digest;
  traj.modes = prev.modes;
  traj.phi_projection_ratio = prev.phi_projection_ratio;
  for (std::size_t i = cut; i < prev.rows(); ++i) {
    seg.push(prev.times[i], prev.states[i]);
    traj.times.push_back(prev.times[i]);
    traj.taus.push_back(prev.taus[i]);
    traj.states.push_back(prev.states[i]);
  }
  traj.first_step_row = traj.rows() - 1;

  const long long steps = std::llround(extra_horizon / config.dt);
  if (steps < 1) throw std::invalid_argument("extension shorter than one step");
  return detail::run_steps(problem, config, basis, std::move(seg), std::move(traj),
                           prev.last_step_index, steps);
}

// ---- mode-refinement self-convergence ---------------------------------------

struct ConvergenceStudy {
  std::vector<int> levels;
  std::vector<double> diffs;  // max-over-time L2 distance between successive levels
  bool nonincreasing = false;
};

// Successive differences ||u_{2k} - u_k|| in C([0,T];L2); nested sine bases
// make the modal comparison exact. Differences at roundoff level count as
// converged (floor 1e-12).
inline ConvergenceStudy convergence_study(const ProblemSpec& problem, SolverConfig config,
                                          const std::vector<int>& mode_levels) {
  if (mode_levels.size() < 3)
    throw PreconditionError("convergence study needs at least 3 mode levels");
  std::vector<Trajectory> runs;
  std::vector<EigenBasis> bases;
  runs.reserve(mode_levels.size());
  for (int k : mode_levels) {
    config.modes = k;
    bases.push_back(EigenBasis::build(problem.domain, k));
    Trajectory t = solve(problem, config, bases.back());
    if (!t.completed())
      throw BlowupError("convergence study aborted: level k = " + std::to_string(k) +
                            " terminated blowup-suspected at t = " + std::to_string(t.blowup_time),
                        t.blowup_time);
    runs.push_back(std::move(t));
  }

  ConvergenceStudy study;
  study.levels = mode_levels;
  for (std::size_t lvl = 0; lvl + 1 < runs.size(); ++lvl) {
    const auto& small = runs[lvl];
    const auto& big = runs[lvl + 1];
    // map the smaller basis' modes into the larger basis' sorted order
    std::vector<int> where(bases[lvl + 1].size(), -1);
    for (int js = 0; js < bases[lvl].size(); ++js) {
      const auto& ms = bases[lvl].modes()[js];
      for (int jb = 0; jb < bases[lvl + 1].size(); ++jb) {
        const auto& mb = bases[lvl + 1].modes()[jb];
        if (mb.m1 == ms.m1 && mb.m2 == ms.m2) {
          where[jb] = js;
          break;
        }
      }
    }
    double worst = 0.0;
    for (std::size_t row = small.first_step_row, rowb = big.first_step_row;
         row < small.rows() && rowb < big.rows(); ++row, ++rowb) {
      double acc = 0.0;
      for (int jb = 0; jb < bases[lvl + 1].size(); ++jb) {
        const double as = where[jb] >= 0 ? small.states[row][where[jb]] : 0.0;
        const double d = big.states[rowb][jb] - as;
        acc += d * d;
      }
      worst = std::max(worst, std::sqrt(acc));
    }
    study.diffs.push_back(worst);
  }
  study.nonincreasing = true;
  for (std::size_t i = 0; i + 1 < study.diffs.size(); ++i)
    if (study.diffs[i + 1] > study.diffs[i] && study.diffs[i + 1] > 1e-12)
      study.nonincreasing = false;
  return study;
}

}  // namespace sdrd
