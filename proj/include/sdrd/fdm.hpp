#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sdrd/errors.hpp"
#include "sdrd/history.hpp"
#include "sdrd/model.hpp"
#include "sdrd/solver.hpp"

namespace sdrd {

// Method-of-lines cross-check: second-order central differences in space,
// implicit (tridiagonal) diffusion and explicit reaction/delay in time.
// 1D only; this is an oracle for the spectral solver, not a production path.

struct FdmConfig {
  int cells = 64;  // N intervals; N-1 interior unknowns
  double dt = 1e-4;
  double horizon = 1.0;
  double history_dt = 0.0;

  double effective_history_dt() const { return history_dt > 0.0 ? history_dt : dt; }
};

struct FdmTrajectory {
  Eigen::VectorXd xs;  // interior nodes
  double dx = 0.0;
  std::vector<double> times;
  std::vector<double> taus;
  std::vector<Eigen::VectorXd> states;
  std::size_t first_step_row = 0;
  RunStatus status = RunStatus::Completed;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  std::string problem_digest;

  std::size_t rows() const { return times.size(); }
  bool completed() const { return status == RunStatus::Completed; }
  double discrete_l2(const Eigen::VectorXd& u) const { return std::sqrt(dx) * u.norm(); }
};

namespace detail {

// Solves (I + c*A_h) u = b with A_h the Dirichlet 3-point Laplacian; the
// constant tridiagonal factorization is precomputed once per run.
class TridiagonalHeatSolver {
 public:
  TridiagonalHeatSolver(int n, double off, double diag) : upper_(n), denom_(n), off_(off) {
    denom_[0] = diag;
    upper_[0] = off / diag;
    for (int i = 1; i < n; ++i) {
      denom_[i] = diag - off * upper_[i - 1];
      upper_[i] = off / denom_[i];
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const int n = static_cast<int>(denom_.size());
    Eigen::VectorXd y(n);
    y[0] = b[0] / denom_[0];
    for (int i = 1; i < n; ++i) y[i] = (b[i] - off_ * y[i - 1]) / denom_[i];
    for (int i = n - 2; i >= 0; --i) y[i] -= upper_[i] * y[i + 1];
    return y;
  }

 private:
  std::vector<double> upper_, denom_;
  double off_;
};

inline bool grid_blown_up(const Eigen::VectorXd& u) {
  if (!u.allFinite()) return true;
  return u.cwiseAbs().maxCoeff() > kBlowupThreshold;
}

}  // namespace detail

inline FdmTrajectory fdm_solve(const ProblemSpec& problem, const FdmConfig& config) {
  problem.validate();
  if (problem.domain.dimension != 1)
    throw PreconditionError("finite-difference oracle supports 1D domains only");
  if (config.cells < 16) throw PreconditionError("finite-difference oracle needs N >= 16 cells");
  if (!(config.dt > 0.0) || !(config.horizon > 0.0))
    throw std::invalid_argument("fdm dt and horizon must be positive");
  const double r = problem.delay.r;
  if (r > 0.0 && config.dt > r / 8.0 * (1.0 + 1e-12))
    throw PreconditionError("fdm dt must not exceed r/8");

  const int n = config.cells - 1;
  const double length = problem.domain.length;
  const double dx = length / config.cells;

  FdmTrajectory traj;
  traj.dx = dx;
  traj.problem_digest = problem.digest;
  traj.xs.resize(n);
  for (int i = 0; i < n; ++i) traj.xs[i] = (i + 1) * dx;

  const auto phi_at = [&](double theta) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (const auto& term : problem.phi.terms) {
      const double d = term.signal(theta);
      for (int i = 0; i < n; ++i)
        u[i] += d * profile_value(term.profile, problem.domain, traj.xs[i]);
    }
    return u;
  };

  HistorySegment seg(r);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double th : detail::history_node_times(r, config.effective_history_dt())) {
    Eigen::VectorXd u = phi_at(th);
    seg.push(th, u);
    traj.times.push_back(th);
    traj.taus.push_back(nan);
    traj.states.push_back(std::move(u));
  }
  traj.first_step_row = traj.rows() - 1;

  std::vector<Eigen::VectorXd> forcing_profiles;
  forcing_profiles.reserve(problem.forcing.terms.size());
  for (const auto& term : problem.forcing.terms) {
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = profile_value(term.profile, problem.domain, traj.xs[i]);
    forcing_profiles.push_back(std::move(p));
  }

  const double c = config.dt / (dx * dx);
  const detail::TridiagonalHeatSolver lin(n, -c, 1.0 + 2.0 * c);

  const auto delay_arg = [&](const HistorySegment& h) {
    switch (problem.delay.kind) {
      case DelayKind::Constant: return 0.0;
      case DelayKind::StateNormCurrent: {
        const double v = traj.discrete_l2(h.latest());
        return v * v;
      }
      case DelayKind::StateNormWindow: {
        const double m = h.window_max(
            [&](const Eigen::VectorXd& u) { return traj.discrete_l2(u); }, true);
        return m * m;
      }
    }
    return 0.0;
  };

  const long long steps = std::llround(config.horizon / config.dt);
  std::size_t row = traj.rows() - 1;
  for (long long step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * config.dt;
    const Eigen::VectorXd u = traj.states[row];
    if (detail::grid_blown_up(u)) {
      traj.status = RunStatus::BlowupSuspected;
      traj.blowup_time = t;
      return traj;
    }
    const double tau = eval_tau(problem.delay, t, delay_arg(seg));
    traj.taus[row] = tau;
    const Eigen::VectorXd v = seg.sample(t - tau);

    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = eval_f(problem.f, u[i]) + eval_g(problem.g, u[i], v[i]);
    for (std::size_t fi = 0; fi < forcing_profiles.size(); ++fi)
      rhs += problem.forcing.terms[fi].signal(t) * forcing_profiles[fi];
    if (!rhs.allFinite()) {
      traj.status = RunStatus::BlowupSuspected;
      traj.blowup_time = t;
      return traj;
    }

    Eigen::VectorXd next = lin.solve(u + config.dt * rhs);
    const double t_next = static_cast<double>(step + 1) * config.dt;
    seg.push(t_next, next);
    traj.times.push_back(t_next);
    traj.taus.push_back(nan);
    traj.states.push_back(std::move(next));
    ++row;
  }
  if (!detail::grid_blown_up(traj.states.back()))
    traj.taus[row] = eval_tau(problem.delay, traj.times[row], delay_arg(seg));
  return traj;
}

// ---- spectral vs finite-difference comparison --------------------------------

struct CompareRow {
  double t = 0.0;
  double rel_l2 = 0.0;
};

namespace detail {

template <class Traj>
Eigen::VectorXd interp_state(const Traj& traj, double t) {
  const auto& ts = traj.times;
  if (t < ts.front() - 1e-12 || t > ts.back() + 1e-12)
    throw OutOfWindowError("comparison time outside trajectory span");
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.end()) return traj.states.back();
  const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  if (ts[hi] == t || hi == 0) return traj.states[hi];
  const double w = (t - ts[hi - 1]) / (ts[hi] - ts[hi - 1]);
  return (1.0 - w) * traj.states[hi - 1] + w * traj.states[hi];
}

}  // namespace detail

// Relative L2 differences at the requested times, with the spectral solution
// synthesized onto the finite-difference nodes.
inline std::vector<CompareRow> compare(const EigenBasis& basis, const Trajectory& spectral,
                                       const FdmTrajectory& grid,
                                       const std::vector<double>& times) {
  if (spectral.problem_digest != grid.problem_digest)
    throw std::invalid_argument("cannot compare trajectories from different problem specs");
  std::vector<CompareRow> out;
  out.reserve(times.size());
  for (double t : times) {
    const Eigen::VectorXd us = basis.synthesize_at(detail::interp_state(spectral, t), grid.xs);
    const Eigen::VectorXd uf = detail::interp_state(grid, t);
    const double denom = uf.norm();
    out.push_back({t, denom == 0.0 ? (us - uf).norm() : (us - uf).norm() / denom});
  }
  return out;
}

}  // namespace sdrd
