#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdrd/basis.hpp"
#include "sdrd/errors.hpp"
#include "sdrd/history.hpp"
#include "sdrd/norms.hpp"

namespace sdrd {

// Declared structural constants: |f(u)| <= a0(|u|^p + 1) and
// |g(u,v)| <= b0(|u|^beta + |v|^beta + 1) with the dissipative sign
// condition f(s)s <= -lambda |s|^{beta0+1} + n_const, beta0 > beta.
struct HypothesisConstants {
  double p = 1.0;
  double beta = 1.0;
  double a0 = 1.0;
  double b0 = 1.0;
  double beta0 = 2.0;
  double lambda = 1.0;
  double n_const = 1.0;
};

// ---- reaction term f ------------------------------------------------------

struct PolyF {
  std::vector<double> coeffs;  // f(u) = sum_i coeffs[i] * u^i
};
// f(u) = -lambda * u * |u|^{exponent-1} + tail(u); the workhorse that meets
// the sign condition with computable constants at arbitrary growth rates.
struct SignedPowerF {
  double lambda = 1.0;
  double exponent = 3.0;
  std::vector<double> tail;
};
struct CustomF {
  std::function<double(double)> fn;
  std::string name = "custom";
};
using FSpec = std::variant<PolyF, SignedPowerF, CustomF>;

inline double eval_poly(const std::vector<double>& coeffs, double u) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * u + coeffs[i];
  return acc;
}

inline double eval_f(const FSpec& f, double u) {
  if (const auto* p = std::get_if<PolyF>(&f)) return eval_poly(p->coeffs, u);
  if (const auto* s = std::get_if<SignedPowerF>(&f))
    return -s->lambda * u * std::pow(std::abs(u), s->exponent - 1.0) + eval_poly(s->tail, u);
  return std::get<CustomF>(f).fn(u);
}

// ---- delayed coupling g ---------------------------------------------------

struct GTerm {
  int iu = 0;  // power of the current state
  int iv = 0;  // power of the delayed state
  double c = 0.0;
};
struct GPoly {
  std::vector<GTerm> terms;  // g(u,v) = sum c * u^iu * v^iv
};
struct CustomG {
  std::function<double(double, double)> fn;
  std::string name = "custom";
};
using GSpec = std::variant<GPoly, CustomG>;

inline double eval_g(const GSpec& g, double u, double v) {
  if (const auto* p = std::get_if<GPoly>(&g)) {
    double acc = 0.0;
    for (const GTerm& t : p->terms)
      acc += t.c * std::pow(u, t.iu) * std::pow(v, t.iv);
    return acc;
  }
  return std::get<CustomG>(g).fn(u, v);
}

// ---- sampled hypothesis audits --------------------------------------------

struct BoundWitness {
  double u = 0.0;
  double v = 0.0;
  double lhs = 0.0;    // measured value
  double bound = 0.0;  // declared admissible value at that point
};

struct GrowthCheckResult {  // sign-agnostic growth bound audit
  bool pass = true;
  double tightest_ratio = 0.0;  // max of measured/bound over the sample grid
  std::optional<BoundWitness> witness;
  double range = 0.0;
  int grid = 0;
};

// Audits |f(u)| <= a0(|u|^p + 1) and |g(u,v)| <= b0(|u|^b + |v|^b + 1) on
// [-S,S]. A violation is a result, not an error.
inline GrowthCheckResult check_H0(const FSpec& f, const GSpec& g,
                                  const HypothesisConstants& k, double range, int grid) {
  if (!(range > 0.0)) throw PreconditionError("check range must be positive");
  if (grid < 2) throw PreconditionError("check grid must have >= 2 points");
  GrowthCheckResult out;
  out.range = range;
  out.grid = grid;
  const double step = 2.0 * range / (grid - 1);
  constexpr double fuzz = 1.0 + 1e-12;
  for (int i = 0; i < grid; ++i) {
    const double u = -range + i * step;
    const double lhs = std::abs(eval_f(f, u));
    const double bound = k.a0 * (std::pow(std::abs(u), k.p) + 1.0);
    out.tightest_ratio = std::max(out.tightest_ratio, lhs / bound);
    if (!(lhs <= bound * fuzz)) {
      out.pass = false;
      out.witness = BoundWitness{u, 0.0, lhs, bound};
      return out;
    }
  }
  // bivariate grid for g; coarsened so the audit stays O(grid) overall
  const int gv = std::min(grid, 513);
  const double gstep = 2.0 * range / (gv - 1);
  for (int i = 0; i < gv; ++i) {
    const double u = -range + i * gstep;
    for (int j = 0; j < gv; ++j) {
      const double v = -range + j * gstep;
      const double lhs = std::abs(eval_g(g, u, v));
      const double bound =
          k.b0 * (std::pow(std::abs(u), k.beta) + std::pow(std::abs(v), k.beta) + 1.0);
      out.tightest_ratio = std::max(out.tightest_ratio, lhs / bound);
      if (!(lhs <= bound * fuzz)) {
        out.pass = false;
        out.witness = BoundWitness{u, v, lhs, bound};
        return out;
      }
    }
  }
  return out;
}

struct SignCheckResult {
  bool pass = true;
  double measured_min_n = 0.0;  // smallest admissible N on the sampled range
  std::optional<BoundWitness> witness;
  double range = 0.0;
  int grid = 0;
};

// Audits f(s)s <= -lambda |s|^{beta0+1} + N and measures the minimal N
// admissible for the declared (beta0, lambda) on the sampled range.
inline SignCheckResult check_H1(const FSpec& f, const HypothesisConstants& k,
                                double range, int grid) {
  if (!(range > 0.0)) throw PreconditionError("check range must be positive");
  if (grid < 2) throw PreconditionError("check grid must have >= 2 points");
  SignCheckResult out;
  out.range = range;
  out.grid = grid;
  const auto defect = [&](double s) {
    return eval_f(f, s) * s + k.lambda * std::pow(std::abs(s), k.beta0 + 1.0);
  };
  const double step = 2.0 * range / (grid - 1);
  double best = -std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double s = -range + i * step;
    const double d = defect(s);
    if (d > best) {
      best = d;
      best_s = s;
    }
  }
  // golden-section refinement around the grid argmax pins the measured N
  // well below the grid resolution
  double lo = std::max(-range, best_s - step), hi = std::min(range, best_s + step);
  constexpr double golden = 0.6180339887498949;
  double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
  double f1 = defect(x1), f2 = defect(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = defect(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = defect(x1);
    }
  }
  best = std::max(best, std::max(f1, f2));
  out.measured_min_n = std::max(best, 0.0);
  const double tol = 1e-12 * (1.0 + std::abs(k.n_const));
  if (best > k.n_const + tol) {
    out.pass = false;
    const double s = f1 > f2 ? x1 : x2;
    out.witness = BoundWitness{s, 0.0, eval_f(f, s) * s,
                               -k.lambda * std::pow(std::abs(s), k.beta0 + 1.0) + k.n_const};
  }
  return out;
}

// ---- critical exponent arithmetic -----------------------------------------

struct CriticalExponents {
  double q_c = 0.0;
  double p0 = 0.0;
};

inline CriticalExponents critical_exponents(const HypothesisConstants& k) {
  if (!(k.beta0 > k.beta))
    throw PreconditionError("(H1) requires beta0 > beta; got beta0 = " +
                            std::to_string(k.beta0) + ", beta = " + std::to_string(k.beta));
  CriticalExponents e;
  e.p0 = (k.beta0 - 1.0) / (k.beta0 - k.beta) * k.beta;
  e.q_c = std::max({2.0 * k.p, 2.0 * k.beta, e.p0});
  return e;
}

inline double q_bar(double q, double beta0) {
  if (!(q > 1.0)) throw PreconditionError("q_bar defined for q > 1");
  return (q - 1.0) / beta0 + 1.0;
}

// ---- state-dependent delay -------------------------------------------------

enum class DelayKind { Constant, StateNormCurrent, StateNormWindow };

// tau(t, phi): either a constant tau0, or r / (1 + c*s) with s the squared
// L2 norm of phi(0) (Current) or of the whole window (Window). Norm-composed
// forms stay Lipschitz in phi by construction and always land in [0, r].
struct DelaySpec {
  DelayKind kind = DelayKind::Constant;
  double r = 0.0;
  double tau0 = 0.0;
  double c = 1.0;

  void validate() const {
    if (r < 0.0) throw std::invalid_argument("delay bound r must be >= 0");
    if (kind == DelayKind::Constant && (tau0 < 0.0 || tau0 > r))
      throw std::invalid_argument("constant delay must lie in [0, r]");
    if (kind != DelayKind::Constant && !(c > 0.0))
      throw std::invalid_argument("state-norm delay requires c > 0");
  }
};

// Scalar evaluation from a precomputed squared-norm argument. A value outside
// [0, r] is an internal inconsistency and is reported, never clamped.
inline double eval_tau(const DelaySpec& d, double /*t*/, double s_norm_sq) {
  double tau = 0.0;
  switch (d.kind) {
    case DelayKind::Constant: tau = d.tau0; break;
    case DelayKind::StateNormCurrent:
    case DelayKind::StateNormWindow: tau = d.r / (1.0 + d.c * s_norm_sq); break;
  }
  if (!(tau >= 0.0 && tau <= d.r))
    throw SpecViolation("delay functional produced tau = " + std::to_string(tau) +
                        " outside [0, " + std::to_string(d.r) + "]");
  return tau;
}

// Evaluation against a modal history segment (Parseval: |.|_2 = coefficient
// norm, no basis needed).
inline double eval_tau(const DelaySpec& d, double t, const HistorySegment& seg) {
  double s = 0.0;
  switch (d.kind) {
    case DelayKind::Constant: break;
    case DelayKind::StateNormCurrent: s = seg.latest().squaredNorm(); break;
    case DelayKind::StateNormWindow: {
      const double m =
          seg.window_max([](const Eigen::VectorXd& a) { return a.norm(); }, true);
      s = m * m;
      break;
    }
  }
  return eval_tau(d, t, s);
}

// Empirical Lipschitz constant of tau in phi over trial history pairs:
// max |tau(phi1) - tau(phi2)| / ||phi1 - phi2||_{C_L2}. Identical pairs are
// skipped; an all-identical set is a setup error.
inline double estimate_tau_lipschitz(
    const DelaySpec& d, double t,
    const std::vector<std::pair<HistorySegment, HistorySegment>>& trials) {
  if (trials.size() < 2)
    throw PreconditionError("tau Lipschitz estimate needs at least 2 trial pairs");
  double best = -1.0;
  for (const auto& [h1, h2] : trials) {
    const double lo = std::max(h1.earliest_time(), h2.earliest_time());
    const double hi = std::min(h1.latest_time(), h2.latest_time());
    std::vector<double> qs{lo, hi};
    for (const auto& s : h1.samples())
      if (s.t > lo && s.t < hi) qs.push_back(s.t);
    for (const auto& s : h2.samples())
      if (s.t > lo && s.t < hi) qs.push_back(s.t);
    double dist = 0.0;
    for (double q : qs) dist = std::max(dist, (h1.sample(q) - h2.sample(q)).norm());
    if (dist <= 1e-15) continue;
    best = std::max(best, std::abs(eval_tau(d, t, h1) - eval_tau(d, t, h2)) / dist);
  }
  if (best < 0.0)
    throw PreconditionError("all trial history pairs are identical; Lipschitz quotient undefined");
  return best;
}

// ---- forcing and initial history -------------------------------------------

// d(t) = amplitude * exp(-decay*t) * cos(omega*t + phase); bounded by
// |amplitude| for t >= 0 once decay >= 0.
struct TimeSignal {
  double amplitude = 0.0;
  double decay = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  double operator()(double t) const {
    double v = amplitude * std::exp(-decay * t);
    if (omega != 0.0 || phase != 0.0) v *= std::cos(omega * t + phase);
    return v;
  }
  double sup_bound() const { return std::abs(amplitude); }
  void validate() const {
    if (decay < 0.0) throw std::invalid_argument("time signal decay rate must be >= 0");
  }
};

struct SpatialProfile {
  enum class Kind { Mode, SinPow, Bump, Modal };
  Kind kind = Kind::Mode;
  double scale = 1.0;
  int m1 = 1, m2 = 1;                 // Mode: scale * w_{m1[,m2]}
  int power = 1;                      // SinPow (1D): scale * sin(pi x / L)^power
  double center = 0.5, width = 0.1;   // Bump (1D): scale * exp(-((x-c)/w)^2)
  std::vector<double> coeffs;         // Modal: coefficients in run-basis order

  void validate(const DomainSpec& dom) const {
    if (kind == Kind::Mode && (m1 < 1 || (dom.dimension == 2 && m2 < 1)))
      throw std::invalid_argument("mode profile indices must be >= 1");
    if ((kind == Kind::SinPow || kind == Kind::Bump) && dom.dimension != 1)
      throw std::invalid_argument("sinpow/bump profiles are 1D only");
    if (kind == Kind::SinPow && power < 1)
      throw std::invalid_argument("sinpow power must be >= 1");
    if (kind == Kind::Bump && !(width > 0.0))
      throw std::invalid_argument("bump width must be positive");
  }
};

// Pointwise 1D profile evaluation for grid-based solvers; modal profiles are
// tied to a spectral basis and are rejected here.
inline double profile_value(const SpatialProfile& pr, const DomainSpec& dom, double x) {
  pr.validate(dom);
  switch (pr.kind) {
    case SpatialProfile::Kind::Mode:
      return pr.scale * std::sqrt(2.0 / dom.length) *
             std::sin(pr.m1 * std::numbers::pi * x / dom.length);
    case SpatialProfile::Kind::SinPow:
      return pr.scale * std::pow(std::sin(std::numbers::pi * x / dom.length), pr.power);
    case SpatialProfile::Kind::Bump: {
      const double z = (x - pr.center) / pr.width;
      return pr.scale * std::exp(-z * z);
    }
    case SpatialProfile::Kind::Modal:
      throw std::invalid_argument("modal profiles require the spectral path");
  }
  throw std::logic_error("unknown profile kind");
}

inline Eigen::VectorXd profile_on_grid(const SpatialProfile& pr, const EigenBasis& basis) {
  const DomainSpec& dom = basis.domain();
  pr.validate(dom);
  switch (pr.kind) {
    case SpatialProfile::Kind::Mode:
      return basis.sample_on_grid([&](double x, double y) {
        return pr.scale * basis.eigenfunction(pr.m1, pr.m2, x, y);
      });
    case SpatialProfile::Kind::SinPow:
      return basis.sample_on_grid([&](double x, double) {
        return pr.scale * std::pow(std::sin(std::numbers::pi * x / dom.length), pr.power);
      });
    case SpatialProfile::Kind::Bump:
      return basis.sample_on_grid([&](double x, double) {
        const double z = (x - pr.center) / pr.width;
        return pr.scale * std::exp(-z * z);
      });
    case SpatialProfile::Kind::Modal: {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
      for (int j = 0; j < basis.size() && j < static_cast<int>(pr.coeffs.size()); ++j)
        c[j] = pr.coeffs[j];
      return basis.synthesize(pr.scale * c);
    }
  }
  throw std::logic_error("unknown profile kind");
}

struct ForcingTerm {
  TimeSignal signal;
  SpatialProfile profile;
};

// h(t,x) = sum_i d_i(t) psi_i(x); separable with declared bounds so the
// L^inf-in-time membership is checkable from the spec alone.
struct ForcingSpec {
  std::vector<ForcingTerm> terms;

  bool empty() const { return terms.empty(); }
  void validate(const DomainSpec& dom) const {
    for (const auto& t : terms) {
      t.signal.validate();
      t.profile.validate(dom);
    }
  }
};

struct InitialHistoryTerm {
  TimeSignal signal;  // evaluated in theta over [-r, 0]
  SpatialProfile profile;
};

struct InitialHistorySpec {
  std::vector<InitialHistoryTerm> terms;
  void validate(const DomainSpec& dom) const {
    for (const auto& t : terms) t.profile.validate(dom);
  }
};

// ---- full problem -----------------------------------------------------------

struct ProblemSpec {
  DomainSpec domain;
  FSpec f = PolyF{};
  GSpec g = GPoly{};
  HypothesisConstants constants;
  DelaySpec delay;
  ForcingSpec forcing;
  InitialHistorySpec phi;
  std::vector<double> q_list{2.0};
  std::string digest;  // canonical content digest, set by the config loader

  double primary_q() const { return q_list.empty() ? 2.0 : q_list.front(); }

  void validate() const {
    domain.validate();
    delay.validate();
    forcing.validate(domain);
    phi.validate(domain);
    if (!(constants.beta0 > constants.beta))
      throw std::invalid_argument("(H1) requires beta0 > beta");
    for (double q : q_list)
      if (q < 1.0) throw std::invalid_argument("requested Lq exponents must be >= 1");
  }
};

// Pointwise reaction evaluation over grid samples of the current and delayed
// states; the pseudo-spectral inner loop of the Galerkin right-hand side.
inline Eigen::VectorXd eval_reaction_on_grid(const ProblemSpec& p, const Eigen::VectorXd& u,
                                             const Eigen::VectorXd& v) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    out[i] = eval_f(p.f, u[i]) + eval_g(p.g, u[i], v[i]);
  return out;
}

}  // namespace sdrd
