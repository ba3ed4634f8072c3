#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdrd/errors.hpp"

namespace sdrd {

// Time-stamped state buffer realizing the history segment u_t over [t-r, t].
// States are plain coefficient vectors; the same buffer backs the spectral
// solver (modal states) and the finite-difference oracle (grid states).
// Interpolation between nodes is linear, which keeps every convex norm of
// an interpolated state below the node maximum.
class HistorySegment {
 public:
  struct Sample {
    double t;
    Eigen::VectorXd state;
  };

  explicit HistorySegment(double window) : r_(window) {
    if (window < 0.0) throw std::invalid_argument("history window must be >= 0");
  }

  double window_length() const { return r_; }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  const std::deque<Sample>& samples() const { return samples_; }

  double earliest_time() const {
    require_nonempty();
    return samples_.front().t;
  }
  double latest_time() const {
    require_nonempty();
    return samples_.back().t;
  }
  const Eigen::VectorXd& latest() const {
    require_nonempty();
    return samples_.back().state;
  }

  void push(double t, Eigen::VectorXd state) {
    if (!samples_.empty()) {
      if (!(t > samples_.back().t))
        throw std::invalid_argument("history push requires strictly increasing time (got " +
                                    std::to_string(t) + " after " +
                                    std::to_string(samples_.back().t) + ")");
      if (state.size() != samples_.back().state.size())
        throw std::invalid_argument("history states must share one dimension");
    }
    samples_.push_back({t, std::move(state)});
    // Evict samples no longer reachable by a window query, keeping one node
    // at or before t - r so interpolation at exactly t - r never extrapolates.
    while (samples_.size() >= 2 && samples_[1].t <= t - r_) samples_.pop_front();
  }

  // Linear interpolation; stored node times return the stored state exactly.
  Eigen::VectorXd sample(double s) const {
    require_nonempty();
    if (s < samples_.front().t || s > samples_.back().t)
      throw OutOfWindowError("history queried at t=" + std::to_string(s) +
                             " outside covered span [" + std::to_string(samples_.front().t) +
                             ", " + std::to_string(samples_.back().t) + "]");
    const auto it = std::lower_bound(
        samples_.begin(), samples_.end(), s,
        [](const Sample& a, double val) { return a.t < val; });
    if (it != samples_.end() && it->t == s) return it->state;
    const Sample& hi = *it;
    const Sample& lo = *std::prev(it);
    const double w = (s - lo.t) / (hi.t - lo.t);
    return (1.0 - w) * lo.state + w * hi.state;
  }

  bool covers_window() const {
    if (samples_.empty()) return false;
    if (r_ == 0.0) return true;
    return samples_.front().t <= samples_.back().t - r_ ||
           nearly_equal(samples_.front().t, samples_.back().t - r_);
  }

  // Maximum of fn over the window [t_latest - r, t_latest]. For C-type norms
  // midpoints of adjacent nodes are included as interpolated states; for
  // ess-sup-type norms stored nodes suffice. With r = 0 only the latest
  // state enters, matching the degenerate window.
  double window_max(const std::function<double(const Eigen::VectorXd&)>& fn,
                    bool include_midpoints) const {
    require_nonempty();
    if (!covers_window())
      throw OutOfWindowError("window [t-r, t] not covered by stored history");
    if (r_ == 0.0) return fn(samples_.back().state);
    const double t0 = std::max(samples_.back().t - r_, samples_.front().t);
    std::vector<double> queries{t0};
    for (const Sample& s : samples_)
      if (s.t > t0) queries.push_back(s.t);
    if (include_midpoints) {
      const std::size_t n = queries.size();
      for (std::size_t i = 0; i + 1 < n; ++i)
        queries.push_back(0.5 * (queries[i] + queries[i + 1]));
    }
    double best = 0.0;
    for (double q : queries) best = std::max(best, fn(sample(q)));
    return best;
  }

 private:
  static bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  }
  void require_nonempty() const {
    if (samples_.empty()) throw OutOfWindowError("history segment is empty");
  }

  double r_;
  std::deque<Sample> samples_;
};

}  // namespace sdrd
