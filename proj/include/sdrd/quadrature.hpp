#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace sdrd {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

namespace detail {

// 12-point Gauss-Legendre rule on [-1,1] (positive half; rule is symmetric).
inline constexpr double kGL12Nodes[6] = {
    0.1252334085114689154724414, 0.3678314989981801937526915,
    0.5873179542866174472967024, 0.7699026741943046870368938,
    0.9041172563704748566784659, 0.9815606342467192506905491,
};
inline constexpr double kGL12Weights[6] = {
    0.2491470458134027850005624, 0.2334925365383548087608499,
    0.2031674267230659217490645, 0.1600783285433462263346525,
    0.1069393259953184309602547, 0.0471753363865118271946160,
};
inline constexpr int kGL12Points = 12;

}  // namespace detail

// Composite Gauss-Legendre rule on [a,b]: `panels` equal subintervals,
// 12 points each. Integrates trigonometric products essentially exactly
// once the per-panel phase stays below a few radians.
inline QuadratureRule composite_gauss_legendre(double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("quadrature needs at least one panel");
  const int n = panels * detail::kGL12Points;
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double h = (b - a) / panels;
  int idx = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + h * (p + 0.5);
    const double half = 0.5 * h;
    for (int q = 5; q >= 0; --q) {
      rule.nodes[idx] = mid - half * detail::kGL12Nodes[q];
      rule.weights[idx] = half * detail::kGL12Weights[q];
      ++idx;
    }
    for (int q = 0; q < 6; ++q) {
      rule.nodes[idx] = mid + half * detail::kGL12Nodes[q];
      rule.weights[idx] = half * detail::kGL12Weights[q];
      ++idx;
    }
  }
  return rule;
}

}  // namespace sdrd
