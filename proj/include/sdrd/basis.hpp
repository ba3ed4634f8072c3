#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sdrd/domain.hpp"
#include "sdrd/quadrature.hpp"

namespace sdrd {

// Modal coefficient vector in the Dirichlet eigenbasis, sorted by eigenvalue.
using ModalState = Eigen::VectorXd;

// Closed-form Dirichlet Laplacian eigenpairs on a box, with an oversampled
// tensor quadrature grid for pseudo-spectral products and a dense uniform
// grid for sup-norm estimation. Immutable after build; all operations pure.
class EigenBasis {
 public:
  struct Mode {
    int m1 = 0;  // axis-1 wavenumber (1-based)
    int m2 = 0;  // axis-2 wavenumber, 0 in 1D
    double mu = 0.0;
  };

  // k is the mode count in 1D and the per-axis mode count in 2D
  // (total k^2 tensor modes, sorted ascending by eigenvalue, ties by (m1,m2)).
  static EigenBasis build(const DomainSpec& domain, int k) {
    domain.validate();
    if (k < 1) throw std::invalid_argument("mode count must be >= 1");
    EigenBasis b;
    b.domain_ = domain;
    b.k_axis_ = k;

    const double lx = domain.length;
    const double ly = domain.dimension == 2 ? domain.length2 : 1.0;
    const int ky = domain.dimension == 2 ? k : 1;

    b.modes_.reserve(static_cast<std::size_t>(k) * ky);
    for (int m1 = 1; m1 <= k; ++m1) {
      if (domain.dimension == 1) {
        b.modes_.push_back({m1, 0, square(m1 * kPi / lx)});
      } else {
        for (int m2 = 1; m2 <= ky; ++m2)
          b.modes_.push_back({m1, m2, square(m1 * kPi / lx) + square(m2 * kPi / ly)});
      }
    }
    std::sort(b.modes_.begin(), b.modes_.end(), [](const Mode& a, const Mode& c) {
      if (a.mu != c.mu) return a.mu < c.mu;
      if (a.m1 != c.m1) return a.m1 < c.m1;
      return a.m2 < c.m2;
    });
    b.mu_.resize(b.modes_.size());
    for (std::size_t j = 0; j < b.modes_.size(); ++j) b.mu_[j] = b.modes_[j].mu;

    // Panel count resolves products up to quartic mode frequency (~4k), which
    // covers dealiased projection of cubic nonlinearities; node count is well
    // above the 2k-per-axis floor.
    const int panels = std::max(2, static_cast<int>(std::ceil(1.6 * k)) + 2);
    b.quad_x_ = composite_gauss_legendre(0.0, lx, panels);
    b.sx_ = sine_samples(k, lx, b.quad_x_.nodes);
    if (domain.dimension == 2) {
      b.quad_y_ = composite_gauss_legendre(0.0, ly, panels);
      b.sy_ = sine_samples(ky, ly, b.quad_y_.nodes);
    } else {
      b.quad_y_.nodes = Eigen::VectorXd::Zero(1);
      b.quad_y_.weights = Eigen::VectorXd::Ones(1);
      b.sy_ = Eigen::MatrixXd::Ones(1, 1);
    }

    const Eigen::Index nx = b.quad_x_.nodes.size();
    const Eigen::Index ny = b.quad_y_.nodes.size();
    b.weights_.resize(nx * ny);
    for (Eigen::Index ix = 0; ix < nx; ++ix)
      for (Eigen::Index iy = 0; iy < ny; ++iy)
        b.weights_[ix * ny + iy] = b.quad_x_.weights[ix] * b.quad_y_.weights[iy];

    // Dense uniform grid, 4 points per mode per axis, for sup norms.
    b.dense_per_axis_ = 4 * k + 1;
    b.dense_x_ = Eigen::VectorXd::LinSpaced(b.dense_per_axis_, 0.0, lx);
    b.dx_ = sine_samples(k, lx, b.dense_x_);
    if (domain.dimension == 2) {
      b.dense_y_ = Eigen::VectorXd::LinSpaced(b.dense_per_axis_, 0.0, ly);
      b.dy_ = sine_samples(ky, ly, b.dense_y_);
    } else {
      b.dense_y_ = Eigen::VectorXd::Zero(1);
      b.dy_ = Eigen::MatrixXd::Ones(1, 1);
    }

    b.check_axis_orthonormality();
    return b;
  }

  const DomainSpec& domain() const { return domain_; }
  int modes_per_axis() const { return k_axis_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const std::vector<Mode>& modes() const { return modes_; }
  const Eigen::VectorXd& eigenvalues() const { return mu_; }
  double eigenvalue(int j) const { return mu_[j]; }

  int grid_size() const {
    return static_cast<int>(quad_x_.nodes.size() * quad_y_.nodes.size());
  }
  const Eigen::VectorXd& grid_weights() const { return weights_; }
  double grid_x(int i) const { return quad_x_.nodes[i / quad_y_.nodes.size()]; }
  double grid_y(int i) const { return quad_y_.nodes[i % quad_y_.nodes.size()]; }
  int dense_points_per_axis() const { return dense_per_axis_; }

  Eigen::VectorXd sample_on_grid(const std::function<double(double, double)>& f) const {
    const Eigen::Index nx = quad_x_.nodes.size(), ny = quad_y_.nodes.size();
    Eigen::VectorXd out(nx * ny);
    for (Eigen::Index ix = 0; ix < nx; ++ix)
      for (Eigen::Index iy = 0; iy < ny; ++iy)
        out[ix * ny + iy] = f(quad_x_.nodes[ix], quad_y_.nodes[iy]);
    return out;
  }

  // Modal coefficients of a grid-sampled function: a_j = sum_i W_i u_i w_j(x_i).
  Eigen::VectorXd project(const Eigen::VectorXd& grid_samples) const {
    const Eigen::Index nx = quad_x_.nodes.size(), ny = quad_y_.nodes.size();
    if (grid_samples.size() != nx * ny)
      throw std::invalid_argument("grid sample count does not match basis quadrature grid");
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        u(grid_samples.data(), nx, ny);
    const Eigen::MatrixXd b =
        (sx_ * quad_x_.weights.asDiagonal()) * u * (quad_y_.weights.asDiagonal() * sy_.transpose());
    return gather(b);
  }

  // Pointwise values sum_j a_j w_j on the quadrature grid.
  Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const {
    const Eigen::MatrixXd a = scatter(coeffs);
    const Eigen::Index nx = quad_x_.nodes.size(), ny = quad_y_.nodes.size();
    Eigen::VectorXd out(nx * ny);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        u(out.data(), nx, ny);
    u = sx_.transpose() * a * sy_;
    return out;
  }

  double value_at(const Eigen::VectorXd& coeffs, double x, double y = 0.0) const {
    if (!domain_.contains(x, y))
      throw std::invalid_argument("evaluation point outside domain");
    check_coeffs(coeffs);
    double acc = 0.0;
    for (int j = 0; j < size(); ++j) acc += coeffs[j] * mode_value(modes_[j], x, y);
    return acc;
  }

  // 1D convenience used by the finite-difference comparison path.
  Eigen::VectorXd synthesize_at(const Eigen::VectorXd& coeffs,
                                const Eigen::VectorXd& xs) const {
    check_coeffs(coeffs);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
      if (!domain_.contains(xs[i]))
        throw std::invalid_argument("evaluation point outside domain");
      for (int j = 0; j < size(); ++j) out[i] += coeffs[j] * mode_value(modes_[j], xs[i], 0.0);
    }
    return out;
  }

  // ---- norms ------------------------------------------------------------

  double l2_norm(const Eigen::VectorXd& coeffs) const {
    check_coeffs(coeffs);
    return coeffs.norm();
  }
  double v1_norm(const Eigen::VectorXd& coeffs) const {
    check_coeffs(coeffs);
    return std::sqrt(coeffs.array().square().matrix().dot(mu_));
  }
  double v2_norm(const Eigen::VectorXd& coeffs) const {
    check_coeffs(coeffs);
    return std::sqrt((coeffs.array().square() * mu_.array().square()).sum());
  }
  double lq_norm(const Eigen::VectorXd& coeffs, double q) const {
    if (q < 1.0) throw std::invalid_argument("Lq norm requires q >= 1");
    if (q == 2.0) return l2_norm(coeffs);
    check_coeffs(coeffs);
    return lq_norm_of_samples(synthesize(coeffs), q);
  }
  double linf_norm(const Eigen::VectorXd& coeffs) const {
    check_coeffs(coeffs);
    const Eigen::MatrixXd a = scatter(coeffs);
    const Eigen::MatrixXd u = dx_.transpose() * a * dy_;
    return u.cwiseAbs().maxCoeff();
  }

  // Quadrature Lq norm of raw grid samples (used for un-projected data).
  double lq_norm_of_samples(const Eigen::VectorXd& grid_samples, double q) const {
    if (q < 1.0) throw std::invalid_argument("Lq norm requires q >= 1");
    if (grid_samples.size() != weights_.size())
      throw std::invalid_argument("grid sample count does not match basis quadrature grid");
    const double s = (grid_samples.array().abs().pow(q) * weights_.array()).sum();
    return std::pow(s, 1.0 / q);
  }
  double linf_norm_of_function(const std::function<double(double, double)>& f) const {
    double m = 0.0;
    for (Eigen::Index ix = 0; ix < dense_x_.size(); ++ix)
      for (Eigen::Index iy = 0; iy < dense_y_.size(); ++iy)
        m = std::max(m, std::abs(f(dense_x_[ix], dense_y_[iy])));
    return m;
  }

  // Normalized eigenfunction w_{m1[,m2]} at a point (m2 ignored in 1D).
  double eigenfunction(int m1, int m2, double x, double y) const {
    double v = std::sqrt(2.0 / domain_.length) * std::sin(m1 * kPi * x / domain_.length);
    if (domain_.dimension == 2)
      v *= std::sqrt(2.0 / domain_.length2) * std::sin(m2 * kPi * y / domain_.length2);
    return v;
  }

 private:
  static constexpr double kPi = std::numbers::pi;
  static double square(double v) { return v * v; }

  static Eigen::MatrixXd sine_samples(int k, double length, const Eigen::VectorXd& pts) {
    Eigen::MatrixXd s(k, pts.size());
    const double scale = std::sqrt(2.0 / length);
    for (int m = 1; m <= k; ++m)
      for (Eigen::Index i = 0; i < pts.size(); ++i)
        s(m - 1, i) = scale * std::sin(m * kPi * pts[i] / length);
    return s;
  }

  double mode_value(const Mode& m, double x, double y) const {
    return eigenfunction(m.m1, m.m2, x, y);
  }

  Eigen::MatrixXd scatter(const Eigen::VectorXd& coeffs) const {
    check_coeffs(coeffs);
    const int ky = domain_.dimension == 2 ? k_axis_ : 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k_axis_, ky);
    for (int j = 0; j < size(); ++j)
      a(modes_[j].m1 - 1, domain_.dimension == 2 ? modes_[j].m2 - 1 : 0) = coeffs[j];
    return a;
  }
  Eigen::VectorXd gather(const Eigen::MatrixXd& a) const {
    Eigen::VectorXd coeffs(size());
    for (int j = 0; j < size(); ++j)
      coeffs[j] = a(modes_[j].m1 - 1, domain_.dimension == 2 ? modes_[j].m2 - 1 : 0);
    return coeffs;
  }
  void check_coeffs(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != size())
      throw std::invalid_argument("coefficient length does not match basis mode count");
  }

  void check_axis_orthonormality() const {
    const auto check = [](const Eigen::MatrixXd& s, const Eigen::VectorXd& w) {
      const Eigen::MatrixXd gram = s * w.asDiagonal() * s.transpose();
      const double err =
          (gram - Eigen::MatrixXd::Identity(s.rows(), s.rows())).cwiseAbs().maxCoeff();
      if (err > 1e-10)
        throw std::logic_error("eigenbasis quadrature failed orthonormality check");
    };
    check(sx_, quad_x_.weights);
    if (domain_.dimension == 2) check(sy_, quad_y_.weights);
  }

  DomainSpec domain_;
  int k_axis_ = 0;
  std::vector<Mode> modes_;
  Eigen::VectorXd mu_;
  QuadratureRule quad_x_, quad_y_;
  Eigen::MatrixXd sx_, sy_;   // per-axis eigenfunction samples on quadrature nodes
  Eigen::VectorXd weights_;   // flattened tensor weights, index ix*ny + iy
  int dense_per_axis_ = 0;
  Eigen::VectorXd dense_x_, dense_y_;
  Eigen::MatrixXd dx_, dy_;   // per-axis samples on the dense sup-norm grid
};

}  // namespace sdrd
