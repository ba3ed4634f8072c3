#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sdrd/basis.hpp"

using Catch::Approx;
using sdrd::DomainSpec;
using sdrd::EigenBasis;

namespace {
constexpr double kPi = std::numbers::pi;

DomainSpec interval(double length) { return DomainSpec{1, length, 1.0}; }
}  // namespace

TEST_CASE("Dirichlet spectrum on (0,pi) is j^2") {
  const EigenBasis b = EigenBasis::build(interval(kPi), 3);
  REQUIRE(b.size() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(b.eigenvalue(j) == Approx(double((j + 1) * (j + 1))).margin(1e-12));
    // closed form, computed the same way the builder does
    const double mu = std::pow((j + 1) * kPi / kPi, 2.0);
    CHECK(b.eigenvalue(j) == mu);
  }
}

TEST_CASE("unit interval ground eigenvalue is pi^2") {
  const EigenBasis b = EigenBasis::build(interval(1.0), 1);
  CHECK(b.eigenvalue(0) == Approx(kPi * kPi).epsilon(1e-15));
}

TEST_CASE("2D tensor eigenvalues sort ascending") {
  const EigenBasis b = EigenBasis::build(DomainSpec{2, kPi, kPi}, 3);
  REQUIRE(b.size() == 9);

  // oracle: enumerate m^2 + n^2 and sort
  std::vector<double> expected;
  for (int m = 1; m <= 3; ++m)
    for (int n = 1; n <= 3; ++n) expected.push_back(double(m * m + n * n));
  std::sort(expected.begin(), expected.end());
  CHECK(b.eigenvalue(0) == Approx(expected[0]).margin(1e-12));  // 2
  CHECK(b.eigenvalue(1) == Approx(expected[1]).margin(1e-12));  // 5
  CHECK(b.eigenvalue(2) == Approx(expected[2]).margin(1e-12));  // 5
  // tie order: (1,2) before (2,1)
  CHECK(b.modes()[1].m1 == 1);
  CHECK(b.modes()[1].m2 == 2);
  CHECK(b.modes()[2].m1 == 2);
  CHECK(b.modes()[2].m2 == 1);
}

TEST_CASE("domain validation rejects bad input") {
  CHECK_THROWS_AS(EigenBasis::build(DomainSpec{3, 1.0, 1.0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(EigenBasis::build(interval(-1.0), 4), std::invalid_argument);
  CHECK_THROWS_AS(EigenBasis::build(interval(0.0), 4), std::invalid_argument);
  CHECK_THROWS_AS(EigenBasis::build(interval(1.0), 0), std::invalid_argument);
}

TEST_CASE("projection recovers modal content") {
  const EigenBasis b = EigenBasis::build(interval(kPi), 3);

  SECTION("samples of w2 give the unit vector e2") {
    const Eigen::VectorXd samples =
        b.sample_on_grid([&](double x, double) { return b.eigenfunction(2, 0, x, 0.0); });
    const Eigen::VectorXd a = b.project(samples);
    CHECK(a[0] == Approx(0.0).margin(1e-12));
    CHECK(a[1] == Approx(1.0).epsilon(1e-12));
    CHECK(a[2] == Approx(0.0).margin(1e-12));
  }

  SECTION("linearity: 3 w1 + 0.5 w3") {
    const Eigen::VectorXd samples = b.sample_on_grid([&](double x, double) {
      return 3.0 * b.eigenfunction(1, 0, x, 0.0) + 0.5 * b.eigenfunction(3, 0, x, 0.0);
    });
    const Eigen::VectorXd a = b.project(samples);
    CHECK(a[0] == Approx(3.0).epsilon(1e-12));
    CHECK(a[1] == Approx(0.0).margin(1e-12));
    CHECK(a[2] == Approx(0.5).epsilon(1e-12));
  }

  SECTION("sin^3 x expands by the triple-angle identity") {
    // sin^3 x = (3 sin x - sin 3x)/4 and sin(jx) = sqrt(pi/2) w_j on (0,pi)
    const Eigen::VectorXd samples =
        b.sample_on_grid([](double x, double) { return std::pow(std::sin(x), 3); });
    const Eigen::VectorXd a = b.project(samples);
    const double unit = std::sqrt(kPi / 2.0);
    CHECK(a[0] == Approx(0.75 * unit).epsilon(1e-12));
    CHECK(a[1] == Approx(0.0).margin(1e-12));
    CHECK(a[2] == Approx(-0.25 * unit).epsilon(1e-12));
  }

  SECTION("grid size mismatch is rejected") {
    CHECK_THROWS_AS(b.project(Eigen::VectorXd::Zero(7)), std::invalid_argument);
  }
}

TEST_CASE("synthesis evaluates the modal sum") {
  const EigenBasis b = EigenBasis::build(interval(2.0), 3);

  SECTION("e1 at midpoint equals sqrt(2/L)") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
    a[0] = 1.0;
    CHECK(b.value_at(a, 1.0) == Approx(std::sqrt(2.0 / 2.0)).epsilon(1e-14));
  }

  SECTION("zero coefficients synthesize to zero") {
    const Eigen::VectorXd u = b.synthesize(Eigen::VectorXd::Zero(3));
    CHECK(u.cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("points outside the domain are rejected") {
    CHECK_THROWS_AS(b.value_at(Eigen::VectorXd::Zero(3), 2.5), std::invalid_argument);
    CHECK_THROWS_AS(b.value_at(Eigen::VectorXd::Zero(3), -0.1), std::invalid_argument);
  }
}

TEST_CASE("project after synthesize is the identity on the span") {
  const EigenBasis b = EigenBasis::build(interval(kPi), 16);
  std::mt19937 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd a(16);
    for (int j = 0; j < 16; ++j) a[j] = normal(rng);
    const Eigen::VectorXd back = b.project(b.synthesize(a));
    CHECK((back - a).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("norms") {
  const EigenBasis b = EigenBasis::build(interval(kPi), 3);

  SECTION("Parseval on a single mode") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
    a[0] = -2.5;
    CHECK(b.l2_norm(a) == Approx(2.5).epsilon(1e-15));
  }

  SECTION("V1 norm of w1 cross-checked against the gradient quadrature") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
    a[0] = 1.0;
    CHECK(b.v1_norm(a) * b.v1_norm(a) == Approx(1.0).epsilon(1e-13));
    // independent route: w1'(x) = sqrt(2/pi) cos x, integrate (w1')^2
    double grad = 0.0;
    for (int i = 0; i < b.grid_size(); ++i) {
      const double d = std::sqrt(2.0 / kPi) * std::cos(b.grid_x(i));
      grad += b.grid_weights()[i] * d * d;
    }
    CHECK(grad == Approx(1.0).epsilon(1e-12));
  }

  SECTION("L4 norm of sin x is (3 pi / 8)^{1/4}") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
    a[0] = std::sqrt(kPi / 2.0);  // sin x in the normalized basis
    CHECK(b.lq_norm(a, 4.0) == Approx(std::pow(3.0 * kPi / 8.0, 0.25)).epsilon(1e-10));
  }

  SECTION("q below 1 is rejected") {
    CHECK_THROWS_AS(b.lq_norm(Eigen::VectorXd::Zero(3), 0.5), std::invalid_argument);
  }
}

TEST_CASE("quadrature Gram matrix is the identity") {
  SECTION("1D, k = 64") {
    const EigenBasis b = EigenBasis::build(interval(kPi), 64);
    Eigen::MatrixXd samples(64, b.grid_size());
    for (int j = 0; j < 64; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(64);
      e[j] = 1.0;
      samples.row(j) = b.synthesize(e).transpose();
    }
    const Eigen::MatrixXd gram = samples * b.grid_weights().asDiagonal() * samples.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-10);
  }

  SECTION("2D, 4 modes per axis") {
    const EigenBasis b = EigenBasis::build(DomainSpec{2, kPi, 2.0}, 4);
    Eigen::MatrixXd samples(b.size(), b.grid_size());
    for (int j = 0; j < b.size(); ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(b.size());
      e[j] = 1.0;
      samples.row(j) = b.synthesize(e).transpose();
    }
    const Eigen::MatrixXd gram = samples * b.grid_weights().asDiagonal() * samples.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("norm chain holds for random states") {
  const EigenBasis b = EigenBasis::build(interval(kPi), 12);
  const double mu1 = b.eigenvalue(0);
  std::mt19937 rng(21);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd a(12);
    for (int j = 0; j < 12; ++j) a[j] = normal(rng);
    const double l2 = b.l2_norm(a), v1 = b.v1_norm(a), v2 = b.v2_norm(a);
    CHECK(v1 * v1 >= mu1 * l2 * l2 * (1.0 - 1e-12));   // discrete Poincare
    CHECK(v2 * v2 >= mu1 * v1 * v1 * (1.0 - 1e-12));   // norm ordering
    // Parseval consistency: quadrature L2 of the synthesis matches
    CHECK(b.lq_norm_of_samples(b.synthesize(a), 2.0) == Approx(l2).epsilon(1e-9));
  }
}

TEST_CASE("2D synthesis round-trip") {
  const EigenBasis b = EigenBasis::build(DomainSpec{2, 1.5, 2.5}, 5);
  std::mt19937 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd a(b.size());
  for (int j = 0; j < b.size(); ++j) a[j] = normal(rng);
  const Eigen::VectorXd back = b.project(b.synthesize(a));
  CHECK((back - a).cwiseAbs().maxCoeff() < 1e-10);
  // pointwise evaluation agrees with the grid synthesis
  const Eigen::VectorXd u = b.synthesize(a);
  const int i = 37;
  CHECK(b.value_at(a, b.grid_x(i), b.grid_y(i)) == Approx(u[i]).epsilon(1e-11));
}
