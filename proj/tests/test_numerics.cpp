#include <cmath>
#include <random>

#include "doctest.h"
#include "ncsched/numerics.hpp"

using namespace ncsched;

namespace {

// e^{A t} for A = [[0, 1], [-2, 2]]: (A - I)^2 = -I, so
// e^{A t} = e^t (cos t I + sin t (A - I)).
MatrixXd closed_form_exp(double t) {
  MatrixXd a(2, 2);
  a << 0, 1, -2, 2;
  const MatrixXd I = MatrixXd::Identity(2, 2);
  return std::exp(t) * (std::cos(t) * I + std::sin(t) * (a - I));
}

MatrixXd random_matrix(std::mt19937_64& gen, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(gen);
  return m;
}

}  // namespace

TEST_CASE("spectral radius") {
  CHECK(spectral_radius(MatrixXd::Identity(2, 2)) == doctest::Approx(1.0).epsilon(1e-12));

  MatrixXd tri(2, 2);
  tri << 2, -1.5, 0, 0.5;
  CHECK(spectral_radius(tri) == doctest::Approx(2.0).epsilon(1e-12));

  // lambda^2 - 2 lambda + 2 = 0, roots 1 +- i
  MatrixXd cplx(2, 2);
  cplx << 0, 1, -2, 2;
  CHECK(spectral_radius(cplx) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(spectral_radius(MatrixXd::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("spectral radius is absolutely homogeneous") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd m = random_matrix(gen, 4, 1.0);
    const double c = u(gen);
    CHECK(spectral_radius(c * m) ==
          doctest::Approx(std::abs(c) * spectral_radius(m)).epsilon(1e-9));
  }
}

TEST_CASE("matrix exponential") {
  CHECK(max_abs(matrix_exp(MatrixXd::Zero(3, 3)) - MatrixXd::Identity(3, 3)) == 0.0);

  MatrixXd nil(2, 2);
  nil << 0, 1, 0, 0;
  MatrixXd expected(2, 2);
  expected << 1, 1, 0, 1;
  CHECK(max_abs(matrix_exp(nil) - expected) < 1e-15);

  MatrixXd a(2, 2);
  a << 0, 1, -2, 2;
  const MatrixXd e = matrix_exp(0.0392 * a);
  const MatrixXd oracle = closed_form_exp(0.0392);
  CHECK(max_abs(e - oracle) <= 1e-10 * max_abs(oracle));
  // frozen from the closed form
  CHECK(e(0, 0) == doctest::Approx(0.998423).epsilon(1e-6));
  CHECK(e(0, 1) == doctest::Approx(0.040757).epsilon(1e-5));
  CHECK(e(1, 0) == doctest::Approx(-0.081514).epsilon(1e-5));
  CHECK(e(1, 1) == doctest::Approx(1.079937).epsilon(1e-6));

  CHECK_THROWS_AS(matrix_exp(MatrixXd::Zero(2, 1)), InvalidArgument);
}

TEST_CASE("exp(M) exp(-M) = I") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd m = random_matrix(gen, 5, 1.0);
    CHECK(max_abs(matrix_exp(m) * matrix_exp(-m) - MatrixXd::Identity(5, 5)) < 1e-8);
  }
}

TEST_CASE("max symmetric eigenvalue") {
  CHECK(max_sym_eigenvalue(VectorXd(Eigen::Vector2d(1, -3)).asDiagonal().toDenseMatrix()) ==
        doctest::Approx(1.0));
  CHECK(max_sym_eigenvalue(-MatrixXd::Identity(3, 3)) == doctest::Approx(-1.0));
  MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(max_sym_eigenvalue(m) == doctest::Approx(3.0).epsilon(1e-12));

  MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(max_sym_eigenvalue(asym), InvalidArgument);
}

TEST_CASE("DARE scalar case") {
  // P^2 - 4P - 1 = 0  ->  P = 2 + sqrt(5), K = 2P / (1 + P)
  const MatrixXd a = MatrixXd::Constant(1, 1, 2.0);
  const MatrixXd b = MatrixXd::Constant(1, 1, 1.0);
  const MatrixXd q = MatrixXd::Constant(1, 1, 1.0);
  const MatrixXd r = MatrixXd::Constant(1, 1, 1.0);
  const MatrixXd h = MatrixXd::Zero(1, 1);
  const auto sol = solve_dare(a, b, q, r, h);
  CHECK(sol.P(0, 0) == doctest::Approx(2 + std::sqrt(5.0)).epsilon(1e-12));
  CHECK(sol.K(0, 0) == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-12));
}

TEST_CASE("DARE with zero dynamics returns P = Q, K = 0") {
  const MatrixXd a = MatrixXd::Zero(3, 3);
  const MatrixXd b = MatrixXd::Ones(3, 2);
  MatrixXd q = MatrixXd::Identity(3, 3);
  q(0, 1) = q(1, 0) = 0.3;
  const MatrixXd r = MatrixXd::Identity(2, 2);
  const auto sol = solve_dare(a, b, q, r, MatrixXd::Zero(3, 2));
  CHECK(max_abs(sol.P - q) < 1e-14);
  CHECK(max_abs(sol.K) < 1e-14);
}

TEST_CASE("DARE error paths") {
  const MatrixXd a = MatrixXd::Constant(1, 1, 2.0);
  const MatrixXd one = MatrixXd::Constant(1, 1, 1.0);
  CHECK_THROWS_AS(solve_dare(a, MatrixXd::Zero(1, 1), one, one, MatrixXd::Zero(1, 1)),
                  NotStabilizable);
  CHECK_THROWS_AS(solve_dare(a, one, one, MatrixXd::Constant(1, 1, -1.0), MatrixXd::Zero(1, 1)),
                  InvalidArgument);
}

TEST_CASE("DARE residual on random stabilizable systems with cross term") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd a = random_matrix(gen, 4, 0.8);
    const MatrixXd b = random_matrix(gen, 4, 1.0).leftCols(2);
    const MatrixXd l = random_matrix(gen, 6, 1.0);
    // [[Q, H], [H', R]] = L L' + I is positive definite
    const MatrixXd joint = l * l.transpose() + MatrixXd::Identity(6, 6);
    const MatrixXd q = joint.topLeftCorner(4, 4);
    const MatrixXd h = joint.topRightCorner(4, 2);
    const MatrixXd r = joint.bottomRightCorner(2, 2);
    const auto sol = solve_dare(a, b, q, r, h);
    CHECK(max_abs(dare_residual<double>(a, b, q, r, h, sol.P)) <= 1e-8 * (1 + max_abs(sol.P)));
    CHECK(is_schur_stable(a - b * sol.K));
    CHECK(is_symmetric(sol.P));
  }
}

TEST_CASE("noise discretization") {
  const MatrixXd zero = MatrixXd::Zero(2, 2);
  const MatrixXd w = 0.25 * MatrixXd::Identity(2, 2);
  CHECK(max_abs(discretize_noise(zero, w, Seconds(0.5)) - 0.125 * MatrixXd::Identity(2, 2)) <
        1e-15);

  MatrixXd a(2, 2);
  a << 0, 1, -2, 2;
  CHECK(max_abs(discretize_noise(a, zero, Seconds(0.0392))) == 0.0);
  CHECK_THROWS_AS(discretize_noise(a, w, Seconds(0.0)), InvalidArgument);

  // Composite Simpson quadrature on the closed-form exponential.
  const double T = 0.0392;
  const MatrixXd wc = 1e-3 * MatrixXd::Identity(2, 2);
  const int intervals = 2000;
  const double h = T / intervals;
  MatrixXd oracle = MatrixXd::Zero(2, 2);
  for (int k = 0; k <= intervals; ++k) {
    const double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const MatrixXd e = closed_form_exp(k * h);
    oracle += weight * e * wc * e.transpose();
  }
  oracle *= h / 3;
  const MatrixXd wd = discretize_noise(a, wc, Seconds(T));
  CHECK(is_symmetric(wd));
  CHECK(min_sym_eigenvalue(wd) >= 0.0);
  CHECK(max_abs(wd - oracle) <= 1e-8 * max_abs(oracle));
  CHECK(wd.trace() == doctest::Approx(oracle.trace()).epsilon(1e-8));
}

TEST_CASE("noise discretization is monotone in the period") {
  MatrixXd a(2, 2);
  a << 0, 1, -2, 2;
  const MatrixXd wc = 1e-3 * MatrixXd::Identity(2, 2);
  MatrixXd previous = MatrixXd::Zero(2, 2);
  for (double t = 0.01; t < 0.5; t += 0.037) {
    const MatrixXd wd = discretize_noise(a, wc, Seconds(t));
    CHECK(min_sym_eigenvalue(wd - previous) >= -1e-12);
    previous = wd;
  }
}

TEST_CASE("zero-order hold of a double integrator") {
  MatrixXd a(2, 2);
  a << 0, 1, 0, 0;
  MatrixXd b(2, 1);
  b << 0, 1;
  const auto d = discretize_zoh(a, b, Seconds(1.0));
  MatrixXd ea(2, 2);
  ea << 1, 1, 0, 1;
  CHECK(max_abs(d.A - ea) < 1e-15);
  CHECK(d.B(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.B(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
}
