#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ncsched/errors.hpp"

namespace ncsched {

using Seconds = std::chrono::duration<double>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgument(std::string(what) + ": expected a non-empty square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace detail

/// Largest entry magnitude; zero for empty matrices.
template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

/// True when ||M - M^T||_max <= tol * (1 + ||M||_max).
template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, typename Derived::RealScalar tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.transpose()) <= tol * (1 + max_abs(m));
}

/// Maximum eigenvalue modulus, from the Hessenberg/QR eigenvalues.
template <typename Derived>
typename Derived::RealScalar spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "spectral_radius");
  using Real = typename Derived::RealScalar;
  const MatrixX<Real> dense = m.template cast<Real>();
  Eigen::EigenSolver<MatrixX<Real>> es(dense, /* computeEigenvectors = */ false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("spectral_radius: eigenvalue iteration did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_schur_stable(const Eigen::MatrixBase<Derived>& m,
                     typename Derived::RealScalar margin = 1e-9) {
  return spectral_radius(m) < 1 - margin;
}

/// Matrix exponential (scaling and squaring with a Pade core).
template <typename Derived>
MatrixX<typename Derived::Scalar> matrix_exp(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "matrix_exp");
  const MatrixX<typename Derived::Scalar> dense = m;
  return dense.exp();
}

/// Largest eigenvalue of a symmetric matrix. Rejects inputs that are not
/// symmetric to within 1e-12 relative.
template <typename Derived>
typename Derived::RealScalar max_sym_eigenvalue(const Eigen::MatrixBase<Derived>& m,
                                                typename Derived::RealScalar tol = 1e-12) {
  detail::require_square(m, "max_sym_eigenvalue");
  if (!is_symmetric(m, tol)) {
    throw InvalidArgument("max_sym_eigenvalue: matrix is not symmetric");
  }
  using Real = typename Derived::RealScalar;
  const MatrixX<Real> s = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<MatrixX<Real>> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar min_sym_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "min_sym_eigenvalue");
  using Real = typename Derived::RealScalar;
  const MatrixX<Real> s = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<MatrixX<Real>> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Symmetric square root factor L with L L^T = M for M positive semidefinite.
/// Negative round-off eigenvalues are clipped to zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> psd_factor(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "psd_factor");
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> s = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(s);
  const VectorX<Scalar> root = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

template <typename Scalar>
struct DareSolution {
  MatrixX<Scalar> P;
  MatrixX<Scalar> K;
  int iterations = 0;
};

/// Stabilizing solution of
///   A'PA - P - (A'PB + H)(R + B'PB)^{-1}(B'PA + H') + Q = 0
/// by the structure-preserving doubling algorithm. The cross term is removed
/// first, so the doubling runs on (A - B R^{-1} H', Q - H R^{-1} H').
template <typename DA, typename DB, typename DQ, typename DR, typename DH>
DareSolution<typename DA::Scalar> solve_dare(const Eigen::MatrixBase<DA>& A,
                                             const Eigen::MatrixBase<DB>& B,
                                             const Eigen::MatrixBase<DQ>& Q,
                                             const Eigen::MatrixBase<DR>& R,
                                             const Eigen::MatrixBase<DH>& H,
                                             typename DA::Scalar tol = 1e-12,
                                             int max_iterations = 200) {
  using Scalar = typename DA::Scalar;
  using Mat = MatrixX<Scalar>;
  detail::require_square(A, "solve_dare(A)");
  detail::require_square(R, "solve_dare(R)");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || H.rows() != n ||
      H.cols() != m) {
    throw InvalidArgument("solve_dare: inconsistent dimensions");
  }
  if (!is_symmetric(Q, Scalar(1e-9)) || !is_symmetric(R, Scalar(1e-9))) {
    throw InvalidArgument("solve_dare: Q and R must be symmetric");
  }
  const Mat Rs = symmetrized(R);
  Eigen::LLT<Mat> r_chol(Rs);
  if (r_chol.info() != Eigen::Success) {
    throw InvalidArgument("solve_dare: R is not positive definite");
  }

  const Mat Rinv_Ht = r_chol.solve(H.transpose());
  Mat a = A - B * Rinv_Ht;
  Mat g = symmetrized(B * r_chol.solve(B.transpose()));
  Mat h = symmetrized(Q - H * Rinv_Ht);
  const Mat I = Mat::Identity(n, n);

  int it = 0;
  for (; it < max_iterations; ++it) {
    const Eigen::PartialPivLU<Mat> w(I + g * h);
    const Mat w_a = w.solve(a);
    const Mat w_g = w.solve(g);
    const Mat h_next = symmetrized(h + a.transpose() * h * w_a);
    g = symmetrized(g + a * w_g * a.transpose());
    a = a * w_a;
    if (!h_next.allFinite() || !g.allFinite() || !a.allFinite()) {
      throw NotStabilizable("solve_dare: doubling iteration diverged (pair not stabilizable?)");
    }
    const Scalar change = max_abs(h_next - h);
    h = h_next;
    if (change <= tol * (1 + max_abs(h))) break;
  }
  if (it == max_iterations) {
    throw NotStabilizable("solve_dare: doubling iteration did not converge");
  }

  DareSolution<Scalar> out;
  out.P = h;
  out.K = (Rs + B.transpose() * h * B).ldlt().solve(B.transpose() * h * A + H.transpose());
  out.iterations = it + 1;
  if (!is_schur_stable(A - B * out.K)) {
    throw NotStabilizable("solve_dare: closed loop A - BK is not Schur stable");
  }
  return out;
}

/// Riccati residual A'PA - P - (A'PB + H)(R + B'PB)^{-1}(B'PA + H') + Q.
template <typename Scalar>
MatrixX<Scalar> dare_residual(const MatrixX<Scalar>& A, const MatrixX<Scalar>& B,
                              const MatrixX<Scalar>& Q, const MatrixX<Scalar>& R,
                              const MatrixX<Scalar>& H, const MatrixX<Scalar>& P) {
  const MatrixX<Scalar> cross = A.transpose() * P * B + H;
  return A.transpose() * P * A - P -
         cross * (R + B.transpose() * P * B).ldlt().solve(cross.transpose()) + Q;
}

/// Per-step covariance of continuous white noise with intensity W over one
/// period T:  integral_0^T e^{A t} W e^{A' t} dt  (Van Loan construction).
template <typename DA, typename DW>
MatrixX<typename DA::Scalar> discretize_noise(const Eigen::MatrixBase<DA>& A,
                                              const Eigen::MatrixBase<DW>& W, Seconds T) {
  using Scalar = typename DA::Scalar;
  detail::require_square(A, "discretize_noise(A)");
  if (!(T.count() > 0)) throw InvalidArgument("discretize_noise: period must be positive");
  const Eigen::Index n = A.rows();
  if (W.rows() != n || W.cols() != n) {
    throw InvalidArgument("discretize_noise: intensity dimension mismatch");
  }
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = -A;
  m.topRightCorner(n, n) = W;
  m.bottomRightCorner(n, n) = A.transpose();
  const MatrixX<Scalar> e = matrix_exp(m * Scalar(T.count()));
  return symmetrized(e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n));
}

template <typename Scalar>
struct Discretized {
  MatrixX<Scalar> A;
  MatrixX<Scalar> B;
};

/// Zero-order-hold discretization via exp([[A, B], [0, 0]] T).
template <typename DA, typename DB>
Discretized<typename DA::Scalar> discretize_zoh(const Eigen::MatrixBase<DA>& A,
                                                const Eigen::MatrixBase<DB>& B, Seconds T) {
  using Scalar = typename DA::Scalar;
  detail::require_square(A, "discretize_zoh(A)");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (B.rows() != n) throw InvalidArgument("discretize_zoh: B row count mismatch");
  MatrixX<Scalar> aug = MatrixX<Scalar>::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, m) = B;
  const MatrixX<Scalar> phi = matrix_exp(aug * Scalar(T.count()));
  return {phi.topLeftCorner(n, n), phi.topRightCorner(n, m)};
}

}  // namespace ncsched
