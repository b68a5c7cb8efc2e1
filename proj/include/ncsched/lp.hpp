#pragma once

#include <Eigen/Dense>

namespace ncsched {

/// min c'x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  x >= 0.
struct LinearProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd le;
  Eigen::VectorXd le_rhs;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0;
  int pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's pivoting rule, so the
/// returned vertex is a deterministic function of the input. Redundant
/// equality rows are detected and dropped after phase one.
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-9);

}  // namespace ncsched
