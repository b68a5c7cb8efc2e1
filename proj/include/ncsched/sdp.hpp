#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ncsched {

/// Affine symmetric matrix F(y) = constant + sum_k y_k * coefficient_k,
/// constrained to be positive semidefinite.
struct LmiBlock {
  Eigen::MatrixXd constant;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;

  int size() const { return static_cast<int>(constant.rows()); }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;
};

/// min c'y  s.t.  F_j(y) >= 0 for every block j.
struct LmiProgram {
  int variables = 0;
  Eigen::VectorXd objective;
  std::vector<LmiBlock> blocks;
};

struct BarrierOptions {
  /// Stop once the barrier duality-gap bound falls below
  /// gap_tol * (1 + |c'y|).
  double gap_tol = 1e-8;
  /// Barrier parameter growth per outer iteration.
  double growth = 20;
  int max_newton_per_center = 100;
  int max_outer = 60;
  /// Newton decrement threshold for centering.
  double newton_tol = 1e-9;
};

enum class SdpStatus { Optimal, Infeasible, Failed };

struct SdpResult {
  SdpStatus status = SdpStatus::Failed;
  Eigen::VectorXd y;
  double objective = 0;
  /// Smallest eigenvalue over all blocks at y.
  double min_slack = 0;
  int newton_steps = 0;
  std::string message;
};

/// Primal log-det barrier method. A phase-one problem (all blocks shifted by
/// s I, minimize s) finds a strictly feasible start from `start`; the Newton
/// systems are assembled sparse since each block touches few variables.
SdpResult solve_lmi_program(const LmiProgram& program, const Eigen::VectorXd& start,
                            const BarrierOptions& options = {});

/// Smallest eigenvalue of F_j(y) over all blocks.
double min_block_eigenvalue(const LmiProgram& program, const Eigen::VectorXd& y);

}  // namespace ncsched
