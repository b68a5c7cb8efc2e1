#pragma once

#include "ncsched/model.hpp"

namespace ncsched {

/// Coefficients that turn the Lyapunov-Metzler conditions into a pair of
/// LMIs per loop. pi is the M x M left-stochastic matrix over modes (columns
/// sum to one); m and p are its per-loop marginals:
///   sum_{j : i in S_j} pi(j, k) = m_i  if i in S_k,  p_i otherwise.
struct MetzlerParams {
  double alpha = 0;
  VectorXd m;
  VectorXd p;
  MatrixXd pi;
};

/// m_i = min(1, alpha c / rho_i^2), rho_i the largest spectral radius among
/// the lumped modes that serve loop i. c = 1 for q = 1; for q > 1,
/// c = min_j rho_j^2 so the grid alpha in [0, 1] reaches m = 1 (the Schur
/// bound then sits on the diagonal of pi, which lp_pi enforces).
VectorXd heuristic_m(const LumpedSystem& lumped, double alpha);

/// q = 1: p = (11' - I)^{-1} (1 - m). Throws InfeasibleHeuristic if some p_i
/// leaves [0, 1].
VectorXd closed_form_p(const VectorXd& m);

/// q = 1 matrix with m on the diagonal and p_i along the rest of row i.
MatrixXd closed_form_pi(const VectorXd& m, const VectorXd& p);

struct PiSolution {
  MatrixXd pi;
  VectorXd p;
};

/// Trace-minimizing left-stochastic pi subject to pi(k, k) <= rho(A_k)^{-2}
/// and the marginal conditions above, p free.
///
/// Summing the marginal conditions of a column over all loops gives
///   sum_{i in S_k} m_i + sum_{i not in S_k} p_i = q   for every k,
/// which for 0 < q < N pins p_i = m_i + (q - sum m) / (N - q). With p fixed
/// the program separates into one small LP per column.
PiSolution lp_pi(const ModeSet& modes, const LumpedSystem& lumped, const VectorXd& m);

/// The same program solved as one LP with p as explicit variables. Only
/// practical for small N; kept as a cross-check of lp_pi.
PiSolution lp_pi_monolithic(const ModeSet& modes, const LumpedSystem& lumped, const VectorXd& m);

/// Any left-stochastic pi with the given marginals (no Schur bound, no
/// objective). Used to rebuild a certificate from stored m and p.
MatrixXd compatible_pi(const ModeSet& modes, const VectorXd& m, const VectorXd& p);

/// heuristic_m followed by closed_form_p (q = 1) or lp_pi (q > 1).
MetzlerParams metzler_params(const LumpedSystem& lumped, double alpha);

/// max_j |sum_i pi(i, j) - 1| combined with the most negative entry.
double stochastic_residual(const MatrixXd& pi);

/// Largest violation of the marginal conditions over all (loop, column) pairs.
double marginal_residual(const ModeSet& modes, const MatrixXd& pi, const VectorXd& m,
                         const VectorXd& p);

}  // namespace ncsched
