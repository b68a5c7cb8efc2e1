#pragma once

#include <string>
#include <vector>

#include "ncsched/metzler.hpp"
#include "ncsched/model.hpp"
#include "ncsched/sdp.hpp"

namespace ncsched {

enum class Structure {
  /// P0 and P1 free; priorities need [x; xhat], i.e. acknowledgments.
  FullState,
  /// P1 and P0 share their xhat row and column blocks, so priorities depend
  /// on the plant state alone.
  PlantStateOnly,
};

const char* to_string(Structure s);
Structure structure_from_string(const std::string& s);

enum class ConstraintKind {
  ClosedBound,    // P1 <= (rho - eps) I
  OpenBound,      // P0 <= (rho - eps) I
  ClosedDecrease, // A1'(m P1 + (1-m) P0)A1 - P1 + Q <= -eps I
  OpenDecrease,   // A0'(p P1 + (1-p) P0)A0 - P0 + Q <= -eps I
  ClosedPositive, // P1 >= eps I
  OpenPositive,   // P0 >= eps I
  RhoCeiling,     // rho <= rho_max
};

const char* to_string(ConstraintKind k);

/// Symmetric matrix written as sum_k y_k E_k over a fixed set of variables.
struct SymmetricParam {
  int dimension = 0;
  std::vector<std::pair<int, MatrixXd>> basis;

  MatrixXd evaluate(const VectorXd& y) const;
};

struct SdpProblem {
  LmiProgram program;
  std::vector<ConstraintKind> kinds;  // one per program block
  std::vector<int> block_loop;        // loop of each block, -1 for global blocks
  std::vector<SymmetricParam> closed; // P1 per loop
  std::vector<SymmetricParam> open;   // P0 per loop
  int rho_index = 0;
  double eps = 0;
  double rho_max = 0;
  Structure structure = Structure::FullState;

  /// Counters of the scheduler LMIs proper (bounds and decrease conditions).
  int lmi_count() const;
  std::vector<int> lmi_sizes() const;
  int variable_count() const { return program.variables; }
};

/// Builds the program min rho subject to, for every loop i,
///   P1 <= (rho - eps) I,  P0 <= (rho - eps) I,
///   A1'(m_i P1 + (1 - m_i) P0) A1 - P1 + Q <= -eps I,
///   A0'(p_i P1 + (1 - p_i) P0) A0 - P0 + Q <= -eps I,
///   P1, P0 >= eps I,
/// with rho <= rho_max closing the feasible set.
SdpProblem assemble_sdp(const std::vector<AugmentedNcs>& loops, const MetzlerParams& params,
                        double eps, Structure structure, double rho_max = 0);

/// Default strictness margin: 1e-6 (1 + max_i ||Q_i||_2).
double default_eps(const std::vector<AugmentedNcs>& loops);

/// Default line-search grid {0.05, 0.10, ..., 1.00}.
std::vector<double> default_alpha_grid();

struct LoopCertificate {
  MatrixXd closed;  // P1
  MatrixXd open;    // P0
};

struct PriorityDesign {
  int loop_count = 0;
  int capacity = 0;
  Structure structure = Structure::FullState;
  double alpha = 0;
  double rho = 0;
  double eps = 0;
  VectorXd m;
  VectorXd p;
  std::vector<LoopCertificate> certificates;
};

struct DesignOptions {
  std::vector<double> alpha_grid = default_alpha_grid();
  /// Non-positive selects default_eps.
  double eps = 0;
  Structure structure = Structure::FullState;
  BarrierOptions barrier;
  /// Solve the grid points on separate threads.
  bool parallel = true;
};

struct AlphaAttempt {
  double alpha = 0;
  bool feasible = false;
  double rho = 0;
  std::string failure;  // "heuristic: ..." or "sdp: ..."
};

struct DesignOutcome {
  PriorityDesign design;
  std::vector<AlphaAttempt> attempts;
  SdpProblem problem;  // program of the selected alpha
};

/// Line search over alpha: for each grid value build m (and p, pi), solve the
/// SDP, re-check the certificate, and keep the smallest rho (ties to the
/// smaller alpha). Throws InfeasibleDesign listing every attempt on failure.
DesignOutcome solve_design(const LumpedSystem& lumped, const DesignOptions& options = {});

/// Single grid point. Returns the attempt; fills `out` on success.
AlphaAttempt solve_design_at(const LumpedSystem& lumped, double alpha, double eps,
                             Structure structure, const BarrierOptions& barrier,
                             DesignOutcome* out);

struct ResidualEntry {
  ConstraintKind kind;
  int loop = -1;
  double max_eigenvalue = 0;
};

struct CertificateReport {
  std::vector<ResidualEntry> lmis;  // 4N scheduler LMIs plus 2N positivity checks
  double worst_lmi = 0;
  bool lumped_checked = false;
  std::vector<double> lumped_max_eigenvalues;  // one per mode
  double worst_lumped = 0;
  double stochastic_residual = 0;
  double marginal_residual = 0;

  bool ok() const { return worst_lmi < 0 && (!lumped_checked || worst_lumped < 0); }
};

/// Recomputes every LMI residual from the stored matrices. For loop counts up
/// to `lumped_limit` it also rebuilds the lumped Lyapunov matrices and a
/// left-stochastic pi with the stored marginals and checks the full coupled
/// inequality for every mode by dense eigenvalues.
CertificateReport verify_certificate(const PriorityDesign& design, const LumpedSystem& lumped,
                                     int lumped_limit = 5);

/// Lumped Lyapunov matrix of mode s: diag_i P^i_{delta(i, s)}.
MatrixXd lumped_lyapunov(const PriorityDesign& design, const LumpedSystem& lumped, int mode);

/// Delta_i = P1_i - P0_i.
std::vector<MatrixXd> priority_matrices(const PriorityDesign& design);

struct PerformanceBound {
  double loose = 0;  // rho * sum ||x_i0||^2
  double tight = 0;  // sum x_i0' P^i_{delta(i, sigma(0))} x_i0
  int initial_mode = 0;
};

/// Bounds on the joint cost from augmented initial states [x0; xhat0].
PerformanceBound performance_bound(const PriorityDesign& design,
                                   const std::vector<VectorXd>& initial_states,
                                   const ModeSet& modes);

}  // namespace ncsched
