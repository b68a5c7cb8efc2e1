#include "ncsched/sdp.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/SparseCholesky>

#include "ncsched/errors.hpp"

namespace ncsched {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd LmiBlock::evaluate(const VectorXd& y) const {
  MatrixXd f = constant;
  for (const auto& [k, g] : terms) f.noalias() += y(k) * g;
  return f;
}

double min_block_eigenvalue(const LmiProgram& program, const VectorXd& y) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& b : program.blocks) {
    const MatrixXd f = b.evaluate(y);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es((f + f.transpose()) / 2, Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

namespace {

using Factors = std::vector<Eigen::LLT<MatrixXd>>;

// Cholesky factors of every block; false if any block is not positive definite.
bool factor_all(const LmiProgram& p, const VectorXd& y, Factors& out) {
  out.clear();
  out.reserve(p.blocks.size());
  for (const auto& b : p.blocks) {
    out.emplace_back(b.evaluate(y));
    if (out.back().info() != Eigen::Success) return false;
  }
  return true;
}

double log_det_sum(const Factors& f) {
  double s = 0;
  for (const auto& llt : f) s += 2 * llt.matrixLLT().diagonal().array().log().sum();
  return s;
}

struct BarrierState {
  VectorXd y;
  int steps = 0;
  bool stopped = false;
  bool infeasible = false;
  bool converged = false;
  std::string message;
};

class BarrierSolver {
 public:
  BarrierSolver(const LmiProgram& program, const BarrierOptions& options)
      : p_(program), opt_(options) {
    for (const auto& b : p_.blocks) barrier_dim_ += b.size();
  }

  // Minimizes c'y over the interior. `stop` ends the run early after any
  // Newton step; `infeasible` is asked after each centering with the current
  // objective and the duality-gap bound.
  BarrierState run(VectorXd y, const std::function<bool(const VectorXd&)>& stop,
                   const std::function<bool(double, double)>& infeasible) const {
    BarrierState st;
    Factors factors;
    if (!factor_all(p_, y, factors)) {
      st.message = "starting point is not strictly feasible";
      st.y = std::move(y);
      return st;
    }
    double t = barrier_dim_ / (1 + std::abs(p_.objective.dot(y)));
    for (int outer = 0; outer < opt_.max_outer; ++outer) {
      if (!center(y, t, factors, st, stop)) {
        st.y = std::move(y);
        return st;
      }
      if (st.stopped) {
        st.y = std::move(y);
        return st;
      }
      const double obj = p_.objective.dot(y);
      const double gap = barrier_dim_ / t;
      if (infeasible && infeasible(obj, gap)) {
        st.infeasible = true;
        st.y = std::move(y);
        return st;
      }
      if (gap <= opt_.gap_tol * (1 + std::abs(obj))) {
        st.converged = true;
        st.y = std::move(y);
        return st;
      }
      t *= opt_.growth;
    }
    st.message = "barrier iteration limit reached";
    st.y = std::move(y);
    return st;
  }

 private:
  // Damped Newton on t c'y - sum log det F_j(y). Returns false on failure.
  bool center(VectorXd& y, double t, Factors& factors, BarrierState& st,
              const std::function<bool(const VectorXd&)>& stop) const {
    const int n = p_.variables;
    for (int it = 0; it < opt_.max_newton_per_center; ++it) {
      VectorXd grad = t * p_.objective;
      std::vector<Eigen::Triplet<double>> triplets;
      std::vector<MatrixXd> scaled;
      for (std::size_t j = 0; j < p_.blocks.size(); ++j) {
        const auto& block = p_.blocks[j];
        const auto lower = factors[j].matrixL();
        scaled.clear();
        for (const auto& [k, g] : block.terms) {
          MatrixXd half = lower.solve(g);
          MatrixXd w = lower.solve(half.transpose());
          grad(k) -= w.trace();
          scaled.push_back(std::move(w));
        }
        for (std::size_t a = 0; a < block.terms.size(); ++a) {
          for (std::size_t b = 0; b <= a; ++b) {
            const double h = (scaled[a].array() * scaled[b].array()).sum();
            const int ka = block.terms[a].first;
            const int kb = block.terms[b].first;
            triplets.emplace_back(ka, kb, h);
            if (ka != kb) triplets.emplace_back(kb, ka, h);
          }
        }
      }
      Eigen::SparseMatrix<double> hess(n, n);
      hess.setFromTriplets(triplets.begin(), triplets.end());
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(hess);
      if (solver.info() != Eigen::Success) {
        st.message = "Newton system factorization failed";
        return false;
      }
      const VectorXd step = -solver.solve(grad);
      const double decrement = -grad.dot(step);
      if (!std::isfinite(decrement)) {
        st.message = "non-finite Newton step";
        return false;
      }
      if (decrement / 2 <= opt_.newton_tol) return true;

      const double f0 = t * p_.objective.dot(y) - log_det_sum(factors);
      double alpha = 1;
      Factors trial;
      for (;;) {
        const VectorXd candidate = y + alpha * step;
        if (factor_all(p_, candidate, trial)) {
          const double f1 = t * p_.objective.dot(candidate) - log_det_sum(trial);
          if (f1 <= f0 - 0.25 * alpha * decrement) {
            y = candidate;
            factors.swap(trial);
            break;
          }
        }
        alpha *= 0.5;
        if (alpha < 1e-14) {
          // round-off floor: accept the current point as centered
          return true;
        }
      }
      ++st.steps;
      if (stop && stop(y)) {
        st.stopped = true;
        return true;
      }
    }
    return true;
  }

  const LmiProgram& p_;
  BarrierOptions opt_;
  double barrier_dim_ = 0;
};

}  // namespace

SdpResult solve_lmi_program(const LmiProgram& program, const VectorXd& start,
                            const BarrierOptions& options) {
  if (program.objective.size() != program.variables || start.size() != program.variables) {
    throw InvalidArgument("solve_lmi_program: dimension mismatch");
  }
  SdpResult result;
  VectorXd y = start;

  // Phase one: F_j(y) + s I >= 0, minimize s, stop as soon as s < 0.
  if (min_block_eigenvalue(program, y) <= 0) {
    LmiProgram shifted;
    shifted.variables = program.variables + 1;
    shifted.objective = VectorXd::Zero(shifted.variables);
    shifted.objective(program.variables) = 1;
    shifted.blocks = program.blocks;
    for (auto& b : shifted.blocks) {
      b.terms.emplace_back(program.variables, MatrixXd::Identity(b.size(), b.size()));
    }
    VectorXd z(shifted.variables);
    z.head(program.variables) = y;
    z(program.variables) = std::max(0.0, -min_block_eigenvalue(program, y)) + 1;

    const int s_index = program.variables;
    BarrierOptions phase_one = options;
    const auto st = BarrierSolver(shifted, phase_one)
                        .run(
                            z, [&](const VectorXd& v) { return v(s_index) < 0; },
                            [&](double s, double gap) {
                              return s - gap > 0 || (s >= 0 && gap <= options.gap_tol * (1 + std::abs(s)));
                            });
    result.newton_steps += st.steps;
    if (!st.stopped) {
      result.status = st.infeasible || st.converged ? SdpStatus::Infeasible : SdpStatus::Failed;
      result.y = st.y.head(program.variables);
      result.min_slack = min_block_eigenvalue(program, result.y);
      result.message = st.infeasible || st.converged
                           ? "no strictly feasible point (phase-one optimum s >= 0)"
                           : "phase one failed: " + st.message;
      return result;
    }
    y = st.y.head(program.variables);
  }

  const auto st = BarrierSolver(program, options).run(y, nullptr, nullptr);
  result.newton_steps += st.steps;
  result.y = st.y;
  result.objective = program.objective.dot(st.y);
  result.min_slack = min_block_eigenvalue(program, st.y);
  if (st.converged) {
    result.status = SdpStatus::Optimal;
  } else {
    result.status = SdpStatus::Failed;
    result.message = st.message;
  }
  return result;
}

}  // namespace ncsched
