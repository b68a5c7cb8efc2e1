#include "ncsched/lp.hpp"

#include <limits>
#include <vector>

#include "ncsched/errors.hpp"

namespace ncsched {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Tableau rows 0..m-1 hold constraints [coefficients | rhs]; row m is the
// reduced-cost row, whose last entry is minus the current objective.
class Tableau {
 public:
  Tableau(MatrixXd t, std::vector<Index> basis, double tol)
      : t_(std::move(t)), basis_(std::move(basis)), tol_(tol) {}

  Index rows() const { return t_.rows() - 1; }
  Index cols() const { return t_.cols() - 1; }
  MatrixXd& data() { return t_; }
  std::vector<Index>& basis() { return basis_; }

  void pivot(Index row, Index col) {
    t_.row(row) /= t_(row, col);
    for (Index r = 0; r < t_.rows(); ++r) {
      if (r != row && t_(r, col) != 0) t_.row(r) -= t_(r, col) * t_.row(row);
    }
    basis_[row] = col;
    ++pivots_;
  }

  // Optimizes over columns [0, allowed). Returns false when unbounded.
  bool optimize(Index allowed) {
    const Index m = rows();
    for (;;) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        if (t_(m, j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m; ++r) {
        const double a = t_(r, enter);
        if (a > tol_) {
          const double ratio = t_(r, cols()) / a;
          if (ratio < best - tol_ || (ratio <= best + tol_ && leave >= 0 && basis_[r] < basis_[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void drop_row(Index r) {
    const Index last = t_.rows() - 1;
    MatrixXd next(t_.rows() - 1, t_.cols());
    next << t_.topRows(r), t_.middleRows(r + 1, last - r);
    t_ = std::move(next);
    basis_.erase(basis_.begin() + r);
  }

  int pivots() const { return pivots_; }

 private:
  MatrixXd t_;
  std::vector<Index> basis_;
  double tol_;
  int pivots_ = 0;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const Index n = lp.cost.size();
  const Index n_eq = lp.eq.rows();
  const Index n_le = lp.le.rows();
  if ((n_eq > 0 && lp.eq.cols() != n) || (n_le > 0 && lp.le.cols() != n) ||
      lp.eq_rhs.size() != n_eq || lp.le_rhs.size() != n_le) {
    throw InvalidArgument("solve_lp: inconsistent dimensions");
  }

  // Columns: x (n) | slacks (n_le) | artificials (m) | rhs
  const Index m = n_eq + n_le;
  const Index n_struct = n + n_le;
  MatrixXd t = MatrixXd::Zero(m + 1, n_struct + m + 1);
  for (Index r = 0; r < n_eq; ++r) {
    t.row(r).head(n) = lp.eq.row(r);
    t(r, n_struct + m) = lp.eq_rhs(r);
  }
  for (Index r = 0; r < n_le; ++r) {
    t.row(n_eq + r).head(n) = lp.le.row(r);
    t(n_eq + r, n + r) = 1;
    t(n_eq + r, n_struct + m) = lp.le_rhs(r);
  }
  for (Index r = 0; r < m; ++r) {
    if (t(r, n_struct + m) < 0) t.row(r) *= -1;
    t(r, n_struct + r) = 1;
  }
  std::vector<Index> basis(m);
  for (Index r = 0; r < m; ++r) basis[r] = n_struct + r;

  // Phase one: minimize the sum of artificials.
  for (Index r = 0; r < m; ++r) t.row(m) -= t.row(r);
  for (Index r = 0; r < m; ++r) t(m, n_struct + r) = 0;

  Tableau tab(std::move(t), std::move(basis), tol);
  tab.optimize(n_struct + m);

  LpResult result;
  const double infeasibility = -tab.data()(tab.rows(), tab.cols());
  if (infeasibility > tol * (1 + lp.eq_rhs.cwiseAbs().sum() + lp.le_rhs.cwiseAbs().sum())) {
    result.status = LpStatus::Infeasible;
    result.pivots = tab.pivots();
    return result;
  }

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are linear combinations of the others.
  for (Index r = tab.rows() - 1; r >= 0; --r) {
    if (tab.basis()[r] < n_struct) continue;
    Index col = -1;
    for (Index j = 0; j < n_struct; ++j) {
      if (std::abs(tab.data()(r, j)) > tol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(r, col);
    } else {
      tab.drop_row(r);
    }
  }

  // Phase two on the structural columns.
  MatrixXd& d = tab.data();
  const Index rows = tab.rows();
  d.row(rows).setZero();
  d.block(rows, 0, 1, n) = lp.cost.transpose();
  for (Index r = 0; r < rows; ++r) {
    const Index b = tab.basis()[r];
    if (b < n && lp.cost(b) != 0) d.row(rows) -= lp.cost(b) * d.row(r);
  }
  if (!tab.optimize(n_struct)) {
    result.status = LpStatus::Unbounded;
    result.pivots = tab.pivots();
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x = VectorXd::Zero(n);
  for (Index r = 0; r < rows; ++r) {
    const Index b = tab.basis()[r];
    if (b < n) result.x(b) = std::max(0.0, d(r, tab.cols()));
  }
  result.objective = lp.cost.dot(result.x);
  result.pivots = tab.pivots();
  return result;
}

}  // namespace ncsched
