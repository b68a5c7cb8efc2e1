#include "ncsched/metzler.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ncsched/lp.hpp"

namespace ncsched {

namespace {

constexpr double kRangeTol = 1e-12;

double inverse_square(double radius) {
  return radius > 0 ? 1.0 / (radius * radius) : std::numeric_limits<double>::infinity();
}

void require_unit_range(const VectorXd& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) >= -kRangeTol && v(i) <= 1 + kRangeTol)) {
      throw InfeasibleHeuristic(std::string(name) + "[" + std::to_string(i) +
                                "] = " + std::to_string(v(i)) + " lies outside [0, 1]");
    }
  }
}

// Column k of pi, given the target marginal of every loop.
LinearProgram column_program(const ModeSet& modes, int column, const VectorXd& marginal,
                             double diagonal_bound, bool with_bound) {
  const int count = modes.size();
  LinearProgram lp;
  lp.cost = VectorXd::Zero(count);
  lp.cost(column) = 1;
  lp.eq = MatrixXd::Zero(modes.loops() + 1, count);
  lp.eq_rhs = VectorXd::Zero(modes.loops() + 1);
  for (int j = 0; j < count; ++j) {
    for (int i : modes.subset(j)) lp.eq(i, j) = 1;
    lp.eq(modes.loops(), j) = 1;
  }
  lp.eq_rhs.head(modes.loops()) = marginal;
  lp.eq_rhs(modes.loops()) = 1;
  if (with_bound && std::isfinite(diagonal_bound) && diagonal_bound < 1) {
    lp.le = MatrixXd::Zero(1, count);
    lp.le(0, column) = 1;
    lp.le_rhs = VectorXd::Constant(1, diagonal_bound);
  } else {
    lp.le = MatrixXd::Zero(0, count);
    lp.le_rhs = VectorXd::Zero(0);
  }
  return lp;
}

VectorXd column_marginal(const ModeSet& modes, int column, const VectorXd& m, const VectorXd& p) {
  VectorXd r = p;
  for (int i : modes.subset(column)) r(i) = m(i);
  return r;
}

VectorXd forced_p(const ModeSet& modes, const VectorXd& m) {
  const int n = modes.loops();
  const int q = modes.capacity();
  return (m.array() + (q - m.sum()) / double(n - q)).matrix();
}

void require_m(const ModeSet& modes, const VectorXd& m) {
  if (m.size() != modes.loops()) throw InvalidArgument("metzler: m has wrong length");
  require_unit_range(m, "m");
}

}  // namespace

VectorXd heuristic_m(const LumpedSystem& lumped, double alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw InvalidArgument("heuristic_m: alpha must lie in [0, 1]");
  const ModeSet& modes = lumped.modes();
  VectorXd worst = VectorXd::Zero(modes.loops());
  for (int s = 0; s < modes.size(); ++s) {
    const double r = lumped.mode_spectral_radius(s);
    for (int i : modes.subset(s)) worst(i) = std::max(worst(i), r);
  }
  // q > 1: m_i is not a diagonal entry of pi, so only the ratios matter and
  // the scale is set by the least demanding loop
  const double scale = modes.capacity() == 1 ? 1.0 : worst.minCoeff() * worst.minCoeff();
  VectorXd m(modes.loops());
  for (int i = 0; i < m.size(); ++i) m(i) = std::min(1.0, alpha * scale * inverse_square(worst(i)));
  return m;
}

VectorXd closed_form_p(const VectorXd& m) {
  const Eigen::Index n = m.size();
  if (n < 2) throw InvalidArgument("closed_form_p: need at least two loops");
  // (11' - I) p = 1 - m  =>  sum(p) - p_i = 1 - m_i
  const VectorXd b = VectorXd::Ones(n) - m;
  const double total = b.sum() / double(n - 1);
  const VectorXd p = (total - b.array()).matrix();
  require_unit_range(p, "p");
  return p;
}

MatrixXd closed_form_pi(const VectorXd& m, const VectorXd& p) {
  MatrixXd pi = p.replicate(1, m.size());
  pi.diagonal() = m;
  return pi;
}

PiSolution lp_pi(const ModeSet& modes, const LumpedSystem& lumped, const VectorXd& m) {
  require_m(modes, m);
  PiSolution out;
  out.p = forced_p(modes, m);
  require_unit_range(out.p, "p");

  out.pi = MatrixXd::Zero(modes.size(), modes.size());
  for (int k = 0; k < modes.size(); ++k) {
    const double bound = inverse_square(lumped.mode_spectral_radius(k));
    const VectorXd marginal = column_marginal(modes, k, m, out.p);
    const auto result = solve_lp(column_program(modes, k, marginal, bound, true));
    if (result.status != LpStatus::Optimal) {
      const bool without_bound =
          solve_lp(column_program(modes, k, marginal, bound, false)).status == LpStatus::Optimal;
      throw InfeasibleHeuristic("lp_pi: column " + std::to_string(k) + " infeasible (" +
                                (without_bound ? "diagonal Schur bound" : "marginal constraints") +
                                ")");
    }
    out.pi.col(k) = result.x;
  }
  return out;
}

PiSolution lp_pi_monolithic(const ModeSet& modes, const LumpedSystem& lumped, const VectorXd& m) {
  require_m(modes, m);
  const int count = modes.size();
  const int n = modes.loops();
  const int vars = count * count + n;  // pi column-major, then p
  LinearProgram lp;
  lp.cost = VectorXd::Zero(vars);
  for (int k = 0; k < count; ++k) lp.cost(k * count + k) = 1;

  const int rows = count + count * n;
  lp.eq = MatrixXd::Zero(rows, vars);
  lp.eq_rhs = VectorXd::Zero(rows);
  for (int k = 0; k < count; ++k) {
    for (int j = 0; j < count; ++j) lp.eq(k, k * count + j) = 1;
    lp.eq_rhs(k) = 1;
    for (int i = 0; i < n; ++i) {
      const int row = count + k * n + i;
      for (int j = 0; j < count; ++j) {
        if (modes.contains(j, i)) lp.eq(row, k * count + j) = 1;
      }
      if (modes.contains(k, i)) {
        lp.eq_rhs(row) = m(i);
      } else {
        lp.eq(row, count * count + i) = -1;
      }
    }
  }
  lp.le = MatrixXd::Zero(count + n, vars);
  lp.le_rhs = VectorXd::Zero(count + n);
  for (int k = 0; k < count; ++k) {
    lp.le(k, k * count + k) = 1;
    lp.le_rhs(k) = std::min(1.0, inverse_square(lumped.mode_spectral_radius(k)));
  }
  for (int i = 0; i < n; ++i) {
    lp.le(count + i, count * count + i) = 1;
    lp.le_rhs(count + i) = 1;
  }
  const auto result = solve_lp(lp);
  if (result.status != LpStatus::Optimal) throw InfeasibleHeuristic("lp_pi_monolithic: infeasible");
  PiSolution out;
  out.pi = Eigen::Map<const MatrixXd>(result.x.data(), count, count);
  out.p = result.x.tail(n);
  return out;
}

MatrixXd compatible_pi(const ModeSet& modes, const VectorXd& m, const VectorXd& p) {
  MatrixXd pi = MatrixXd::Zero(modes.size(), modes.size());
  for (int k = 0; k < modes.size(); ++k) {
    const auto result = solve_lp(column_program(modes, k, column_marginal(modes, k, m, p),
                                                std::numeric_limits<double>::infinity(), false));
    if (result.status != LpStatus::Optimal) {
      throw InfeasibleHeuristic("compatible_pi: no left-stochastic matrix with these marginals");
    }
    pi.col(k) = result.x;
  }
  return pi;
}

MetzlerParams metzler_params(const LumpedSystem& lumped, double alpha) {
  MetzlerParams out;
  out.alpha = alpha;
  out.m = heuristic_m(lumped, alpha);
  if (lumped.modes().capacity() == 1) {
    out.p = closed_form_p(out.m);
    out.pi = closed_form_pi(out.m, out.p);
  } else {
    auto sol = lp_pi(lumped.modes(), lumped, out.m);
    out.p = std::move(sol.p);
    out.pi = std::move(sol.pi);
  }
  return out;
}

double stochastic_residual(const MatrixXd& pi) {
  const double sums = (pi.colwise().sum().array() - 1).abs().maxCoeff();
  const double negative = std::max(0.0, -pi.minCoeff());
  return std::max(sums, negative);
}

double marginal_residual(const ModeSet& modes, const MatrixXd& pi, const VectorXd& m,
                         const VectorXd& p) {
  double worst = 0;
  for (int k = 0; k < modes.size(); ++k) {
    for (int i = 0; i < modes.loops(); ++i) {
      double sum = 0;
      for (int j = 0; j < modes.size(); ++j) {
        if (modes.contains(j, i)) sum += pi(j, k);
      }
      const double target = modes.contains(k, i) ? m(i) : p(i);
      worst = std::max(worst, std::abs(sum - target));
    }
  }
  return worst;
}

}  // namespace ncsched
