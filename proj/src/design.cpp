#include "ncsched/design.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <limits>
#include <sstream>
#include <thread>

namespace ncsched {

const char* to_string(Structure s) {
  return s == Structure::FullState ? "full-state" : "plant-state-only";
}

Structure structure_from_string(const std::string& s) {
  if (s == "full-state") return Structure::FullState;
  if (s == "plant-state-only") return Structure::PlantStateOnly;
  throw InvalidArgument("unknown structure '" + s + "' (expected full-state or plant-state-only)");
}

const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::ClosedBound: return "P1 < rho I";
    case ConstraintKind::OpenBound: return "P0 < rho I";
    case ConstraintKind::ClosedDecrease: return "closed-loop decrease";
    case ConstraintKind::OpenDecrease: return "open-loop decrease";
    case ConstraintKind::ClosedPositive: return "P1 > 0";
    case ConstraintKind::OpenPositive: return "P0 > 0";
    case ConstraintKind::RhoCeiling: return "rho ceiling";
  }
  return "?";
}

MatrixXd SymmetricParam::evaluate(const VectorXd& y) const {
  MatrixXd out = MatrixXd::Zero(dimension, dimension);
  for (const auto& [k, e] : basis) out += y(k) * e;
  return out;
}

int SdpProblem::lmi_count() const {
  int count = 0;
  for (auto k : kinds) {
    if (k == ConstraintKind::ClosedBound || k == ConstraintKind::OpenBound ||
        k == ConstraintKind::ClosedDecrease || k == ConstraintKind::OpenDecrease) {
      ++count;
    }
  }
  return count;
}

std::vector<int> SdpProblem::lmi_sizes() const {
  std::vector<int> sizes;
  for (std::size_t j = 0; j < kinds.size(); ++j) {
    const auto k = kinds[j];
    if (k == ConstraintKind::ClosedBound || k == ConstraintKind::OpenBound ||
        k == ConstraintKind::ClosedDecrease || k == ConstraintKind::OpenDecrease) {
      sizes.push_back(program.blocks[j].size());
    }
  }
  return sizes;
}

namespace {

MatrixXd unit_symmetric(int dim, int row, int col) {
  MatrixXd e = MatrixXd::Zero(dim, dim);
  e(row, col) = 1;
  e(col, row) = 1;
  return e;
}

// Adds the symmetric entries of the window [offset, offset + size) x
// [offset2, offset2 + size2) as fresh variables to every listed parameter.
void add_symmetric_block(int dim, int offset, int size, int& next,
                         std::initializer_list<SymmetricParam*> targets) {
  for (int r = 0; r < size; ++r) {
    for (int c = r; c < size; ++c) {
      const MatrixXd e = unit_symmetric(dim, offset + r, offset + c);
      for (auto* t : targets) t->basis.emplace_back(next, e);
      ++next;
    }
  }
}

void add_cross_block(int dim, int row_offset, int col_offset, int size, int& next,
                     std::initializer_list<SymmetricParam*> targets) {
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const MatrixXd e = unit_symmetric(dim, row_offset + r, col_offset + c);
      for (auto* t : targets) t->basis.emplace_back(next, e);
      ++next;
    }
  }
}

// Collects coefficient matrices per variable so each variable appears once.
class BlockBuilder {
 public:
  BlockBuilder(int dim, MatrixXd constant) : dim_(dim), constant_(std::move(constant)) {}

  template <typename F>
  void add(const SymmetricParam& param, F&& transform) {
    for (const auto& [k, e] : param.basis) {
      auto it = coeff_.find(k);
      if (it == coeff_.end()) it = coeff_.emplace(k, MatrixXd::Zero(dim_, dim_)).first;
      it->second += transform(e);
    }
  }

  void add_scalar(int k, const MatrixXd& coefficient) {
    auto it = coeff_.find(k);
    if (it == coeff_.end()) it = coeff_.emplace(k, MatrixXd::Zero(dim_, dim_)).first;
    it->second += coefficient;
  }

  LmiBlock build() const {
    LmiBlock b;
    b.constant = symmetrized(constant_);
    for (const auto& [k, c] : coeff_) {
      if (c.cwiseAbs().maxCoeff() != 0) b.terms.emplace_back(k, symmetrized(c));
    }
    return b;
  }

 private:
  int dim_;
  MatrixXd constant_;
  std::map<int, MatrixXd> coeff_;
};

double cost_scale(const std::vector<AugmentedNcs>& loops) {
  double s = 0;
  for (const auto& l : loops) s = std::max(s, max_sym_eigenvalue(l.cost, 1e-9));
  return s;
}

}  // namespace

double default_eps(const std::vector<AugmentedNcs>& loops) {
  return 1e-6 * (1 + cost_scale(loops));
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.05 * k);
  return grid;
}

SdpProblem assemble_sdp(const std::vector<AugmentedNcs>& loops, const MetzlerParams& params,
                        double eps, Structure structure, double rho_max) {
  if (!(eps > 0)) throw InvalidArgument("assemble_sdp: eps must be positive");
  const int count = static_cast<int>(loops.size());
  if (params.m.size() != count || params.p.size() != count) {
    throw InvalidArgument("assemble_sdp: m and p must have one entry per loop");
  }
  SdpProblem prob;
  prob.eps = eps;
  prob.structure = structure;
  prob.rho_max = rho_max > 0 ? rho_max : 1e8 * (1 + cost_scale(loops));

  int next = 0;
  for (const auto& loop : loops) {
    const int d = loop.dimension();
    const int n = loop.plant_dim();
    SymmetricParam closed{d, {}};
    SymmetricParam open{d, {}};
    if (structure == Structure::FullState) {
      add_symmetric_block(d, 0, d, next, {&closed});
      add_symmetric_block(d, 0, d, next, {&open});
    } else {
      add_symmetric_block(d, 0, n, next, {&closed});       // X1
      add_symmetric_block(d, 0, n, next, {&open});         // X0
      add_cross_block(d, 0, n, n, next, {&closed, &open}); // Y
      add_symmetric_block(d, n, n, next, {&closed, &open}); // Z
    }
    prob.closed.push_back(std::move(closed));
    prob.open.push_back(std::move(open));
  }
  prob.rho_index = next++;
  prob.program.variables = next;
  prob.program.objective = VectorXd::Zero(next);
  prob.program.objective(prob.rho_index) = 1;

  auto push = [&](LmiBlock b, ConstraintKind kind, int loop) {
    prob.program.blocks.push_back(std::move(b));
    prob.kinds.push_back(kind);
    prob.block_loop.push_back(loop);
  };

  for (int i = 0; i < count; ++i) {
    const auto& loop = loops[i];
    const int d = loop.dimension();
    const MatrixXd I = MatrixXd::Identity(d, d);
    const MatrixXd& a1 = loop.closed;
    const MatrixXd& a0 = loop.open;
    const double m = params.m(i);
    const double p = params.p(i);

    for (auto [param, kind] : {std::pair{&prob.closed[i], ConstraintKind::ClosedBound},
                               std::pair{&prob.open[i], ConstraintKind::OpenBound}}) {
      BlockBuilder b(d, -eps * I);
      b.add_scalar(prob.rho_index, I);
      b.add(*param, [](const MatrixXd& e) { return MatrixXd(-e); });
      push(b.build(), kind, i);
    }
    {
      BlockBuilder b(d, -loop.cost - eps * I);
      b.add(prob.closed[i], [&](const MatrixXd& e) { return MatrixXd(e - m * a1.transpose() * e * a1); });
      b.add(prob.open[i], [&](const MatrixXd& e) { return MatrixXd(-(1 - m) * a1.transpose() * e * a1); });
      push(b.build(), ConstraintKind::ClosedDecrease, i);
    }
    {
      BlockBuilder b(d, -loop.cost - eps * I);
      b.add(prob.closed[i], [&](const MatrixXd& e) { return MatrixXd(-p * a0.transpose() * e * a0); });
      b.add(prob.open[i], [&](const MatrixXd& e) { return MatrixXd(e - (1 - p) * a0.transpose() * e * a0); });
      push(b.build(), ConstraintKind::OpenDecrease, i);
    }
    for (auto [param, kind] : {std::pair{&prob.closed[i], ConstraintKind::ClosedPositive},
                               std::pair{&prob.open[i], ConstraintKind::OpenPositive}}) {
      BlockBuilder b(d, -eps * I);
      b.add(*param, [](const MatrixXd& e) { return e; });
      push(b.build(), kind, i);
    }
  }
  BlockBuilder ceiling(1, MatrixXd::Constant(1, 1, prob.rho_max));
  ceiling.add_scalar(prob.rho_index, MatrixXd::Constant(1, 1, -1));
  push(ceiling.build(), ConstraintKind::RhoCeiling, -1);
  return prob;
}

namespace {

VectorXd starting_point(const SdpProblem& prob) {
  VectorXd y = VectorXd::Zero(prob.program.variables);
  // P0 = P1 = I, rho = 2: bounds and positivity hold, decrease may not
  for (const auto* params : {&prob.closed, &prob.open}) {
    for (const auto& param : *params) {
      for (const auto& [k, e] : param.basis) {
        if (e.trace() != 0) y(k) = 1;
      }
    }
  }
  y(prob.rho_index) = 2;
  return y;
}

}  // namespace

AlphaAttempt solve_design_at(const LumpedSystem& lumped, double alpha, double eps,
                             Structure structure, const BarrierOptions& barrier,
                             DesignOutcome* out) {
  AlphaAttempt attempt;
  attempt.alpha = alpha;
  MetzlerParams params;
  try {
    params = metzler_params(lumped, alpha);
  } catch (const InfeasibleHeuristic& e) {
    attempt.failure = std::string("heuristic: ") + e.what();
    return attempt;
  }
  SdpProblem prob = assemble_sdp(lumped.loops(), params, eps, structure);
  const SdpResult sol = solve_lmi_program(prob.program, starting_point(prob), barrier);
  if (sol.status == SdpStatus::Infeasible) {
    attempt.failure = "sdp: infeasible";
    return attempt;
  }
  if (sol.min_slack <= 0) {
    attempt.failure = "sdp: " + (sol.message.empty() ? std::string("no interior solution") : sol.message);
    return attempt;
  }

  PriorityDesign design;
  design.loop_count = lumped.loop_count();
  design.capacity = lumped.modes().capacity();
  design.structure = structure;
  design.alpha = alpha;
  design.rho = sol.y(prob.rho_index);
  design.eps = eps;
  design.m = params.m;
  design.p = params.p;
  for (int i = 0; i < lumped.loop_count(); ++i) {
    design.certificates.push_back(
        {symmetrized(prob.closed[i].evaluate(sol.y)), symmetrized(prob.open[i].evaluate(sol.y))});
  }
  const auto report = verify_certificate(design, lumped, 0);
  if (!report.ok()) {
    attempt.failure = "sdp: certificate re-check failed (worst residual " +
                      std::to_string(report.worst_lmi) + ")";
    return attempt;
  }
  attempt.feasible = true;
  attempt.rho = design.rho;
  if (out) {
    out->design = std::move(design);
    out->problem = std::move(prob);
  }
  return attempt;
}

DesignOutcome solve_design(const LumpedSystem& lumped, const DesignOptions& options) {
  if (options.alpha_grid.empty()) throw InvalidArgument("solve_design: empty alpha grid");
  std::vector<double> grid = options.alpha_grid;
  std::sort(grid.begin(), grid.end());
  const double eps = options.eps > 0 ? options.eps : default_eps(lumped.loops());

  std::vector<DesignOutcome> outcomes(grid.size());
  std::vector<AlphaAttempt> attempts(grid.size());
  auto run = [&](std::size_t k) {
    attempts[k] = solve_design_at(lumped, grid[k], eps, options.structure, options.barrier, &outcomes[k]);
  };
  if (options.parallel && grid.size() > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t k = 0; k < grid.size(); ++k) jobs.push_back(std::async(std::launch::async, run, k));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t k = 0; k < grid.size(); ++k) run(k);
  }

  int best = -1;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (attempts[k].feasible && (best < 0 || attempts[k].rho < attempts[best].rho)) {
      best = static_cast<int>(k);
    }
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "no feasible alpha on the grid:";
    for (const auto& a : attempts) msg << "\n  alpha=" << a.alpha << ": " << a.failure;
    throw InfeasibleDesign(msg.str());
  }
  DesignOutcome out = std::move(outcomes[best]);
  out.attempts = std::move(attempts);
  return out;
}

namespace {

void require_compatible(const PriorityDesign& design, const LumpedSystem& lumped) {
  if (design.loop_count != lumped.loop_count() ||
      static_cast<int>(design.certificates.size()) != lumped.loop_count() ||
      design.capacity != lumped.modes().capacity() || design.m.size() != design.loop_count ||
      design.p.size() != design.loop_count) {
    throw InvalidArgument("design does not match the scenario (loop count or queue capacity)");
  }
  for (int i = 0; i < lumped.loop_count(); ++i) {
    const int d = lumped.loop(i).dimension();
    const auto& c = design.certificates[i];
    if (c.closed.rows() != d || c.closed.cols() != d || c.open.rows() != d || c.open.cols() != d) {
      throw InvalidArgument("design certificate of loop " + std::to_string(i) +
                            " has the wrong dimension");
    }
  }
}

}  // namespace

MatrixXd lumped_lyapunov(const PriorityDesign& design, const LumpedSystem& lumped, int mode) {
  MatrixXd out = MatrixXd::Zero(lumped.dimension(), lumped.dimension());
  for (int i = 0; i < lumped.loop_count(); ++i) {
    const int d = lumped.loop(i).dimension();
    const auto& c = design.certificates[i];
    out.block(lumped.offset(i), lumped.offset(i), d, d) =
        lumped.modes().contains(mode, i) ? c.closed : c.open;
  }
  return out;
}

CertificateReport verify_certificate(const PriorityDesign& design, const LumpedSystem& lumped,
                                     int lumped_limit) {
  require_compatible(design, lumped);
  CertificateReport report;
  report.worst_lmi = -std::numeric_limits<double>::infinity();
  auto record = [&](ConstraintKind kind, int loop, const MatrixXd& residual) {
    const double e = max_sym_eigenvalue(symmetrized(residual), 1e-9);
    report.lmis.push_back({kind, loop, e});
    report.worst_lmi = std::max(report.worst_lmi, e);
  };
  for (int i = 0; i < lumped.loop_count(); ++i) {
    const auto& loop = lumped.loop(i);
    const auto& c = design.certificates[i];
    const int d = loop.dimension();
    const MatrixXd I = MatrixXd::Identity(d, d);
    const double m = design.m(i);
    const double p = design.p(i);
    record(ConstraintKind::ClosedBound, i, c.closed - design.rho * I);
    record(ConstraintKind::OpenBound, i, c.open - design.rho * I);
    record(ConstraintKind::ClosedDecrease, i,
           loop.closed.transpose() * (m * c.closed + (1 - m) * c.open) * loop.closed - c.closed + loop.cost);
    record(ConstraintKind::OpenDecrease, i,
           loop.open.transpose() * (p * c.closed + (1 - p) * c.open) * loop.open - c.open + loop.cost);
    record(ConstraintKind::ClosedPositive, i, -c.closed);
    record(ConstraintKind::OpenPositive, i, -c.open);
  }

  if (lumped.loop_count() <= lumped_limit) {
    const ModeSet& modes = lumped.modes();
    const MatrixXd pi = compatible_pi(modes, design.m, design.p);
    report.stochastic_residual = stochastic_residual(pi);
    report.marginal_residual = marginal_residual(modes, pi, design.m, design.p);
    std::vector<MatrixXd> lyap;
    for (int s = 0; s < modes.size(); ++s) lyap.push_back(lumped_lyapunov(design, lumped, s));
    const MatrixXd cost = lumped.cost_matrix();
    report.lumped_checked = true;
    report.worst_lumped = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < modes.size(); ++j) {
      MatrixXd mix = MatrixXd::Zero(lumped.dimension(), lumped.dimension());
      for (int s = 0; s < modes.size(); ++s) mix += pi(s, j) * lyap[s];
      const MatrixXd a = lumped.mode_matrix(j);
      const double e = max_sym_eigenvalue(symmetrized(a.transpose() * mix * a - lyap[j] + cost), 1e-9);
      report.lumped_max_eigenvalues.push_back(e);
      report.worst_lumped = std::max(report.worst_lumped, e);
    }
  }
  return report;
}

std::vector<MatrixXd> priority_matrices(const PriorityDesign& design) {
  std::vector<MatrixXd> out;
  for (const auto& c : design.certificates) out.push_back(c.closed - c.open);
  return out;
}

PerformanceBound performance_bound(const PriorityDesign& design,
                                   const std::vector<VectorXd>& initial_states,
                                   const ModeSet& modes) {
  if (static_cast<int>(initial_states.size()) != design.loop_count) {
    throw InvalidArgument("performance_bound: one initial state per loop required");
  }
  PerformanceBound out;
  std::vector<double> v(design.loop_count);
  for (int i = 0; i < design.loop_count; ++i) {
    const auto& x = initial_states[i];
    const auto& c = design.certificates[i];
    if (x.size() != c.closed.rows()) throw InvalidArgument("performance_bound: state dimension mismatch");
    out.loose += design.rho * x.squaredNorm();
    v[i] = x.dot((c.closed - c.open) * x);
  }
  out.initial_mode = select_mode(v, modes);
  for (int i = 0; i < design.loop_count; ++i) {
    const auto& x = initial_states[i];
    const auto& c = design.certificates[i];
    out.tight += x.dot((modes.contains(out.initial_mode, i) ? c.closed : c.open) * x);
  }
  return out;
}

}  // namespace ncsched
