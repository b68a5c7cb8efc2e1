// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "ncsched/design.hpp"
#include "ncsched/errors.hpp"
#include "ncsched/scenario.hpp"
#include "ncsched/sim.hpp"
#include "ncsched/sweep.hpp"

using namespace ncsched;

namespace {

// Reference curves for the ten-loop sweep, q = 1..10.
constexpr std::array<double, 10> kUtilization{0.489796, 0.657534, 0.742268, 0.793388, 0.827586,
                                              0.852071, 0.870466, 0.884793, 0.896266, 0.905660};
constexpr std::array<double, 10> kCost{0.4675, 0.4387, 0.4364, 0.4426, 0.4440,
                                       0.4559, 0.4657, 0.4767, 0.4852, 0.4932};

constexpr double kUtilizationTol = 1e-4;
constexpr double kCostRelTol = 0.20;
constexpr int kMinSweepSeeds = 50;
constexpr double kDecayRatio = 1e-6;
constexpr double kDecreaseRelTol = 1e-9;
constexpr int kInitialConditions = 100;
constexpr int kRandomDesignSteps = 2000;
constexpr double kRescaleBelow = 1e-100;
constexpr int kDecompositionStates = 1000;
constexpr int kMinPendulumSeeds = 20;
constexpr double kPriorityRelTol = 1e-12;
constexpr int kLumpedLimit = 4;

std::string scenario_path(const std::string& name) { return std::string(NCSCHED_SCENARIO_DIR) + "/" + name; }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (!pass) detail << "; ";
      pass = false;
      detail << why;
    }
  }
};

struct Designed {
  std::string label;
  EpisodeSetup setup;
  LumpedSystem lumped;
  PriorityDesign design;
  int steps = 0;  // noise-free horizon
};

DesignOptions serial(Structure s = Structure::FullState) {
  DesignOptions o;
  o.parallel = false;
  o.structure = s;
  return o;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Scenario designs at their own capacity plus every q < N of the sweep.
std::vector<Designed> scenario_designs() {
  std::vector<Designed> out;
  auto add = [&](const Scenario& sc, int q, const std::string& label) {
    EpisodeSetup setup = build_setup(sc, q);
    LumpedSystem lumped = build_lumped(setup, q);
    PriorityDesign d = solve_design(lumped, sc.design).design;
    const int steps = static_cast<int>(std::floor(sc.sim.horizon.count() / setup.period.count()));
    out.push_back({label, std::move(setup), std::move(lumped), std::move(d), steps});
  };
  const Scenario two = load_scenario(scenario_path("two_stable_loops.yaml"));
  add(two, two.link.queue_capacity, "two_stable_loops");
  const Scenario pend = load_scenario(scenario_path("six_pendulums.yaml"));
  add(pend, pend.link.queue_capacity, "six_pendulums");
  const Scenario ten = load_scenario(scenario_path("sweep_ten_loops.yaml"));
  for (int q = 1; q < ten.loop_count(); ++q) add(ten, q, "sweep_ten_loops q=" + std::to_string(q));
  return out;
}

/// Random two-state loops for every (N, q) with N <= 6, q in {1, 2, 3}, q < N.
std::vector<Designed> random_designs(std::vector<std::string>& skipped) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> scale(0.7, 1.2);
  std::vector<Designed> out;
  for (int n = 2; n <= 6; ++n) {
    for (int q = 1; q <= 3 && q < n; ++q) {
      std::vector<NcsModel> ms;
      for (int i = 0; i < n; ++i) ms.push_back(fixtures::random_loop(gen, 2, 1, scale(gen)));
      EpisodeSetup setup{ms, Seconds(1), 0};
      LumpedSystem lumped = build_lumped(setup, q);
      const std::string label = "random N=" + std::to_string(n) + " q=" + std::to_string(q);
      try {
        PriorityDesign d = solve_design(lumped, serial()).design;
        out.push_back({label, std::move(setup), std::move(lumped), std::move(d), kRandomDesignSteps});
      } catch (const InfeasibleDesign&) {
        skipped.push_back(label);
      }
    }
  }
  return out;
}

VectorXd eta_of(const LoopState& s) {
  VectorXd e(s.x.size() + s.xhat.size());
  e << s.x, s.xhat;
  return e;
}

/// min over modes of eta' P_s eta, with the q-subset minimum taken as the q
/// smallest per-loop differences.
double lyapunov(const PriorityDesign& d, const std::vector<LoopState>& states) {
  double base = 0;
  std::vector<double> diff;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const VectorXd e = eta_of(states[i]);
    const double v0 = e.dot(d.certificates[i].open * e);
    const double v1 = e.dot(d.certificates[i].closed * e);
    base += v0;
    diff.push_back(v1 - v0);
  }
  std::partial_sort(diff.begin(), diff.begin() + d.capacity, diff.end());
  return base + std::accumulate(diff.begin(), diff.begin() + d.capacity, 0.0);
}

Verdict criterion_utilization() {
  Verdict v;
  const Scenario ten = load_scenario(scenario_path("sweep_ten_loops.yaml"));
  double worst = 0;
  for (int q = 1; q <= 10; ++q) worst = std::max(worst, std::abs(build_setup(ten, q).utilization - kUtilization[q - 1]));
  v.require(worst <= kUtilizationTol, "utilization off by " + fmt(worst));
  v.detail << (v.pass ? "" : "; ") << "max |error| = " << fmt(worst);
  return v;
}

Verdict criterion_sweep() {
  Verdict v;
  const Scenario ten = load_scenario(scenario_path("sweep_ten_loops.yaml"));
  v.require(static_cast<int>(ten.sim.seeds.size()) >= kMinSweepSeeds, "fewer than 50 seeds configured");
  v.require(ten.sim.horizon.count() == 100, "horizon is not 100 s");
  const auto rows = run_qsweep(ten, 1, 10);
  std::vector<double> cost;
  double worst = 0;
  for (const auto& r : rows) {
    v.require(r.status == "ok" || r.status == "static", "q=" + std::to_string(r.capacity) + " " + r.status);
    cost.push_back(r.mean_cost);
    const double rel = std::abs(r.mean_cost - kCost[r.capacity - 1]) / kCost[r.capacity - 1];
    worst = std::max(worst, rel);
  }
  v.require(worst <= kCostRelTol, "relative cost error " + fmt(worst));
  const int argmin = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin()) + 1;
  const double best = cost[argmin - 1];
  v.require(argmin >= 2 && argmin <= 4, "argmin q=" + std::to_string(argmin));
  v.require(cost.front() > best && cost.back() > best, "endpoints not above the minimum");
  v.detail << (v.pass ? "" : "; ") << ten.sim.seeds.size() << " seeds, argmin q=" << argmin << ", max relative error " << fmt(worst) << ", costs";
  for (double c : cost) v.detail << ' ' << fmt(c);
  return v;
}

Verdict criterion_certificates(const std::vector<Designed>& designs) {
  Verdict v;
  int lumped = 0;
  double worst_margin = -1e300;
  for (const auto& d : designs) {
    const auto report = verify_certificate(d.design, d.lumped, kLumpedLimit);
    v.require(static_cast<int>(report.lmis.size()) >= 4 * d.design.loop_count, d.label + ": missing residuals");
    for (const auto& e : report.lmis) {
      worst_margin = std::max(worst_margin, e.max_eigenvalue / d.design.eps);
      v.require(e.max_eigenvalue <= -d.design.eps / 2, d.label + ": residual " + fmt(e.max_eigenvalue));
    }
    if (d.design.loop_count <= kLumpedLimit) {
      v.require(report.lumped_checked, d.label + ": lumped check skipped");
      v.require(report.worst_lumped < 0, d.label + ": lumped residual " + fmt(report.worst_lumped));
      ++lumped;
    }
  }
  v.require(lumped > 0, "no design small enough for the lumped check");
  v.detail << (v.pass ? "" : "; ") << designs.size() << " designs, " << lumped
           << " lumped checks, worst residual / eps = " << fmt(worst_margin);
  return v;
}

Verdict criterion_counters() {
  Verdict v;
  std::mt19937_64 gen(3);
  for (int n : {1, 2, 3, 4}) {
    for (int loops : {2, 3, 6, 10}) {
      std::vector<NcsModel> ms;
      for (int i = 0; i < loops; ++i) ms.push_back(fixtures::random_loop(gen, n, 1, 0.9));
      MetzlerParams params;
      params.alpha = 0.5;
      params.m = VectorXd::Constant(loops, 0.5);
      params.p = VectorXd::Constant(loops, 0.5);
      const auto prob = assemble_sdp(fixtures::augment_all(ms), params, 1e-6, Structure::FullState);
      const std::string tag = "N=" + std::to_string(loops) + " n=" + std::to_string(n);
      v.require(prob.lmi_count() == 4 * loops, tag + ": LMI count " + std::to_string(prob.lmi_count()));
      v.require(prob.variable_count() == 2 * loops * (2 * n * n + n) + 1,
                tag + ": variables " + std::to_string(prob.variable_count()));
      for (int s : prob.lmi_sizes()) v.require(s == 2 * n, tag + ": LMI size " + std::to_string(s));
      if (loops == 6 && n == 2) {
        v.require(prob.lmi_count() == 24 && prob.variable_count() == 121, "N=6 n=2 is not 24 / 121");
        v.detail << (v.pass ? "" : "; ") << "N=6 n=2: " << prob.lmi_count() << " LMIs, " << prob.variable_count()
                 << " variables";
      }
    }
  }
  return v;
}

Verdict criterion_stability(const std::vector<Designed>& designs) {
  Verdict v;
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  double worst_decay = 0;
  double worst_bound = 0;
  for (const auto& d : designs) {
    const auto policy = SchedulePolicy::priority(d.design, AckMode::Acknowledged);
    const auto& models = d.setup.models;
    bool ok = true;
    for (int trial = 0; trial < kInitialConditions && ok; ++trial) {
      std::vector<LoopState> s;
      double norm0 = 0;
      for (const auto& m : models) {
        const auto n = m.A.rows();
        s.push_back({VectorXd::NullaryExpr(n, [&] { return nd(gen); }), VectorXd::NullaryExpr(n, [&] { return nd(gen); })});
        norm0 += s.back().x.squaredNorm() + s.back().xhat.squaredNorm();
      }
      // Noise-free dynamics and the argmin rule are homogeneous, so the state
      // is rescaled to stay in the normal floating-point range; the true
      // state is exp(log_scale) times the stored one.
      double log_scale = 0;
      double cost = 0;
      double value = lyapunov(d.design, s);
      for (int k = 0; k < d.steps; ++k) {
        double stage = 0;
        for (std::size_t i = 0; i < models.size(); ++i) stage += stage_cost(models[i], s[i]);
        cost += stage * std::exp(2 * log_scale);
        step(models, s, policy.theta(k, s), {});
        const double next = lyapunov(d.design, s);
        if (!(next <= value - stage + kDecreaseRelTol * value)) {
          v.require(false, d.label + ": no decrease at k=" + std::to_string(k));
          ok = false;
          break;
        }
        value = next;
        double sq = 0;
        for (const auto& st : s) sq += st.x.squaredNorm() + st.xhat.squaredNorm();
        if (sq > 0 && sq < kRescaleBelow) {
          const double c = 1 / std::sqrt(sq);
          for (auto& st : s) {
            st.x *= c;
            st.xhat *= c;
          }
          value = lyapunov(d.design, s);
          log_scale -= std::log(c);
        }
      }
      double normk = 0;
      for (const auto& st : s) normk += st.x.squaredNorm() + st.xhat.squaredNorm();
      for (std::size_t i = 0; i < models.size(); ++i) cost += stage_cost(models[i], s[i]) * std::exp(2 * log_scale);
      const double decay = std::sqrt(normk / norm0) * std::exp(log_scale);
      const double bound = d.design.rho * norm0;
      worst_decay = std::max(worst_decay, decay);
      worst_bound = std::max(worst_bound, cost / bound);
      if (decay > kDecayRatio) {
        v.require(false, d.label + ": |eta_K| / |eta_0| = " + fmt(decay));
        ok = false;
      }
      if (!(cost < bound)) {
        v.require(false, d.label + ": J = " + fmt(cost) + " >= bound " + fmt(bound));
        ok = false;
      }
    }
  }
  v.detail << (v.pass ? "" : "; ") << designs.size() << " designs x " << kInitialConditions
           << " initial conditions, worst decay " << fmt(worst_decay) << ", worst J / bound " << fmt(worst_bound);
  return v;
}

Verdict criterion_decomposition(const std::vector<Designed>& designs) {
  Verdict v;
  std::mt19937_64 gen(13);
  std::normal_distribution<double> nd;
  std::array<int, 4> per_q{};
  int compared = 0;
  const int per_design = (kDecompositionStates + static_cast<int>(designs.size()) - 1) / static_cast<int>(designs.size());
  for (const auto& d : designs) {
    ++per_q[d.design.capacity];
    const auto& modes = d.lumped.modes();
    std::vector<MatrixXd> lumped_p;
    for (int s = 0; s < modes.size(); ++s) lumped_p.push_back(lumped_lyapunov(d.design, d.lumped, s));
    const auto policy = SchedulePolicy::priority(d.design, AckMode::Acknowledged);
    for (int t = 0; t < per_design; ++t) {
      std::vector<LoopState> s;
      VectorXd eta(d.lumped.dimension());
      for (int i = 0; i < d.design.loop_count; ++i) {
        s.push_back({VectorXd::NullaryExpr(2, [&] { return nd(gen); }), VectorXd::NullaryExpr(2, [&] { return nd(gen); })});
        eta.segment(d.lumped.offset(i), 4) = eta_of(s.back());
      }
      int central = 0;
      double best = eta.dot(lumped_p[0] * eta);
      for (int m = 1; m < modes.size(); ++m) {
        const double val = eta.dot(lumped_p[m] * eta);
        if (val < best) {
          best = val;
          central = m;
        }
      }
      const auto pr = policy.priorities(s);
      const int local = select_mode(pr, modes);
      v.require(local == central, d.label + ": mode " + std::to_string(local) + " vs " + std::to_string(central));
      ++compared;
    }
  }
  for (int q = 1; q <= 3; ++q) v.require(per_q[q] > 0, "no verified design with q=" + std::to_string(q));
  v.detail << (v.pass ? "" : "; ") << compared << " states over " << designs.size() << " designs";
  return v;
}

Verdict criterion_priority() {
  Verdict v;
  const Scenario pend = load_scenario(scenario_path("six_pendulums.yaml"));
  v.require(pend.loop_count() == 6 && pend.link.queue_capacity == 2, "scenario is not N=6, q=2");
  v.require(static_cast<int>(pend.sim.seeds.size()) >= kMinPendulumSeeds, "fewer than 20 seeds");
  const int q = pend.link.queue_capacity;
  const EpisodeSetup setup = build_setup(pend, q);
  const auto design = solve_design(build_lumped(setup, q), pend.design).design;
  auto mean = [&](const SchedulePolicy& policy) {
    const auto results = run_episodes(setup, policy, pend.sim);
    double sum = 0;
    for (const auto& r : results) sum += r.joint_cost;
    return sum / static_cast<double>(results.size());
  };
  const double prio = mean(SchedulePolicy::priority(design, AckMode::Acknowledged));
  const double rr = mean(SchedulePolicy::round_robin(pend.loop_count(), q));
  v.require(prio < rr, "priority " + fmt(prio) + " >= round-robin " + fmt(rr));
  v.detail << (v.pass ? "" : "; ") << "J priority " << fmt(prio) << " vs round-robin " << fmt(rr) << " ("
           << fmt(100 * (rr - prio) / rr) << "% lower)";
  return v;
}

Verdict criterion_plant_state_only() {
  Verdict v;
  std::mt19937_64 gen(12);
  std::vector<NcsModel> ms;
  for (double scale : {0.6, 0.75, 0.85}) ms.push_back(fixtures::random_loop(gen, 2, 1, scale));
  const auto lumped = build_lumped(fixtures::augment_all(ms), enumerate_modes(3, 1));
  const auto design = solve_design(lumped, serial(Structure::PlantStateOnly)).design;
  const auto deltas = priority_matrices(design);
  for (const auto& delta : deltas) {
    v.require(delta.block(2, 0, 2, 4).cwiseAbs().maxCoeff() == 0.0, "nonzero estimate row block");
    v.require(delta.block(0, 2, 4, 2).cwiseAbs().maxCoeff() == 0.0, "nonzero estimate column block");
  }
  const auto x_policy = SchedulePolicy::priority(design, AckMode::PlantStateOnly);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<LoopState> s;
    for (int i = 0; i < 3; ++i) {
      s.push_back({VectorXd::NullaryExpr(2, [&] { return nd(gen); }), VectorXd::NullaryExpr(2, [&] { return nd(gen); })});
    }
    const auto from_x = x_policy.priorities(s);
    for (int i = 0; i < 3; ++i) {
      const VectorXd e = eta_of(s[i]);
      const double full = e.dot(deltas[i] * e);
      const double scale = std::max(1.0, e.squaredNorm() * deltas[i].cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(full - from_x[i]) / scale);
    }
  }
  v.require(worst <= kPriorityRelTol, "priority mismatch " + fmt(worst));
  v.detail << (v.pass ? "" : "; ") << "zero estimate blocks, max relative priority gap " << fmt(worst);
  return v;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failed = 0;
  auto report = [&](int id, const std::string& name, const std::function<Verdict()>& run) {
    const auto t0 = clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << name << ": " << v.detail.str() << " ["
              << fmt(secs) << " s]" << std::endl;
  };

  std::vector<Designed> scenario;
  std::vector<Designed> random;
  std::vector<std::string> skipped;
  std::string setup_error;
  try {
    scenario = scenario_designs();
    random = random_designs(skipped);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  std::vector<Designed> all = scenario;
  all.insert(all.end(), random.begin(), random.end());
  auto guarded = [&](auto fn) {
    return [&, fn]() -> Verdict {
      if (!setup_error.empty()) throw std::runtime_error("design setup failed: " + setup_error);
      return fn();
    };
  };

  report(1, "utilization curve", criterion_utilization);
  report(2, "q-sweep cost curve", criterion_sweep);
  report(3, "certificate validity", guarded([&] { return criterion_certificates(all); }));
  report(4, "problem-size counters", criterion_counters);
  report(5, "noise-free stability and bound", guarded([&] { return criterion_stability(all); }));
  report(6, "scheduler decomposition", guarded([&] { return criterion_decomposition(random); }));
  report(7, "priority beats round-robin", criterion_priority);
  report(8, "plant-state-only structure", criterion_plant_state_only);
  if (!skipped.empty()) {
    std::cout << "note: infeasible random draws skipped:";
    for (const auto& s : skipped) std::cout << ' ' << s << ';';
    std::cout << '\n';
  }
  return failed == 0 ? 0 : 1;
}
