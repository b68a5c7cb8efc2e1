#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ncsched/design_io.hpp"
#include "ncsched/errors.hpp"
#include "ncsched/scenario.hpp"
#include "ncsched/sweep.hpp"

namespace fs = std::filesystem;
using namespace ncsched;

namespace {

enum Exit : int {
  kOk = 0,
  kVerifyFailed = 1,
  kInfeasible = 2,
  kInvalidInput = 3,
  kDiverged = 4,
};

struct Common {
  std::string scenario;
  std::optional<std::string> structure;
};

struct SimFlags {
  std::optional<std::string> design;
  std::optional<std::string> scheduler;
  std::optional<std::string> ack_mode;
  std::vector<std::uint64_t> seeds;
  std::optional<int> seed_count;
  std::optional<double> horizon;
  bool no_noise = false;
  bool trajectories = false;
  std::optional<int> threads;
  std::string output_dir;
};

void apply_sim_flags(Scenario& sc, const SimFlags& f) {
  if (f.scheduler) sc.sim.scheduler = scheduler_from_string(*f.scheduler);
  if (f.ack_mode) sc.sim.ack_mode = ack_mode_from_string(*f.ack_mode);
  if (!f.seeds.empty()) sc.sim.seeds = f.seeds;
  if (f.seed_count) {
    if (*f.seed_count < 1) throw InvalidArgument("--seed-count must be positive");
    const std::uint64_t first = sc.sim.seeds.empty() ? 1 : sc.sim.seeds.front();
    sc.sim.seeds.clear();
    for (int j = 0; j < *f.seed_count; ++j) sc.sim.seeds.push_back(first + j);
  }
  if (f.horizon) {
    if (!(*f.horizon > 0)) throw InvalidArgument("--horizon must be positive");
    sc.sim.horizon = Seconds(*f.horizon);
  }
  if (f.no_noise) sc.sim.noise = false;
  if (f.trajectories) sc.sim.record_trajectories = true;
  if (f.threads) sc.sim.threads = *f.threads;
}

Scenario load(const Common& c) {
  Scenario sc = load_scenario(c.scenario);
  if (c.structure) sc.design.structure = structure_from_string(*c.structure);
  return sc;
}

void require_design_capacity(const Scenario& sc) {
  if (sc.link.queue_capacity >= sc.loop_count()) {
    throw InvalidArgument("scheduler design needs queue_capacity < number of loops (got q = " +
                          std::to_string(sc.link.queue_capacity) + ", N = " +
                          std::to_string(sc.loop_count()) + ")");
  }
}

void print_vector(std::ostream& os, const char* label, const VectorXd& v) {
  os << label << " =";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v(i);
  os << '\n';
}

void print_report(const CertificateReport& report, double eps) {
  std::cout << std::left << std::setw(6) << "loop" << std::setw(24) << "constraint" << "max eigenvalue\n";
  for (const auto& e : report.lmis) {
    std::cout << std::setw(6) << e.loop << std::setw(24) << to_string(e.kind) << std::setprecision(6)
              << std::scientific << e.max_eigenvalue << std::defaultfloat
              << (e.max_eigenvalue < 0 ? "" : "  VIOLATED") << '\n';
  }
  std::cout << std::right << "worst LMI residual: " << report.worst_lmi << " (eps = " << eps << ")\n";
  if (report.lumped_checked) {
    std::cout << "lumped inequality over " << report.lumped_max_eigenvalues.size()
              << " modes: worst residual " << report.worst_lumped << '\n';
  }
}

int cmd_design(const Common& c, const std::string& output) {
  Scenario sc = load(c);
  require_design_capacity(sc);
  const int q = sc.link.queue_capacity;
  const EpisodeSetup setup = build_setup(sc, q);
  if (sc.sim.ack_mode == AckMode::PlantStateOnly) sc.design.structure = Structure::PlantStateOnly;
  const LumpedSystem lumped = build_lumped(setup, q);
  DesignOutcome out;
  try {
    out = solve_design(lumped, sc.design);
  } catch (const InfeasibleDesign& e) {
    std::cerr << "design infeasible: " << e.what() << '\n';
    return kInfeasible;
  }
  const auto& d = out.design;
  save_design(output, d);
  std::cout << std::setprecision(8);
  std::cout << "loops N = " << d.loop_count << ", queue capacity q = " << d.capacity
            << ", T_s = " << setup.period.count() << " s, utilization = " << setup.utilization << '\n';
  std::cout << "structure = " << to_string(d.structure) << ", alpha = " << d.alpha << ", rho = " << d.rho
            << ", eps = " << d.eps << '\n';
  print_vector(std::cout, "m", d.m);
  print_vector(std::cout, "p", d.p);
  const auto sizes = out.problem.lmi_sizes();
  const std::set<int> distinct(sizes.begin(), sizes.end());
  std::cout << "problem size: " << out.problem.lmi_count() << " LMIs of size";
  for (int s : distinct) std::cout << ' ' << s;
  std::cout << ", " << out.problem.variable_count() << " variables\n";
  int feasible = 0;
  for (const auto& a : out.attempts) feasible += a.feasible;
  std::cout << "alpha grid: " << feasible << " of " << out.attempts.size() << " points feasible\n";
  std::cout << "design written to " << output << '\n';
  return kOk;
}

int cmd_verify(const Common& c, const std::string& design_path) {
  const Scenario sc = load(c);
  const PriorityDesign d = load_design(design_path);
  if (d.loop_count != sc.loop_count() || d.capacity != sc.link.queue_capacity) {
    throw InvalidArgument("design (N = " + std::to_string(d.loop_count) + ", q = " + std::to_string(d.capacity) +
                          ") does not match the scenario (N = " + std::to_string(sc.loop_count()) +
                          ", q = " + std::to_string(sc.link.queue_capacity) + ")");
  }
  const EpisodeSetup setup = build_setup(sc, d.capacity);
  const auto report = verify_certificate(d, build_lumped(setup, d.capacity));
  print_report(report, d.eps);
  if (!report.ok()) {
    std::cout << "verification FAILED\n";
    return kVerifyFailed;
  }
  std::cout << "verification passed\n";
  return kOk;
}

void write_summary(std::ostream& os, const Scenario& sc, const std::vector<SimResult>& results) {
  os << "# scenario=" << (sc.name.empty() ? "unnamed" : sc.name) << " scheduler=" << to_string(sc.sim.scheduler)
     << " noise=" << (sc.sim.noise ? 1 : 0) << '\n';
  os << "# seeds=";
  for (std::size_t s = 0; s < sc.sim.seeds.size(); ++s) os << (s ? " " : "") << sc.sim.seeds[s];
  os << '\n';
  const std::size_t n = results.front().loop_cost.size();
  os << "seed,steps,Ts,utilization,joint_cost,mean_cost";
  for (std::size_t i = 0; i < n; ++i) os << ",J" << i + 1;
  for (std::size_t i = 0; i < n; ++i) os << ",tx" << i + 1;
  os << '\n';
  const auto old = os.precision(17);
  for (const auto& r : results) {
    os << r.seed << ',' << r.steps << ',' << r.period.count() << ',' << r.utilization << ',' << r.joint_cost
       << ',' << r.mean_step_cost;
    for (double j : r.loop_cost) os << ',' << j;
    for (int t : r.transmissions) os << ',' << t;
    os << '\n';
  }
  os.precision(old);
}

int cmd_simulate(const Common& c, const SimFlags& flags) {
  Scenario sc = load(c);
  apply_sim_flags(sc, flags);
  const int n = sc.loop_count();
  const int q = sc.link.queue_capacity;
  const EpisodeSetup setup = build_setup(sc, q);

  std::optional<PriorityDesign> design;
  std::optional<SchedulePolicy> policy;
  if (q == n) {
    policy = SchedulePolicy::all_served(n);
  } else if (sc.sim.scheduler == SchedulerKind::RoundRobin) {
    policy = SchedulePolicy::round_robin(n, q);
  } else {
    if (flags.design) {
      design = load_design(*flags.design);
      if (design->loop_count != n || design->capacity != q) {
        throw InvalidArgument("design does not match the scenario loop count or queue capacity");
      }
    } else {
      if (sc.sim.ack_mode == AckMode::PlantStateOnly) sc.design.structure = Structure::PlantStateOnly;
      try {
        design = solve_design(build_lumped(setup, q), sc.design).design;
      } catch (const InfeasibleDesign& e) {
        std::cerr << "design infeasible: " << e.what() << '\n';
        return kInfeasible;
      }
    }
    policy = SchedulePolicy::priority(*design, sc.sim.ack_mode);
  }

  std::vector<SimResult> results;
  try {
    results = run_episodes(setup, *policy, sc.sim);
  } catch (const Divergence& e) {
    std::cerr << "simulation diverged: " << e.what() << '\n';
    return kDiverged;
  }

  std::cout << std::setprecision(8);
  std::cout << "scheduler = " << (q == n ? "all-served" : to_string(sc.sim.scheduler)) << ", N = " << n
            << ", q = " << q << ", T_s = " << setup.period.count() << " s, steps = " << results.front().steps
            << ", utilization = " << setup.utilization << '\n';
  double mean_joint = 0, mean_step = 0;
  std::vector<double> per_loop(n, 0.0);
  for (const auto& r : results) {
    mean_joint += r.joint_cost / results.size();
    mean_step += r.mean_step_cost / results.size();
    for (int i = 0; i < n; ++i) per_loop[i] += r.loop_cost[i] / results.size();
  }
  std::cout << "seeds = " << results.size() << ", joint cost J = " << mean_joint
            << ", per-period mean cost = " << mean_step << '\n';
  std::cout << "per-loop J =";
  for (double j : per_loop) std::cout << ' ' << j;
  std::cout << '\n';
  if (design) {
    std::vector<VectorXd> eta0;
    for (const auto& m : setup.models) {
      VectorXd e(2 * m.state_dim());
      e << m.x0, m.xhat0;
      eta0.push_back(e);
    }
    const auto bound = performance_bound(*design, eta0, ModeSet(n, q));
    std::cout << "cost bound: rho * sum |x0|^2 = " << bound.loose << ", initial-mode bound = " << bound.tight;
    if (!sc.sim.noise) std::cout << (mean_joint < bound.loose ? "  (J below bound)" : "  (J ABOVE bound)");
    std::cout << '\n';
  }

  if (!flags.output_dir.empty()) {
    fs::create_directories(flags.output_dir);
    const fs::path dir(flags.output_dir);
    std::ofstream summary(dir / "summary.csv");
    write_summary(summary, sc, results);
    if (sc.sim.record_trajectories) {
      for (const auto& r : results) {
        std::ofstream traj(dir / ("trajectory_seed_" + std::to_string(r.seed) + ".csv"));
        write_trajectory_csv(traj, r);
      }
    }
    std::cout << "outputs written to " << dir.string() << '\n';
  }
  return kOk;
}

int cmd_sweep(const Common& c, const SimFlags& flags, std::optional<int> first, std::optional<int> last,
              const std::string& output) {
  Scenario sc = load(c);
  apply_sim_flags(sc, flags);
  const int lo = first.value_or(1);
  const int hi = last.value_or(sc.loop_count());
  if (lo < 1 || lo > hi || hi > sc.loop_count()) {
    throw InvalidArgument("q range must satisfy 1 <= first <= last <= " + std::to_string(sc.loop_count()));
  }
  std::cout << std::setprecision(6);
  std::cout << "q      T_s   utilization   mean cost    std      status\n";
  const auto rows = run_qsweep(sc, lo, hi, [](const SweepRow& r) {
    std::cout << std::setw(2) << r.capacity << std::setw(10) << r.period.count() << std::setw(12) << r.utilization
              << std::setw(12) << r.mean_cost << std::setw(11) << r.std_cost << "   " << r.status << std::endl;
  });
  if (!output.empty()) {
    if (fs::path(output).has_parent_path()) fs::create_directories(fs::path(output).parent_path());
    std::ofstream out(output);
    if (!out) throw InvalidArgument("cannot write '" + output + "'");
    write_sweep_csv(out, sc, rows);
    std::cout << "sweep written to " << output << '\n';
  }
  return kOk;
}

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--scheduler", f.scheduler, "priority or round-robin");
  cmd->add_option("--ack-mode", f.ack_mode, "acknowledged or plant-state-only");
  cmd->add_option("--seeds", f.seeds, "explicit seed list")->delimiter(',');
  cmd->add_option("--seed-count", f.seed_count, "number of consecutive seeds starting at the first configured one");
  cmd->add_option("--horizon", f.horizon, "simulated time in seconds");
  cmd->add_flag("--no-noise", f.no_noise, "disable process noise");
  cmd->add_option("--threads", f.threads, "worker threads for independent episodes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Priority scheduling for control loops sharing a capacity-limited link"};
  app.require_subcommand(1);

  Common common;
  std::string design_out;
  auto* design = app.add_subcommand("design", "Solve the scheduler design and write the design document");
  design->add_option("-s,--scenario", common.scenario, "scenario file")->required();
  design->add_option("-o,--output", design_out, "design file to write")->required();
  design->add_option("--structure", common.structure, "full-state or plant-state-only");

  std::string design_in;
  auto* verify = app.add_subcommand("verify", "Re-check a stored design against a scenario");
  verify->add_option("-s,--scenario", common.scenario, "scenario file")->required();
  verify->add_option("-d,--design", design_in, "design file")->required();

  SimFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "Simulate the scenario under a scheduler");
  simulate->add_option("-s,--scenario", common.scenario, "scenario file")->required();
  simulate->add_option("-d,--design", sim_flags.design, "design file (designed on the fly when absent)");
  simulate->add_option("-o,--output-dir", sim_flags.output_dir, "directory for summary and trajectory CSVs");
  simulate->add_flag("--trajectories", sim_flags.trajectories, "record per-step trajectories");
  add_sim_flags(simulate, sim_flags);

  std::optional<int> q_first, q_last;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Redesign and simulate for a range of queue capacities");
  sweep->add_option("-s,--scenario", common.scenario, "scenario file")->required();
  sweep->add_option("--q-first", q_first, "first queue capacity (default 1)");
  sweep->add_option("--q-last", q_last, "last queue capacity (default N)");
  sweep->add_option("-o,--output", sweep_out, "sweep CSV to write");
  add_sim_flags(sweep, sim_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*design) return cmd_design(common, design_out);
    if (*verify) return cmd_verify(common, design_in);
    if (*simulate) return cmd_simulate(common, sim_flags);
    if (*sweep) return cmd_sweep(common, sim_flags, q_first, q_last, sweep_out);
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const NotStabilizable& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const InfeasibleDesign& e) {
    std::cerr << "design infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const Divergence& e) {
    std::cerr << "simulation diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kOk;
}
