#include "ncsched/sweep.hpp"

#include <cmath>
#include <ostream>

#include "ncsched/errors.hpp"

namespace ncsched {

std::vector<SweepRow> run_qsweep(const Scenario& scenario, int first, int last,
                                 const std::function<void(const SweepRow&)>& progress) {
  const int n = scenario.loop_count();
  if (first < 1 || last > n || first > last) {
    throw InvalidArgument("q range must satisfy 1 <= first <= last <= " + std::to_string(n));
  }
  std::vector<SweepRow> rows;
  for (int q = first; q <= last; ++q) {
    SweepRow row;
    row.capacity = q;
    const EpisodeSetup setup = build_setup(scenario, q);
    row.period = setup.period;
    row.utilization = setup.utilization;
    row.seeds = static_cast<int>(scenario.sim.seeds.size());

    SimConfig config = scenario.sim;
    config.scheduler = SchedulerKind::Priority;
    config.record_trajectories = false;
    std::optional<SchedulePolicy> policy;
    if (q == n) {
      policy = SchedulePolicy::all_served(n);
      row.status = "static";
    } else {
      try {
        DesignOptions options = scenario.design;
        if (config.ack_mode == AckMode::PlantStateOnly) options.structure = Structure::PlantStateOnly;
        const auto outcome = solve_design(build_lumped(setup, q), options);
        row.rho = outcome.design.rho;
        policy = SchedulePolicy::priority(outcome.design, config.ack_mode);
        row.status = "ok";
      } catch (const InfeasibleDesign&) {
        row.status = "infeasible";
      }
    }
    if (policy) {
      try {
        for (const auto& r : run_episodes(setup, *policy, config)) row.costs.push_back(r.mean_step_cost);
      } catch (const Divergence&) {
        row.status = "diverged";
        row.costs.clear();
      }
    }
    if (!row.costs.empty()) {
      double sum = 0;
      for (double c : row.costs) sum += c;
      row.mean_cost = sum / row.costs.size();
      double sq = 0;
      for (double c : row.costs) sq += (c - row.mean_cost) * (c - row.mean_cost);
      row.std_cost = row.costs.size() > 1 ? std::sqrt(sq / (row.costs.size() - 1)) : 0.0;
    } else {
      row.mean_cost = std::nan("");
      row.std_cost = std::nan("");
    }
    if (progress) progress(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const Scenario& scenario, const std::vector<SweepRow>& rows) {
  out << "# scenario=" << (scenario.name.empty() ? "unnamed" : scenario.name) << '\n';
  out << "# horizon=" << scenario.sim.horizon.count() << " noise=" << (scenario.sim.noise ? 1 : 0)
      << " ack_mode=" << to_string(scenario.sim.ack_mode) << '\n';
  out << "# seeds=";
  for (std::size_t s = 0; s < scenario.sim.seeds.size(); ++s) out << (s ? " " : "") << scenario.sim.seeds[s];
  out << '\n';
  out << "q,Ts,utilization,mean_cost,std_cost,seeds,status\n";
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    out << r.capacity << ',' << r.period.count() << ',' << r.utilization << ',' << r.mean_cost << ','
        << r.std_cost << ',' << r.seeds << ',' << r.status << '\n';
  }
  out.precision(old);
}

}  // namespace ncsched
