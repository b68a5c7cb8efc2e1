#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncsched/scenario.hpp"

namespace ncsched {

struct SweepRow {
  int capacity = 0;
  Seconds period{0};
  double utilization = 0;
  double mean_cost = 0;  // mean over seeds of the per-period joint cost
  double std_cost = 0;   // sample standard deviation over seeds
  int seeds = 0;
  /// "ok", "static" (q = N, every loop served), "infeasible", or "diverged".
  std::string status;
  double rho = 0;  // 0 when no design was needed or found
  std::vector<double> costs;  // per seed, in seed order
};

/// For each q in [first, last]: T_s = (L/B) q + D, rediscretize, redesign
/// (q < N), and simulate every configured seed under priority scheduling.
/// Infeasible or diverging points are flagged and the sweep continues.
std::vector<SweepRow> run_qsweep(const Scenario& scenario, int first, int last,
                                 const std::function<void(const SweepRow&)>& progress = {});

/// Header q,Ts,utilization,mean_cost,std_cost,seeds,status preceded by
/// `#` comment lines naming the scenario and seeds.
void write_sweep_csv(std::ostream& out, const Scenario& scenario, const std::vector<SweepRow>& rows);

}  // namespace ncsched
