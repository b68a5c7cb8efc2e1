#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncsched/design.hpp"
#include "ncsched/model.hpp"
#include "ncsched/modeset.hpp"

namespace ncsched {

enum class SchedulerKind { Priority, RoundRobin };
enum class AckMode {
  /// Sensors mirror the controller estimate and prioritize on [x; xhat].
  Acknowledged,
  /// Sensors prioritize on x alone; needs a plant-state-only design.
  PlantStateOnly,
};

const char* to_string(SchedulerKind s);
const char* to_string(AckMode a);
SchedulerKind scheduler_from_string(const std::string& s);
AckMode ack_mode_from_string(const std::string& s);

struct SimConfig {
  Seconds horizon{100};
  std::vector<std::uint64_t> seeds{1};
  SchedulerKind scheduler = SchedulerKind::Priority;
  AckMode ack_mode = AckMode::Acknowledged;
  bool noise = true;
  bool record_trajectories = false;
  /// Upper bound on worker threads for independent episodes; 0 means one per core.
  int threads = 0;
};

/// Divergence guard on any plant state norm.
inline constexpr double kDivergenceNorm = 1e9;

struct LoopState {
  VectorXd x;
  VectorXd xhat;
};

struct TrajectoryRow {
  int k = 0;
  double t = 0;
  int loop = 0;
  VectorXd x;
  VectorXd xhat;
  VectorXd u;
  int theta = 0;
};

struct SimResult {
  std::uint64_t seed = 0;
  Seconds period{0};
  int steps = 0;                  // K = floor(horizon / T_s)
  std::vector<double> loop_cost;  // sum_{k=1..K} x'Qx + 2x'Hu + u'Ru
  double joint_cost = 0;          // sum over loops
  double mean_step_cost = 0;      // joint_cost / K
  double utilization = 0;
  std::vector<int> transmissions;
  std::vector<double> final_norms;  // ||[x_K; xhat_K]|| per loop
  std::vector<TrajectoryRow> trajectory;
};

/// Served loops at step k under rotation: (kq mod N), ..., (kq + q - 1 mod N).
std::vector<int> round_robin(long long k, int loops, int capacity);

/// Chooses the arrival row theta(., k) from the current states.
class SchedulePolicy {
 public:
  /// Priority scheduling with v_i = [x; xhat]' Delta_i [x; xhat] (or x' (X1 - X0) x
  /// in plant-state-only mode).
  static SchedulePolicy priority(const PriorityDesign& design, AckMode ack);
  static SchedulePolicy round_robin(int loops, int capacity);
  /// Every loop served each step (q = N).
  static SchedulePolicy all_served(int loops);

  std::vector<int> theta(long long k, const std::vector<LoopState>& states) const;
  std::vector<double> priorities(const std::vector<LoopState>& states) const;
  int loops() const { return loops_; }
  int capacity() const { return capacity_; }

 private:
  enum class Kind { Priority, RoundRobin, AllServed } kind_ = Kind::AllServed;
  int loops_ = 0;
  int capacity_ = 0;
  AckMode ack_ = AckMode::Acknowledged;
  std::vector<MatrixXd> delta_;
  std::optional<ModeSet> modes_;
};

/// One period of every loop: u = -K xhat; x' = Ax + Bu + w;
/// xhat' = Ax + Bu if theta = 1, A xhat + Bu otherwise.
/// `noise` holds w per loop (empty for noise-free). Returns the inputs.
std::vector<VectorXd> step(const std::vector<NcsModel>& models, std::vector<LoopState>& states,
                           const std::vector<int>& theta, const std::vector<VectorXd>& noise);

/// Stage cost [x; xhat]' Qaug [x; xhat] of one loop.
double stage_cost(const NcsModel& model, const LoopState& state);

/// Zero-mean Gaussian draw with covariance `cov`, keyed by (seed, loop, k)
/// so the stream does not depend on evaluation order.
VectorXd noise_draw(const MatrixXd& cov_factor, std::uint64_t seed, int loop, long long k);

struct EpisodeSetup {
  std::vector<NcsModel> models;
  Seconds period{0};
  double utilization = 0;
};

/// Runs K = floor(horizon / T_s) periods from the models' initial states.
/// Throws Divergence when a plant state norm exceeds kDivergenceNorm or turns
/// non-finite.
SimResult run_episode(const EpisodeSetup& setup, const SchedulePolicy& policy, const SimConfig& config,
                      std::uint64_t seed);

/// Every seed of `config`, in seed order; episodes may run concurrently.
std::vector<SimResult> run_episodes(const EpisodeSetup& setup, const SchedulePolicy& policy,
                                    const SimConfig& config);

/// CSV with header k,t,loop,x..,xhat..,u..,theta (one column per component).
void write_trajectory_csv(std::ostream& out, const SimResult& result);

}  // namespace ncsched
