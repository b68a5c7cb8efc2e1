#include "ncsched/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include "ncsched/errors.hpp"

namespace ncsched {

const char* to_string(SchedulerKind s) {
  return s == SchedulerKind::Priority ? "priority" : "round-robin";
}

const char* to_string(AckMode a) {
  return a == AckMode::Acknowledged ? "acknowledged" : "plant-state-only";
}

SchedulerKind scheduler_from_string(const std::string& s) {
  if (s == "priority") return SchedulerKind::Priority;
  if (s == "round-robin") return SchedulerKind::RoundRobin;
  throw InvalidArgument("unknown scheduler '" + s + "' (expected priority or round-robin)");
}

AckMode ack_mode_from_string(const std::string& s) {
  if (s == "acknowledged") return AckMode::Acknowledged;
  if (s == "plant-state-only") return AckMode::PlantStateOnly;
  throw InvalidArgument("unknown ack mode '" + s + "' (expected acknowledged or plant-state-only)");
}

std::vector<int> round_robin(long long k, int loops, int capacity) {
  if (loops < 1 || capacity < 1 || capacity > loops || k < 0) {
    throw InvalidArgument("round_robin: need k >= 0 and 0 < q <= N");
  }
  std::vector<int> served(capacity);
  const long long start = (k % loops) * capacity % loops;
  for (int j = 0; j < capacity; ++j) served[j] = static_cast<int>((start + j) % loops);
  return served;
}

SchedulePolicy SchedulePolicy::priority(const PriorityDesign& design, AckMode ack) {
  if (ack == AckMode::PlantStateOnly && design.structure != Structure::PlantStateOnly) {
    throw InvalidArgument("plant-state-only acknowledgment mode needs a plant-state-only design");
  }
  SchedulePolicy p;
  p.kind_ = Kind::Priority;
  p.loops_ = design.loop_count;
  p.capacity_ = design.capacity;
  p.ack_ = ack;
  p.delta_ = priority_matrices(design);
  p.modes_.emplace(design.loop_count, design.capacity);
  return p;
}

SchedulePolicy SchedulePolicy::round_robin(int loops, int capacity) {
  if (loops < 2 || capacity < 1 || capacity >= loops) {
    throw InvalidArgument("round-robin policy: need 0 < q < N");
  }
  SchedulePolicy p;
  p.kind_ = Kind::RoundRobin;
  p.loops_ = loops;
  p.capacity_ = capacity;
  return p;
}

SchedulePolicy SchedulePolicy::all_served(int loops) {
  SchedulePolicy p;
  p.kind_ = Kind::AllServed;
  p.loops_ = loops;
  p.capacity_ = loops;
  return p;
}

std::vector<double> SchedulePolicy::priorities(const std::vector<LoopState>& states) const {
  if (kind_ != Kind::Priority) throw InvalidArgument("priorities: not a priority policy");
  std::vector<double> v(loops_);
  for (int i = 0; i < loops_; ++i) {
    const auto& s = states[i];
    const MatrixXd& d = delta_[i];
    const Eigen::Index n = s.x.size();
    if (ack_ == AckMode::PlantStateOnly) {
      v[i] = s.x.dot(d.topLeftCorner(n, n) * s.x);
    } else {
      VectorXd eta(2 * n);
      eta << s.x, s.xhat;
      v[i] = eta.dot(d * eta);
    }
  }
  return v;
}

std::vector<int> SchedulePolicy::theta(long long k, const std::vector<LoopState>& states) const {
  if (static_cast<int>(states.size()) != loops_) throw InvalidArgument("theta: wrong number of loops");
  std::vector<int> row(loops_, 0);
  switch (kind_) {
    case Kind::AllServed:
      std::fill(row.begin(), row.end(), 1);
      break;
    case Kind::RoundRobin:
      for (int i : ncsched::round_robin(k, loops_, capacity_)) row[i] = 1;
      break;
    case Kind::Priority: {
      const auto v = priorities(states);
      for (int i : modes_->subset(select_mode(v, *modes_))) row[i] = 1;
      break;
    }
  }
  return row;
}

std::vector<VectorXd> step(const std::vector<NcsModel>& models, std::vector<LoopState>& states,
                           const std::vector<int>& theta, const std::vector<VectorXd>& noise) {
  if (states.size() != models.size() || theta.size() != models.size() ||
      (!noise.empty() && noise.size() != models.size())) {
    throw InvalidArgument("step: one state, theta entry, and noise draw per loop required");
  }
  std::vector<VectorXd> inputs(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    auto& s = states[i];
    const VectorXd u = -m.K * s.xhat;
    const VectorXd bu = m.B * u;
    const VectorXd predicted = m.A * s.x + bu;
    s.xhat = theta[i] ? predicted : VectorXd(m.A * s.xhat + bu);
    s.x = noise.empty() ? predicted : VectorXd(predicted + noise[i]);
    inputs[i] = u;
  }
  return inputs;
}

double stage_cost(const NcsModel& m, const LoopState& s) {
  const VectorXd u = -m.K * s.xhat;
  return s.x.dot(m.Q * s.x) + 2 * s.x.dot(m.H * u) + u.dot(m.R * u);
}

namespace {

// SplitMix64 as a UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

std::uint64_t stream_key(std::uint64_t seed, int loop, long long k) {
  SplitMix64 h(seed);
  std::uint64_t key = h();
  key ^= SplitMix64(key + static_cast<std::uint64_t>(loop))();
  key ^= SplitMix64(key + static_cast<std::uint64_t>(k) * 0x632be59bd9b4e019ULL)();
  return key;
}

}  // namespace

VectorXd noise_draw(const MatrixXd& cov_factor, std::uint64_t seed, int loop, long long k) {
  SplitMix64 gen(stream_key(seed, loop, k));
  std::normal_distribution<double> normal;
  VectorXd z(cov_factor.cols());
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(gen);
  return cov_factor * z;
}

SimResult run_episode(const EpisodeSetup& setup, const SchedulePolicy& policy, const SimConfig& config,
                      std::uint64_t seed) {
  const auto& models = setup.models;
  const int n = static_cast<int>(models.size());
  if (n != policy.loops()) throw InvalidArgument("run_episode: policy and scenario loop counts differ");
  if (!(setup.period.count() > 0)) throw InvalidArgument("run_episode: sampling period must be positive");
  if (!(config.horizon.count() > 0)) throw InvalidArgument("run_episode: horizon must be positive");

  SimResult r;
  r.seed = seed;
  r.period = setup.period;
  r.steps = static_cast<int>(std::floor(config.horizon / setup.period + 1e-9));
  if (r.steps < 1) throw InvalidArgument("run_episode: horizon shorter than one sampling period");
  r.utilization = setup.utilization;
  r.loop_cost.assign(n, 0.0);
  r.transmissions.assign(n, 0);

  std::vector<LoopState> states(n);
  std::vector<MatrixXd> factors(n);
  for (int i = 0; i < n; ++i) {
    states[i] = {models[i].x0, models[i].xhat0};
    if (config.noise && models[i].noise_cov.size() > 0 && models[i].noise_cov.cwiseAbs().maxCoeff() > 0) {
      factors[i] = psd_factor(models[i].noise_cov);
    }
  }

  std::vector<VectorXd> noise;
  for (long long k = 0;; ++k) {
    if (k >= 1) {
      for (int i = 0; i < n; ++i) r.loop_cost[i] += stage_cost(models[i], states[i]);
    }
    const auto theta = policy.theta(k, states);
    if (k == r.steps) {
      // terminal row: state K with the decision it would trigger
      for (int i = 0; config.record_trajectories && i < n; ++i) {
        r.trajectory.push_back({static_cast<int>(k), k * setup.period.count(), i, states[i].x,
                                states[i].xhat, VectorXd(-models[i].K * states[i].xhat), theta[i]});
      }
      break;
    }
    noise.clear();
    if (config.noise) {
      for (int i = 0; i < n; ++i) {
        noise.push_back(factors[i].size() > 0 ? noise_draw(factors[i], seed, i, k)
                                              : VectorXd::Zero(models[i].state_dim()));
      }
    }
    const std::vector<LoopState> before =
        config.record_trajectories ? states : std::vector<LoopState>{};
    const auto inputs = step(models, states, theta, noise);
    for (int i = 0; i < n; ++i) {
      r.transmissions[i] += theta[i];
      if (config.record_trajectories) {
        r.trajectory.push_back({static_cast<int>(k), k * setup.period.count(), i, before[i].x,
                                before[i].xhat, inputs[i], theta[i]});
      }
      const double norm = states[i].x.norm();
      if (!std::isfinite(norm) || norm > kDivergenceNorm) {
        throw Divergence("loop " + std::to_string(i) + " diverged at step " + std::to_string(k + 1) +
                         " (|x| = " + std::to_string(norm) + ")");
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    r.joint_cost += r.loop_cost[i];
    VectorXd eta(2 * states[i].x.size());
    eta << states[i].x, states[i].xhat;
    r.final_norms.push_back(eta.norm());
  }
  r.mean_step_cost = r.joint_cost / r.steps;
  return r;
}

std::vector<SimResult> run_episodes(const EpisodeSetup& setup, const SchedulePolicy& policy,
                                    const SimConfig& config) {
  if (config.seeds.empty()) throw InvalidArgument("simulation needs at least one seed");
  std::vector<SimResult> results(config.seeds.size());
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  const unsigned limit = config.threads > 0 ? static_cast<unsigned>(config.threads) : cores;
  const unsigned workers = std::min<unsigned>(limit, static_cast<unsigned>(results.size()));
  if (workers <= 1) {
    for (std::size_t s = 0; s < results.size(); ++s) results[s] = run_episode(setup, policy, config, config.seeds[s]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(results.size());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t s; (s = next.fetch_add(1)) < results.size();) {
        try {
          results[s] = run_episode(setup, policy, config, config.seeds[s]);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

void write_trajectory_csv(std::ostream& out, const SimResult& result) {
  Eigen::Index nx = 0, nu = 0;
  for (const auto& row : result.trajectory) {
    nx = std::max(nx, row.x.size());
    nu = std::max(nu, row.u.size());
  }
  out << "# seed=" << result.seed << '\n';
  out << "k,t,loop";
  for (Eigen::Index j = 0; j < nx; ++j) out << ",x" << j + 1;
  for (Eigen::Index j = 0; j < nx; ++j) out << ",xhat" << j + 1;
  for (Eigen::Index j = 0; j < nu; ++j) out << ",u" << j + 1;
  out << ",theta\n";
  const auto old = out.precision(17);
  auto cells = [&](const VectorXd& v, Eigen::Index width) {
    for (Eigen::Index j = 0; j < width; ++j) {
      out << ',';
      if (j < v.size()) out << v(j);
    }
  };
  for (const auto& row : result.trajectory) {
    out << row.k << ',' << row.t << ',' << row.loop;
    cells(row.x, nx);
    cells(row.xhat, nx);
    cells(row.u, nu);
    out << ',' << row.theta << '\n';
  }
  out.precision(old);
}

}  // namespace ncsched
