#include "ncsched/scenario.hpp"

#include <fstream>
#include <sstream>

#include "yaml_util.hpp"

namespace ncsched {

namespace {

MatrixXd matrix_or_scalar(const YAML::Node& node, const std::string& where) {
  if (node.IsScalar()) return MatrixXd::Constant(1, 1, yaml::as<double>(node, where));
  return yaml::matrix(node, where);
}

PlantSpec parse_plant(const YAML::Node& node, const std::string& where) {
  yaml::require_keys(node, where,
                     {"count", "continuous", "A", "B", "Q", "R", "H", "K", "x0", "xhat0", "noise", "noise_model"});
  PlantSpec p;
  if (node["continuous"]) p.continuous = yaml::as<bool>(node["continuous"], where + ".continuous");
  p.A = matrix_or_scalar(yaml::required(node, where, "A"), where + ".A");
  p.B = matrix_or_scalar(yaml::required(node, where, "B"), where + ".B");
  p.Q = matrix_or_scalar(yaml::required(node, where, "Q"), where + ".Q");
  p.R = matrix_or_scalar(yaml::required(node, where, "R"), where + ".R");
  if (node["H"]) p.H = matrix_or_scalar(node["H"], where + ".H");
  if (node["K"]) p.K = matrix_or_scalar(node["K"], where + ".K");
  p.x0 = yaml::vector(yaml::required(node, where, "x0"), where + ".x0");
  if (node["xhat0"]) p.xhat0 = yaml::vector(node["xhat0"], where + ".xhat0");
  if (node["noise"]) p.noise = matrix_or_scalar(node["noise"], where + ".noise");
  if (node["noise_model"]) {
    const auto s = yaml::as<std::string>(node["noise_model"], where + ".noise_model");
    if (s == "continuous-intensity") {
      p.noise_model = NoiseModel::ContinuousIntensity;
    } else if (s == "per-step-covariance") {
      p.noise_model = NoiseModel::PerStepCovariance;
    } else {
      throw InvalidArgument(where + ".noise_model: expected continuous-intensity or per-step-covariance");
    }
  }
  return p;
}

std::vector<std::uint64_t> parse_seeds(const YAML::Node& node, const std::string& where) {
  std::vector<std::uint64_t> seeds;
  if (node.IsSequence()) {
    for (const auto& s : node) seeds.push_back(yaml::as<std::uint64_t>(s, where));
  } else {
    yaml::require_keys(node, where, {"first", "count"});
    const auto first = yaml::as<std::uint64_t>(yaml::required(node, where, "first"), where + ".first");
    const auto count = yaml::as<long long>(yaml::required(node, where, "count"), where + ".count");
    if (count < 1) throw InvalidArgument(where + ".count must be positive");
    for (long long j = 0; j < count; ++j) seeds.push_back(first + static_cast<std::uint64_t>(j));
  }
  if (seeds.empty()) throw InvalidArgument(where + ": at least one seed required");
  return seeds;
}

void parse_design(const YAML::Node& node, DesignOptions& d) {
  const std::string where = "design";
  yaml::require_keys(node, where, {"alpha_grid", "eps", "structure", "parallel"});
  if (node["alpha_grid"]) {
    const VectorXd grid = yaml::vector(node["alpha_grid"], "design.alpha_grid");
    d.alpha_grid.assign(grid.data(), grid.data() + grid.size());
    for (double a : d.alpha_grid) {
      if (!(a >= 0 && a <= 1)) throw InvalidArgument("design.alpha_grid: values must lie in [0, 1]");
    }
  }
  if (node["eps"]) {
    d.eps = yaml::as<double>(node["eps"], "design.eps");
    if (!(d.eps > 0)) throw InvalidArgument("design.eps must be positive");
  }
  if (node["structure"]) d.structure = structure_from_string(yaml::as<std::string>(node["structure"], where));
  if (node["parallel"]) d.parallel = yaml::as<bool>(node["parallel"], "design.parallel");
}

void parse_sim(const YAML::Node& node, SimConfig& s) {
  const std::string where = "simulation";
  yaml::require_keys(node, where,
                     {"horizon", "seeds", "scheduler", "ack_mode", "noise", "record_trajectories", "threads"});
  if (node["horizon"]) s.horizon = Seconds(yaml::as<double>(node["horizon"], "simulation.horizon"));
  if (!(s.horizon.count() > 0)) throw InvalidArgument("simulation.horizon must be positive");
  if (node["seeds"]) s.seeds = parse_seeds(node["seeds"], "simulation.seeds");
  if (node["scheduler"]) s.scheduler = scheduler_from_string(yaml::as<std::string>(node["scheduler"], where));
  if (node["ack_mode"]) s.ack_mode = ack_mode_from_string(yaml::as<std::string>(node["ack_mode"], where));
  if (node["noise"]) s.noise = yaml::as<bool>(node["noise"], "simulation.noise");
  if (node["record_trajectories"]) {
    s.record_trajectories = yaml::as<bool>(node["record_trajectories"], "simulation.record_trajectories");
  }
  if (node["threads"]) s.threads = yaml::as<int>(node["threads"], "simulation.threads");
}

void check_plant_shapes(const PlantSpec& p, const std::string& where) {
  const auto n = p.A.rows();
  const auto m = p.B.cols();
  auto fail = [&](const char* what) { throw InvalidArgument(where + ": " + what); };
  if (p.A.cols() != n) fail("A must be square");
  if (p.B.rows() != n) fail("B must have as many rows as A");
  if (p.Q.rows() != n || p.Q.cols() != n) fail("Q must match A");
  if (p.R.rows() != m || p.R.cols() != m) fail("R must be square with one row per input");
  if (p.H && (p.H->rows() != n || p.H->cols() != m)) fail("H must be n x m");
  if (p.K && (p.K->rows() != m || p.K->cols() != n)) fail("K must be m x n");
  if (p.x0.size() != n) fail("x0 must have one entry per state");
  if (p.xhat0 && p.xhat0->size() != n) fail("xhat0 must have one entry per state");
  if (p.noise && (p.noise->rows() != n || p.noise->cols() != n)) fail("noise must be n x n");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }
  const std::string where = "scenario";
  yaml::require_keys(root, where, {"name", "link", "plants", "design", "simulation"});
  Scenario sc;
  if (root["name"]) sc.name = yaml::as<std::string>(root["name"], "scenario.name");

  const YAML::Node link = yaml::required(root, where, "link");
  yaml::require_keys(link, "link", {"bandwidth", "delay", "packet_size", "queue_capacity", "ack_packet_size"});
  sc.link.bandwidth = yaml::as<double>(yaml::required(link, "link", "bandwidth"), "link.bandwidth");
  sc.link.delay = Seconds(yaml::as<double>(yaml::required(link, "link", "delay"), "link.delay"));
  sc.link.packet_size = yaml::as<double>(yaml::required(link, "link", "packet_size"), "link.packet_size");
  sc.link.queue_capacity = yaml::as<int>(yaml::required(link, "link", "queue_capacity"), "link.queue_capacity");
  if (link["ack_packet_size"]) {
    sc.ack_packet_size = yaml::as<double>(link["ack_packet_size"], "link.ack_packet_size");
    if (!(*sc.ack_packet_size >= 0)) throw InvalidArgument("link.ack_packet_size must be non-negative");
  }
  if (!(sc.link.bandwidth > 0) || !(sc.link.packet_size > 0) || !(sc.link.delay.count() >= 0)) {
    throw InvalidArgument("link: bandwidth and packet_size must be positive, delay non-negative");
  }

  const YAML::Node plants = yaml::required(root, where, "plants");
  if (!plants.IsSequence() || plants.size() == 0) throw InvalidArgument("plants: expected a non-empty list");
  for (std::size_t i = 0; i < plants.size(); ++i) {
    const std::string w = "plants[" + std::to_string(i) + "]";
    const PlantSpec p = parse_plant(plants[i], w);
    check_plant_shapes(p, w);
    const int count = plants[i]["count"] ? yaml::as<int>(plants[i]["count"], w + ".count") : 1;
    if (count < 1) throw InvalidArgument(w + ".count must be positive");
    for (int c = 0; c < count; ++c) sc.plants.push_back(p);
  }
  if (sc.loop_count() < 2 || sc.loop_count() > ModeSet::kMaxLoops) {
    throw InvalidArgument("scenario: need between 2 and " + std::to_string(ModeSet::kMaxLoops) + " loops");
  }
  if (sc.link.queue_capacity < 1 || sc.link.queue_capacity > sc.loop_count()) {
    throw InvalidArgument("link.queue_capacity must lie in [1, number of loops]");
  }
  if (root["design"]) parse_design(root["design"], sc.design);
  if (root["simulation"]) parse_sim(root["simulation"], sc.sim);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

LinkSpec effective_link(const Scenario& scenario, int capacity) {
  LinkSpec link = scenario.link;
  link.queue_capacity = capacity;
  if (scenario.ack_packet_size && scenario.sim.ack_mode == AckMode::Acknowledged) {
    link.delay = 2 * link.delay + Seconds(*scenario.ack_packet_size / link.bandwidth);
  }
  return link;
}

EpisodeSetup build_setup(const Scenario& scenario, int capacity) {
  if (capacity < 1 || capacity > scenario.loop_count()) {
    throw InvalidArgument("queue capacity must lie in [1, number of loops]");
  }
  const LinkSpec link = effective_link(scenario, capacity);
  const SamplingPeriod period = sampling_period(link);
  EpisodeSetup setup;
  setup.period = period.period;
  setup.utilization = utilization(link, period.period);
  for (const auto& p : scenario.plants) setup.models.push_back(make_ncs(p, period.period));
  return setup;
}

LumpedSystem build_lumped(const EpisodeSetup& setup, int capacity) {
  std::vector<AugmentedNcs> loops;
  for (const auto& m : setup.models) loops.push_back(augment(m));
  return build_lumped(std::move(loops), enumerate_modes(static_cast<int>(setup.models.size()), capacity));
}

}  // namespace ncsched
