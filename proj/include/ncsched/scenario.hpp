#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncsched/design.hpp"
#include "ncsched/model.hpp"
#include "ncsched/sim.hpp"

namespace ncsched {

struct Scenario {
  std::string name;
  std::vector<PlantSpec> plants;
  LinkSpec link;
  /// Acknowledgment packet size in bits. When set and acknowledgments are
  /// used, the link delay becomes 2D + L_ack / B.
  std::optional<double> ack_packet_size;
  DesignOptions design;
  SimConfig sim;

  int loop_count() const { return static_cast<int>(plants.size()); }
};

/// Strict parse: unknown keys, missing required keys, and inconsistent
/// dimensions throw InvalidArgument. See the README for the schema.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Link of the scenario at queue capacity q, with the acknowledgment delay
/// applied when configured.
LinkSpec effective_link(const Scenario& scenario, int capacity);

/// Models discretized at T_s(q), plus T_s and the link utilization.
EpisodeSetup build_setup(const Scenario& scenario, int capacity);

LumpedSystem build_lumped(const EpisodeSetup& setup, int capacity);

}  // namespace ncsched
