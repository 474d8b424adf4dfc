#pragma once

#include <string>

#include "gridfreq/network.hpp"
#include "gridfreq/sim.hpp"

namespace gridfreq {

/// Loads the JSON network dataset:
/// {"nodes":[{"id","M","E"}...], "edges":[{"from","to","b"}...],
///  "controlled":[ids], "monitored":[ids], "injections":{"<id>": p0, ...}}
NetworkModel load_network(const std::string& path);

/// Base injections from the same file (zero where omitted).
Eigen::VectorXd load_base_injections(const std::string& path, const NetworkModel& net);

struct LoadedScenario {
  NetworkModel network;
  Scenario scenario;
  Eigen::VectorXd base_injection;
};

/// Loads a scenario file; relative paths inside it resolve against the
/// scenario file's directory. Performs full validation (including the
/// epsilon*filter_time < 1 requirement).
LoadedScenario load_scenario(const std::string& path);

/// Partition file: {"regions":[[ids],...]}.
std::vector<std::vector<int>> load_partition_file(const std::string& path);

}  // namespace gridfreq
