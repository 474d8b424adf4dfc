#pragma once

#include <string>
#include <vector>

#include "gridfreq/network.hpp"

namespace testutil {

inline gridfreq::NetworkModel two_bus(double b = 1.0, double M = 1.0, double E = 1.0) {
  return gridfreq::build_network({{1, M, E}, {2, M, E}}, {{1, 2, b}}, {1}, {1});
}

inline gridfreq::NetworkModel three_bus_line() {
  return gridfreq::build_network({{1, 1.0, 1.0}, {2, 0.5, 0.8}, {3, 2.0, 1.2}},
                                 {{1, 2, 1.5}, {2, 3, 2.0}}, {1, 3}, {1});
}

inline gridfreq::NetworkModel triangle() {
  return gridfreq::build_network({{1, 1.0, 1.0}, {2, 1.0, 1.0}, {3, 1.0, 1.0}},
                                 {{1, 2, 1.0}, {2, 3, 2.0}, {1, 3, 0.5}}, {1, 2, 3}, {1});
}

inline std::string data_path(const std::string& name) {
  return std::string(GRIDFREQ_DATA_DIR) + "/" + name;
}

}  // namespace testutil
