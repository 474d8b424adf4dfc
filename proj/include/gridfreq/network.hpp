#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gridfreq {

/// Transmission line. `from` is the positive end of the oriented edge;
/// node ids are 1-based (bus numbering).
struct Edge {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
};

/// Validated power-network graph with oriented incidence structure.
/// Node indices are 1-based at the interface and 0-based internally
/// (id = index + 1).
struct NetworkModel {
  int node_count = 0;
  std::vector<Edge> edges;

  Eigen::VectorXd inertia;      // M_i > 0, per node
  Eigen::VectorXd damping;      // E_i > 0, per node
  Eigen::VectorXd susceptance;  // b_e > 0, per edge (diagonal of Y_b)
  Eigen::MatrixXd incidence;    // m x n, one +1 and one -1 per row

  std::vector<int> controlled;  // 0-based, sorted
  std::vector<int> monitored;   // 0-based, sorted, subset of controlled

  int edge_count() const { return static_cast<int>(edges.size()); }
  bool is_controlled(int node) const;
  bool is_monitored(int node) const;

  /// Y_b * D, cached shape for the flow dynamics.
  Eigen::MatrixXd weighted_incidence() const;
};

struct NodeParams {
  int id = 0;  // 1-based
  double inertia = 0.0;
  double damping = 0.0;
};

/// Assembles and validates a NetworkModel. Edge orientation follows input
/// order: the first listed endpoint is the positive end.
/// Throws std::invalid_argument on: empty inputs, nonpositive parameters,
/// duplicate edges, disconnected graph, monitored set not contained in the
/// controlled set.
NetworkModel build_network(const std::vector<NodeParams>& nodes,
                           const std::vector<Edge>& edges,
                           const std::vector<int>& controlled_ids,
                           const std::vector<int>& monitored_ids);

/// One operator-designed region: induced subgraph plus derived edge and
/// controller sets. Node/edge entries are 0-based indices into the network.
struct Region {
  std::vector<int> nodes;           // sorted
  std::vector<int> internal_edges;  // edges with both ends in `nodes`
  std::vector<int> boundary_edges;  // edges with exactly one end in `nodes`
  std::vector<int> controlled;      // controlled nodes inside the region
  std::vector<int> monitored;
};

struct Partition {
  std::vector<Region> regions;
};

/// Derives internal/boundary edge sets and controller subsets for the given
/// region node sets (1-based ids). Rejects: a controlled node covered by no
/// region, a controlled node shared by two regions.
Partition validate_partition(const NetworkModel& net,
                             const std::vector<std::vector<int>>& region_node_ids);

/// Restriction of the network to a node subset, used by the MPC layer both
/// for regions and for the whole network (centralized case).
struct Subnet {
  Eigen::MatrixXd incidence;    // m_r x n_r
  Eigen::VectorXd susceptance;  // m_r
  Eigen::VectorXd inertia;      // n_r
  Eigen::VectorXd damping;      // n_r
  std::vector<int> global_nodes;  // local -> global node index (0-based)
  std::vector<int> global_edges;  // local -> global edge index
  std::vector<int> controlled;    // local indices
  std::vector<int> monitored;     // local indices

  int node_count() const { return static_cast<int>(global_nodes.size()); }
  int edge_count() const { return static_cast<int>(global_edges.size()); }
};

Subnet whole_network_subnet(const NetworkModel& net);
Subnet region_subnet(const NetworkModel& net, const Region& region);

}  // namespace gridfreq
