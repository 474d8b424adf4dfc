#include "gridfreq/network.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

namespace gridfreq {

namespace {

bool contains(const std::vector<int>& sorted, int v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

std::vector<int> to_internal_sorted(const std::vector<int>& ids, int n,
                                    const std::string& what) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 1 || id > n) {
      throw std::invalid_argument(what + ": node id " + std::to_string(id) +
                                  " out of range [1," + std::to_string(n) + "]");
    }
    out.push_back(id - 1);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument(what + ": duplicate node id");
  }
  return out;
}

}  // namespace

bool NetworkModel::is_controlled(int node) const {
  return contains(controlled, node);
}

bool NetworkModel::is_monitored(int node) const {
  return contains(monitored, node);
}

Eigen::MatrixXd NetworkModel::weighted_incidence() const {
  return susceptance.asDiagonal() * incidence;
}

NetworkModel build_network(const std::vector<NodeParams>& nodes,
                           const std::vector<Edge>& edges,
                           const std::vector<int>& controlled_ids,
                           const std::vector<int>& monitored_ids) {
  if (nodes.empty()) throw std::invalid_argument("network: empty node list");
  if (edges.empty()) throw std::invalid_argument("network: empty edge list");

  const int n = static_cast<int>(nodes.size());
  const int m = static_cast<int>(edges.size());

  NetworkModel net;
  net.node_count = n;
  net.edges = edges;
  net.inertia.resize(n);
  net.damping.resize(n);

  std::vector<bool> seen(n, false);
  for (const NodeParams& np : nodes) {
    if (np.id < 1 || np.id > n) {
      throw std::invalid_argument("network: node id " + std::to_string(np.id) +
                                  " outside 1.." + std::to_string(n));
    }
    if (seen[np.id - 1]) {
      throw std::invalid_argument("network: duplicate node id " + std::to_string(np.id));
    }
    seen[np.id - 1] = true;
    if (np.inertia <= 0.0) {
      throw std::invalid_argument("network: nonpositive inertia at node " +
                                  std::to_string(np.id));
    }
    if (np.damping <= 0.0) {
      throw std::invalid_argument("network: nonpositive damping at node " +
                                  std::to_string(np.id));
    }
    net.inertia(np.id - 1) = np.inertia;
    net.damping(np.id - 1) = np.damping;
  }

  net.susceptance.resize(m);
  net.incidence = Eigen::MatrixXd::Zero(m, n);
  std::set<std::pair<int, int>> edge_keys;
  for (int k = 0; k < m; ++k) {
    const Edge& e = edges[k];
    if (e.from < 1 || e.from > n || e.to < 1 || e.to > n || e.from == e.to) {
      throw std::invalid_argument("network: bad edge endpoints (" +
                                  std::to_string(e.from) + "," + std::to_string(e.to) + ")");
    }
    if (e.susceptance <= 0.0) {
      throw std::invalid_argument("network: nonpositive susceptance on edge (" +
                                  std::to_string(e.from) + "," + std::to_string(e.to) + ")");
    }
    auto key = std::minmax(e.from, e.to);
    if (!edge_keys.insert(key).second) {
      throw std::invalid_argument("network: duplicate edge (" + std::to_string(e.from) +
                                  "," + std::to_string(e.to) + ")");
    }
    net.susceptance(k) = e.susceptance;
    net.incidence(k, e.from - 1) = 1.0;
    net.incidence(k, e.to - 1) = -1.0;
  }

  // connectivity (BFS over the undirected edge list)
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : edges) {
    adj[e.from - 1].push_back(e.to - 1);
    adj[e.to - 1].push_back(e.from - 1);
  }
  std::vector<bool> visited(n, false);
  std::vector<int> stack{0};
  visited[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!visited[w]) {
        visited[w] = true;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != n) throw std::invalid_argument("network: graph is disconnected");

  net.controlled = to_internal_sorted(controlled_ids, n, "controlled set");
  net.monitored = to_internal_sorted(monitored_ids, n, "monitored set");
  for (int i : net.monitored) {
    if (!contains(net.controlled, i)) {
      throw std::invalid_argument("network: monitored node " + std::to_string(i + 1) +
                                  " is not controlled");
    }
  }
  return net;
}

Partition validate_partition(const NetworkModel& net,
                             const std::vector<std::vector<int>>& region_node_ids) {
  Partition part;
  part.regions.reserve(region_node_ids.size());

  const int n = net.node_count;
  std::vector<int> controlled_owner(n, -1);

  for (size_t r = 0; r < region_node_ids.size(); ++r) {
    Region region;
    region.nodes = to_internal_sorted(region_node_ids[r], n,
                                      "partition region " + std::to_string(r + 1));
    std::vector<bool> in_region(n, false);
    for (int v : region.nodes) in_region[v] = true;

    for (int k = 0; k < net.edge_count(); ++k) {
      const Edge& e = net.edges[k];
      const bool a = in_region[e.from - 1];
      const bool b = in_region[e.to - 1];
      if (a && b) {
        region.internal_edges.push_back(k);
      } else if (a || b) {
        region.boundary_edges.push_back(k);
      }
    }
    for (int v : region.nodes) {
      if (net.is_controlled(v)) {
        if (controlled_owner[v] >= 0) {
          throw std::invalid_argument(
              "partition: controlled node " + std::to_string(v + 1) +
              " belongs to regions " + std::to_string(controlled_owner[v] + 1) +
              " and " + std::to_string(r + 1));
        }
        controlled_owner[v] = static_cast<int>(r);
        region.controlled.push_back(v);
        if (net.is_monitored(v)) region.monitored.push_back(v);
      }
    }
    part.regions.push_back(std::move(region));
  }

  for (int v : net.controlled) {
    if (controlled_owner[v] < 0) {
      throw std::invalid_argument("partition: controlled node " + std::to_string(v + 1) +
                                  " is covered by no region");
    }
  }
  return part;
}

namespace {

Subnet make_subnet(const NetworkModel& net, const std::vector<int>& nodes,
                   const std::vector<int>& edges_in, const std::vector<int>& controlled,
                   const std::vector<int>& monitored) {
  Subnet sub;
  sub.global_nodes = nodes;
  sub.global_edges = edges_in;

  const int nr = static_cast<int>(nodes.size());
  const int mr = static_cast<int>(edges_in.size());
  std::vector<int> local_of(net.node_count, -1);
  for (int i = 0; i < nr; ++i) local_of[nodes[i]] = i;

  sub.inertia.resize(nr);
  sub.damping.resize(nr);
  for (int i = 0; i < nr; ++i) {
    sub.inertia(i) = net.inertia(nodes[i]);
    sub.damping(i) = net.damping(nodes[i]);
  }
  sub.susceptance.resize(mr);
  sub.incidence = Eigen::MatrixXd::Zero(mr, nr);
  for (int k = 0; k < mr; ++k) {
    const Edge& e = net.edges[edges_in[k]];
    sub.susceptance(k) = e.susceptance;
    sub.incidence(k, local_of[e.from - 1]) = 1.0;
    sub.incidence(k, local_of[e.to - 1]) = -1.0;
  }
  for (int g : controlled) sub.controlled.push_back(local_of[g]);
  for (int g : monitored) sub.monitored.push_back(local_of[g]);
  return sub;
}

}  // namespace

Subnet whole_network_subnet(const NetworkModel& net) {
  std::vector<int> nodes(net.node_count);
  for (int i = 0; i < net.node_count; ++i) nodes[i] = i;
  std::vector<int> edges_in(net.edge_count());
  for (int k = 0; k < net.edge_count(); ++k) edges_in[k] = k;
  return make_subnet(net, nodes, edges_in, net.controlled, net.monitored);
}

Subnet region_subnet(const NetworkModel& net, const Region& region) {
  return make_subnet(net, region.nodes, region.internal_edges, region.controlled,
                     region.monitored);
}

}  // namespace gridfreq
