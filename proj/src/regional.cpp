#include "gridfreq/regional.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace gridfreq {

bool SamplingSchedule::due(double t, double tol) const {
  if (period <= 0.0) throw std::invalid_argument("schedule: nonpositive period");
  const double k = std::round((t - offset) / period);
  return k >= 0.0 && std::abs(t - (offset + k * period)) <= tol;
}

Eigen::VectorXd boundary_injection_forecast(const NetworkModel& net, const Region& region,
                                            const Eigen::VectorXd& flow) {
  if (flow.size() != net.edge_count()) {
    throw std::invalid_argument("boundary forecast: flow dimension mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<int>(region.nodes.size()));
  std::vector<int> local_of(net.node_count, -1);
  for (size_t i = 0; i < region.nodes.size(); ++i) {
    local_of[region.nodes[i]] = static_cast<int>(i);
  }
  for (int k : region.boundary_edges) {
    const Edge& e = net.edges[k];
    const int from_local = local_of[e.from - 1];
    const int to_local = local_of[e.to - 1];
    // flow is signed positive-end -> negative-end; the inside endpoint sees
    // it as an injection with the matching sign
    if (to_local >= 0) out(to_local) += flow(k);
    if (from_local >= 0) out(from_local) -= flow(k);
  }
  return out;
}

Snapshot regional_snapshot(const NetworkModel& net, const Region& region, const Subnet& sub,
                           const SystemState& s, const InjectionProfile& injection,
                           double t, const MpcConfig& cfg) {
  const int nr = sub.node_count();
  const int mr = sub.edge_count();
  const int N = cfg.steps();

  Snapshot snap;
  snap.time = t;
  snap.flow.resize(mr);
  for (int k = 0; k < mr; ++k) snap.flow(k) = s.flow(sub.global_edges[k]);
  snap.omega.resize(nr);
  snap.alpha_mpc.resize(nr);
  for (int i = 0; i < nr; ++i) {
    snap.omega(i) = s.omega(sub.global_nodes[i]);
    snap.alpha_mpc(i) = s.alpha_mpc(sub.global_nodes[i]);
  }

  const Eigen::VectorXd boundary = boundary_injection_forecast(net, region, s.flow);
  snap.forecast.resize(N, nr);
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd p = injection.evaluate(t + k * cfg.step);
    for (int i = 0; i < nr; ++i) {
      snap.forecast(k, i) = p(sub.global_nodes[i]) + boundary(i);
    }
  }
  return snap;
}

DistributedController::DistributedController(const NetworkModel& net,
                                             const Partition& partition,
                                             std::vector<SamplingSchedule> schedules,
                                             MpcConfig cfg,
                                             std::vector<double> region_penalty)
    : net_(net),
      partition_(partition),
      schedules_(std::move(schedules)),
      cfg_(std::move(cfg)),
      region_penalty_(std::move(region_penalty)) {
  const size_t d = partition_.regions.size();
  if (schedules_.size() != d) {
    throw std::invalid_argument("distributed controller: one schedule per region required");
  }
  if (!region_penalty_.empty() && region_penalty_.size() != d) {
    throw std::invalid_argument("distributed controller: penalty override size mismatch");
  }
  cfg_.validate(net_);
  subnets_.reserve(d);
  for (const Region& region : partition_.regions) {
    subnets_.push_back(region_subnet(net_, region));
  }
  last_results_.resize(d);
  u_hold_ = Eigen::VectorXd::Zero(net_.node_count);
}

void DistributedController::reset() {
  u_hold_.setZero();
  last_results_.assign(partition_.regions.size(), MpcResult{});
}

int DistributedController::update(double t, const SystemState& state,
                                  const InjectionProfile& injection, bool parallel,
                                  int max_threads) {
  std::vector<int> due;
  for (size_t b = 0; b < schedules_.size(); ++b) {
    if (schedules_[b].due(t)) due.push_back(static_cast<int>(b));
  }
  if (due.empty()) return 0;

  auto solve_region = [&](int b) {
    MpcConfig cfg = cfg_;
    if (!region_penalty_.empty()) cfg.penalty_d = region_penalty_[b];
    const Snapshot snap = regional_snapshot(net_, partition_.regions[b], subnets_[b], state,
                                            injection, t, cfg);
    last_results_[b] = solve(subnets_[b], cfg, snap);
  };

  if (parallel && due.size() > 1) {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    const int cap = max_threads > 0 ? std::min(max_threads, hw) : hw;
    size_t next = 0;
    while (next < due.size()) {
      std::vector<std::thread> pool;
      for (int c = 0; c < cap && next < due.size(); ++c, ++next) {
        pool.emplace_back(solve_region, due[next]);
      }
      for (auto& th : pool) th.join();
    }
  } else {
    for (int b : due) solve_region(b);
  }

  // write-back is sequential and touches disjoint node sets
  for (int b : due) {
    const Subnet& sub = subnets_[b];
    for (int j : sub.controlled) {
      u_hold_(sub.global_nodes[j]) = last_results_[b].u_star(j);
    }
  }
  return static_cast<int>(due.size());
}

}  // namespace gridfreq
