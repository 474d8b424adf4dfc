#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gridfreq/mpc.hpp"
#include "gridfreq/network.hpp"
#include "gridfreq/plant.hpp"

namespace gridfreq {

/// Uniform sampling grid {offset + k*period} for one region.
struct SamplingSchedule {
  double period = 1.0;
  double offset = 0.0;

  bool due(double t, double tol = 1e-9) const;
};

/// Constant per-node injections standing in for boundary-line flows over
/// the horizon: inflow minus outflow across the region's boundary edges,
/// evaluated at the current flow state. Zero for nodes not incident to a
/// boundary edge.
Eigen::VectorXd boundary_injection_forecast(const NetworkModel& net, const Region& region,
                                            const Eigen::VectorXd& flow);

/// Restriction of the global state and forecast to one region; the forecast
/// adds the boundary-flow constants.
Snapshot regional_snapshot(const NetworkModel& net, const Region& region, const Subnet& sub,
                           const SystemState& s, const InjectionProfile& injection,
                           double t, const MpcConfig& cfg);

/// Holds the per-region sampled MPC outputs and refreshes them on each
/// region's own schedule. Regions read the same immutable state snapshot
/// and write disjoint entries of the hold table, so the merged result is
/// independent of processing order.
class DistributedController {
 public:
  DistributedController(const NetworkModel& net, const Partition& partition,
                        std::vector<SamplingSchedule> schedules, MpcConfig cfg,
                        std::vector<double> region_penalty = {});

  void reset();

  /// Re-solves every region whose schedule fires at t. Returns the number
  /// of regions updated.
  int update(double t, const SystemState& state, const InjectionProfile& injection,
             bool parallel = false, int max_threads = 0);

  const Eigen::VectorXd& u_mpc() const { return u_hold_; }
  const MpcResult& last_result(int region) const { return last_results_.at(region); }
  const Subnet& subnet(int region) const { return subnets_.at(region); }
  int region_count() const { return static_cast<int>(subnets_.size()); }

 private:
  const NetworkModel& net_;
  Partition partition_;
  std::vector<SamplingSchedule> schedules_;
  MpcConfig cfg_;
  std::vector<double> region_penalty_;
  std::vector<Subnet> subnets_;
  std::vector<MpcResult> last_results_;
  Eigen::VectorXd u_hold_;
};

}  // namespace gridfreq
