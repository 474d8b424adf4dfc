#include "gridfreq/layered.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridfreq {

namespace {
// overflow guard for the barrier quotient near the threshold; min/max
// outcome is unchanged
constexpr double kBarrierClamp = 1e12;
}  // namespace

void SafetySpec::validate(const NetworkModel& net) const {
  const int n = net.node_count;
  if (omega_min.size() != n || omega_max.size() != n || thr_min.size() != n ||
      thr_max.size() != n || gamma_lower.size() != n || gamma_upper.size() != n) {
    throw std::invalid_argument("safety spec: dimension mismatch");
  }
  for (int i : net.monitored) {
    if (!(omega_min(i) < thr_min(i) && thr_min(i) < 0.0 && 0.0 < thr_max(i) &&
          thr_max(i) < omega_max(i))) {
      throw std::invalid_argument("safety spec: bounds at node " + std::to_string(i + 1) +
                                  " violate omega_min < thr_min < 0 < thr_max < omega_max");
    }
    if (gamma_lower(i) <= 0.0 || gamma_upper(i) <= 0.0) {
      throw std::invalid_argument("safety spec: nonpositive gain at node " +
                                  std::to_string(i + 1));
    }
  }
}

SafetySpec SafetySpec::uniform(const NetworkModel& net, double bound, double threshold,
                               double gamma) {
  const int n = net.node_count;
  SafetySpec spec;
  spec.omega_min = Eigen::VectorXd::Constant(n, -bound);
  spec.omega_max = Eigen::VectorXd::Constant(n, bound);
  spec.thr_min = Eigen::VectorXd::Constant(n, -threshold);
  spec.thr_max = Eigen::VectorXd::Constant(n, threshold);
  spec.gamma_lower = Eigen::VectorXd::Constant(n, gamma);
  spec.gamma_upper = Eigen::VectorXd::Constant(n, gamma);
  spec.validate(net);
  return spec;
}

Eigen::VectorXd stability_filter(const NetworkModel& net, const Eigen::VectorXd& alpha_mpc,
                                 const Eigen::VectorXd& u_mpc,
                                 const Eigen::VectorXd& epsilon) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(net.node_count);
  for (int i : net.controlled) {
    const double band = epsilon(i) * std::abs(alpha_mpc(i));
    out(i) = std::clamp(u_mpc(i), -band, band);
  }
  return out;
}

Eigen::VectorXd lowpass_derivative(const NetworkModel& net, const Eigen::VectorXd& alpha_mpc,
                                   const Eigen::VectorXd& omega,
                                   const Eigen::VectorXd& u_hat,
                                   const Eigen::VectorXd& filter_time) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(net.node_count);
  for (int i : net.controlled) {
    if (filter_time(i) <= 0.0) {
      throw std::invalid_argument("low-pass filter: nonpositive time constant at node " +
                                  std::to_string(i + 1));
    }
    out(i) = -alpha_mpc(i) / filter_time(i) - omega(i) + u_hat(i);
  }
  return out;
}

Eigen::VectorXd top_layer(const NetworkModel& net, const SystemState& s,
                          const Eigen::VectorXd& p, const SafetySpec& spec) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(net.node_count);
  const Eigen::VectorXd net_flow = net.incidence.transpose() * s.flow;
  for (int i : net.monitored) {
    const double w = s.omega(i);
    if (w >= spec.thr_min(i) && w <= spec.thr_max(i)) continue;
    const double v = net.damping(i) * w + net_flow(i) - p(i) - s.alpha_mpc(i);
    if (w > spec.thr_max(i)) {
      double barrier = spec.gamma_upper(i) * (spec.omega_max(i) - w) / (w - spec.thr_max(i));
      barrier = std::min(barrier, kBarrierClamp);
      out(i) = std::min(0.0, barrier + v);
    } else {
      double barrier = spec.gamma_lower(i) * (spec.omega_min(i) - w) / (spec.thr_min(i) - w);
      barrier = std::max(barrier, -kBarrierClamp);
      out(i) = std::max(0.0, barrier + v);
    }
  }
  return out;
}

Eigen::VectorXd compose(const Eigen::VectorXd& alpha_mpc, const Eigen::VectorXd& alpha_df) {
  return alpha_mpc + alpha_df;
}

}  // namespace gridfreq
