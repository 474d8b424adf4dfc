#pragma once

#include <Eigen/Dense>

#include "gridfreq/network.hpp"
#include "gridfreq/plant.hpp"

namespace gridfreq {

/// Per-node safety band and barrier parameters for the direct-feedback
/// layer. Vectors are network-sized; only entries at monitored nodes are
/// used. Requires omega_min < thr_min < 0 < thr_max < omega_max at every
/// monitored node.
struct SafetySpec {
  Eigen::VectorXd omega_min;
  Eigen::VectorXd omega_max;
  Eigen::VectorXd thr_min;
  Eigen::VectorXd thr_max;
  Eigen::VectorXd gamma_lower;
  Eigen::VectorXd gamma_upper;

  void validate(const NetworkModel& net) const;

  static SafetySpec uniform(const NetworkModel& net, double bound, double threshold,
                            double gamma);
};

/// State-dependent saturation of the sampled MPC output:
///   uhat_i = sat(u_i; eps_i*|alpha_i|, -eps_i*|alpha_i|)  for controlled i,
///   uhat_i = 0 otherwise.
/// Guarantees alpha_i * uhat_i <= eps_i * alpha_i^2 for every input.
Eigen::VectorXd stability_filter(const NetworkModel& net, const Eigen::VectorXd& alpha_mpc,
                                 const Eigen::VectorXd& u_mpc,
                                 const Eigen::VectorXd& epsilon);

/// dalpha_i/dt = -alpha_i/T_i - omega_i + uhat_i on controlled nodes, 0 off.
Eigen::VectorXd lowpass_derivative(const NetworkModel& net, const Eigen::VectorXd& alpha_mpc,
                                   const Eigen::VectorXd& omega,
                                   const Eigen::VectorXd& u_hat,
                                   const Eigen::VectorXd& filter_time);

/// Real-time direct feedback. Active only outside the threshold dead band
/// at monitored nodes; pushes the frequency derivative toward the band.
Eigen::VectorXd top_layer(const NetworkModel& net, const SystemState& s,
                          const Eigen::VectorXd& p, const SafetySpec& spec);

Eigen::VectorXd compose(const Eigen::VectorXd& alpha_mpc, const Eigen::VectorXd& alpha_df);

}  // namespace gridfreq
