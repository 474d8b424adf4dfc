#pragma once

#include <functional>

#include <Eigen/Dense>

#include "gridfreq/network.hpp"

namespace gridfreq {

/// Plant state: line flows f (per edge), frequency deviations omega (Hz,
/// per node), and the low-pass filter states alpha_mpc (zero off the
/// controlled set).
struct SystemState {
  Eigen::VectorXd flow;
  Eigen::VectorXd omega;
  Eigen::VectorXd alpha_mpc;

  static SystemState zero(const NetworkModel& net);
};

struct StateDerivative {
  Eigen::VectorXd dflow;
  Eigen::VectorXd domega;
};

/// Time-varying active power injection. p(t) = p_star for t >= t_bar and
/// sum(p_star) = 0 (balance tolerance 1e-9).
struct InjectionProfile {
  std::function<Eigen::VectorXd(double)> evaluate;
  double t_bar = 0.0;
  Eigen::VectorXd p_star;

  void validate(const NetworkModel& net) const;
};

///   df/dt     = Y_b D omega
///   M domega/dt = -E omega - D^T f + p + alpha
/// Throws on dimension mismatch or a nonzero alpha entry at an
/// uncontrolled node.
StateDerivative derivative(const NetworkModel& net, const SystemState& s,
                           const Eigen::VectorXd& p, const Eigen::VectorXd& alpha);

/// One RK4 step of (f, omega) with p and alpha held constant; alpha_mpc is
/// carried unchanged (the closed-loop engine integrates the filter jointly,
/// see sim.hpp). Throws std::runtime_error on nonfinite result.
SystemState step(const NetworkModel& net, const SystemState& s,
                 const Eigen::VectorXd& p, const Eigen::VectorXd& alpha, double h);

/// Steady flow reached from f0 under the constant balanced injection p_star:
/// f_inf = f0 + Y_b D xi with (D^T Y_b D) xi = p_star - D^T f0 solved in the
/// minimum-norm sense. Satisfies D^T f_inf = p_star.
Eigen::VectorXd equilibrium_flow(const NetworkModel& net, const Eigen::VectorXd& f0,
                                 const Eigen::VectorXd& p_star);

}  // namespace gridfreq
