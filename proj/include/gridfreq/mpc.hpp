#pragma once

#include <Eigen/Dense>

#include "gridfreq/network.hpp"
#include "gridfreq/qp.hpp"

namespace gridfreq {

/// Receding-horizon problem parameters. Per-node vectors are sized to the
/// full network and restricted through Subnet::global_nodes.
struct MpcConfig {
  double horizon = 2.0;  // seconds covered by each solve
  double step = 0.02;    // prediction discretization step T
  Eigen::VectorXd weight;       // c_i > 0, used at controlled nodes
  double penalty_d = 100.0;     // weight of the band-violation slack
  Eigen::VectorXd epsilon;      // sensitivity bound coefficients
  Eigen::VectorXd filter_time;  // low-pass time constants T_i
  Eigen::VectorXd omega_min;    // band for the soft frequency constraint
  Eigen::VectorXd omega_max;

  int steps() const;  // N = ceil(horizon / step)

  /// Rejects eps_i * T_i >= 1 at any controlled node, nonpositive weights
  /// or steps.
  void validate(const NetworkModel& net) const;
};

/// Sampled state plus injection forecast for one solve. All vectors are
/// subnet-local; forecast row k holds the injection predicted at
/// time + k*step.
struct Snapshot {
  double time = 0.0;
  Eigen::VectorXd flow;
  Eigen::VectorXd omega;
  Eigen::VectorXd alpha_mpc;
  Eigen::MatrixXd forecast;  // N x n_r
};

struct MpcResult {
  Eigen::VectorXd u_star;  // subnet-local, zero off the controlled set
  double beta_star = 0.0;
  Eigen::MatrixXd pred_flow;   // (N+1) x m_r
  Eigen::MatrixXd pred_omega;  // (N+1) x n_r
  Eigen::MatrixXd pred_alpha;  // (N+1) x n_r
  QpSolution qp;
};

/// Condenses the horizon problem into a QP over (u restricted to the
/// controlled set, beta): the prediction equalities are eliminated by
/// forward substitution so every predicted frequency is affine in u.
/// Decision vector layout: [u_1..u_nu, beta]. Rows: 2*N*|monitored|
/// soft band rows, 2*|controlled| sensitivity rows, then beta >= 0.
QpProblem build_problem(const Subnet& sub, const MpcConfig& cfg, const Snapshot& snap);

/// Solves the condensed QP and reconstructs predicted trajectories by
/// forward recursion. The result is held constant until the next sample.
MpcResult solve(const Subnet& sub, const MpcConfig& cfg, const Snapshot& snap);

/// Empirical Lipschitz estimate of u* over `trials` perturbed snapshot
/// pairs drawn within `radius` of the base snapshot.
double lipschitz_probe(const Subnet& sub, const MpcConfig& cfg, const Snapshot& base,
                       double radius, int trials, unsigned seed = 1);

}  // namespace gridfreq
