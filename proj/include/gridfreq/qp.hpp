#pragma once

#include <Eigen/Dense>

namespace gridfreq {

/// Dense convex quadratic program
///   min  x^T K x + q^T x   s.t.  G x <= w
/// with K symmetric positive semidefinite.
struct QpProblem {
  Eigen::MatrixXd K;
  Eigen::VectorXd q;
  Eigen::MatrixXd G;
  Eigen::VectorXd w;

  double objective(const Eigen::VectorXd& x) const {
    return x.dot(K * x) + q.dot(x);
  }
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd dual;  // multipliers of G x <= w
  double objective = 0.0;
  QpStatus status = QpStatus::MaxIterations;
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
  int iterations = 0;
};

/// Mehrotra-style predictor-corrector interior point method on dense
/// factorizations. Deterministic: identical inputs give identical output.
QpSolution solve_qp(const QpProblem& prob, double tol = 1e-8, int max_iter = 100);

}  // namespace gridfreq
