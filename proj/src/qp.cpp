#include "gridfreq/qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridfreq {

namespace {

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

}  // namespace

QpSolution solve_qp(const QpProblem& prob, double tol, int max_iter) {
  const int n = static_cast<int>(prob.K.rows());
  const int m = static_cast<int>(prob.G.rows());
  if (prob.K.cols() != n || prob.q.size() != n ||
      (m > 0 && prob.G.cols() != n) || prob.w.size() != m) {
    throw std::invalid_argument("solve_qp: dimension mismatch");
  }
  if (!prob.K.isApprox(prob.K.transpose(), 1e-12)) {
    throw std::invalid_argument("solve_qp: K is not symmetric");
  }

  const Eigen::MatrixXd H = 2.0 * prob.K;
  const double reg = 1e-12 * (1.0 + H.cwiseAbs().maxCoeff());

  QpSolution sol;
  if (m == 0) {
    Eigen::MatrixXd A = H + reg * Eigen::MatrixXd::Identity(n, n);
    sol.x = A.ldlt().solve(-prob.q);
    sol.dual = Eigen::VectorXd::Zero(0);
    sol.objective = prob.objective(sol.x);
    sol.status = QpStatus::Optimal;
    sol.stationarity_residual = (H * sol.x + prob.q).lpNorm<Eigen::Infinity>();
    return sol;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s(m), lam(m);
  for (int i = 0; i < m; ++i) {
    s(i) = std::max(1.0, std::abs(prob.w(i)));
    lam(i) = 1.0;
  }

  const double wscale = 1.0 + prob.w.lpNorm<Eigen::Infinity>();
  const double qscale = 1.0 + prob.q.lpNorm<Eigen::Infinity>();

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd rd = H * x + prob.q + prob.G.transpose() * lam;
    const Eigen::VectorXd rp = prob.G * x + s - prob.w;
    const double mu = s.dot(lam) / m;

    sol.iterations = iter;
    sol.primal_residual = (prob.G * x - prob.w).cwiseMax(0.0).lpNorm<Eigen::Infinity>();
    sol.stationarity_residual = rd.lpNorm<Eigen::Infinity>();
    if (rp.lpNorm<Eigen::Infinity>() <= tol * wscale &&
        rd.lpNorm<Eigen::Infinity>() <= tol * qscale * (1.0 + x.lpNorm<Eigen::Infinity>()) &&
        mu <= tol) {
      sol.x = x;
      sol.dual = lam;
      sol.objective = prob.objective(x);
      sol.status = QpStatus::Optimal;
      return sol;
    }

    // divergent multipliers with persistent primal infeasibility certify an
    // empty feasible set
    if (lam.lpNorm<Eigen::Infinity>() > 1e10 &&
        rp.lpNorm<Eigen::Infinity>() > 1e3 * tol * wscale) {
      sol.x = x;
      sol.dual = lam;
      sol.objective = prob.objective(x);
      sol.status = QpStatus::Infeasible;
      return sol;
    }

    const Eigen::VectorXd d = lam.cwiseQuotient(s);
    Eigen::MatrixXd M = H + prob.G.transpose() * d.asDiagonal() * prob.G;
    M.diagonal().array() += reg;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);

    // predictor
    Eigen::VectorXd rc = s.cwiseProduct(lam);
    Eigen::VectorXd rhs =
        -rd - prob.G.transpose() * ((-rc + lam.cwiseProduct(rp)).cwiseQuotient(s));
    Eigen::VectorXd dx_aff = ldlt.solve(rhs);
    Eigen::VectorXd ds_aff = -rp - prob.G * dx_aff;
    Eigen::VectorXd dlam_aff = (-rc - lam.cwiseProduct(ds_aff)).cwiseQuotient(s);

    const double a_aff = std::min(max_step(s, ds_aff), max_step(lam, dlam_aff));
    const double mu_aff =
        (s + a_aff * ds_aff).dot(lam + a_aff * dlam_aff) / m;
    const double sigma = std::pow(mu_aff / mu, 3.0);

    // corrector
    rc = s.cwiseProduct(lam) + ds_aff.cwiseProduct(dlam_aff) -
         sigma * mu * Eigen::VectorXd::Ones(m);
    rhs = -rd - prob.G.transpose() * ((-rc + lam.cwiseProduct(rp)).cwiseQuotient(s));
    Eigen::VectorXd dx = ldlt.solve(rhs);
    Eigen::VectorXd ds = -rp - prob.G * dx;
    Eigen::VectorXd dlam = (-rc - lam.cwiseProduct(ds)).cwiseQuotient(s);

    const double a = 0.995 * std::min(max_step(s, ds), max_step(lam, dlam));
    x += a * dx;
    s += a * ds;
    lam += a * dlam;
  }

  sol.x = x;
  sol.dual = lam;
  sol.objective = prob.objective(x);
  sol.primal_residual = (prob.G * x - prob.w).cwiseMax(0.0).lpNorm<Eigen::Infinity>();
  sol.status = (sol.primal_residual > 1e3 * tol * wscale) ? QpStatus::Infeasible
                                                          : QpStatus::MaxIterations;
  return sol;
}

}  // namespace gridfreq
