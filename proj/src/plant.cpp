#include "gridfreq/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace gridfreq {

SystemState SystemState::zero(const NetworkModel& net) {
  SystemState s;
  s.flow = Eigen::VectorXd::Zero(net.edge_count());
  s.omega = Eigen::VectorXd::Zero(net.node_count);
  s.alpha_mpc = Eigen::VectorXd::Zero(net.node_count);
  return s;
}

void InjectionProfile::validate(const NetworkModel& net) const {
  if (p_star.size() != net.node_count) {
    throw std::invalid_argument("injection profile: p_star dimension mismatch");
  }
  if (t_bar < 0.0) throw std::invalid_argument("injection profile: negative t_bar");
  if (std::abs(p_star.sum()) > 1e-9) {
    throw std::invalid_argument("injection profile: terminal injections are not balanced");
  }
}

namespace {

void check_inputs(const NetworkModel& net, const SystemState& s,
                  const Eigen::VectorXd& p, const Eigen::VectorXd& alpha) {
  if (s.flow.size() != net.edge_count() || s.omega.size() != net.node_count ||
      p.size() != net.node_count || alpha.size() != net.node_count) {
    throw std::invalid_argument("derivative: dimension mismatch");
  }
  for (int i = 0; i < net.node_count; ++i) {
    if (alpha(i) != 0.0 && !net.is_controlled(i)) {
      throw std::invalid_argument("derivative: nonzero control at uncontrolled node " +
                                  std::to_string(i + 1));
    }
  }
}

StateDerivative eval_unchecked(const NetworkModel& net, const Eigen::VectorXd& f,
                               const Eigen::VectorXd& omega, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& alpha) {
  StateDerivative d;
  d.dflow = net.susceptance.asDiagonal() * (net.incidence * omega);
  d.domega = (-net.damping.cwiseProduct(omega) - net.incidence.transpose() * f + p + alpha)
                 .cwiseQuotient(net.inertia);
  return d;
}

}  // namespace

StateDerivative derivative(const NetworkModel& net, const SystemState& s,
                           const Eigen::VectorXd& p, const Eigen::VectorXd& alpha) {
  check_inputs(net, s, p, alpha);
  return eval_unchecked(net, s.flow, s.omega, p, alpha);
}

SystemState step(const NetworkModel& net, const SystemState& s,
                 const Eigen::VectorXd& p, const Eigen::VectorXd& alpha, double h) {
  if (h <= 0.0) throw std::invalid_argument("step: nonpositive step size");
  check_inputs(net, s, p, alpha);

  auto k1 = eval_unchecked(net, s.flow, s.omega, p, alpha);
  auto k2 = eval_unchecked(net, s.flow + 0.5 * h * k1.dflow, s.omega + 0.5 * h * k1.domega,
                           p, alpha);
  auto k3 = eval_unchecked(net, s.flow + 0.5 * h * k2.dflow, s.omega + 0.5 * h * k2.domega,
                           p, alpha);
  auto k4 = eval_unchecked(net, s.flow + h * k3.dflow, s.omega + h * k3.domega, p, alpha);

  SystemState out = s;
  out.flow += (h / 6.0) * (k1.dflow + 2.0 * k2.dflow + 2.0 * k3.dflow + k4.dflow);
  out.omega += (h / 6.0) * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
  if (!out.flow.allFinite() || !out.omega.allFinite()) {
    throw std::runtime_error("step: nonfinite state");
  }
  return out;
}

Eigen::VectorXd equilibrium_flow(const NetworkModel& net, const Eigen::VectorXd& f0,
                                 const Eigen::VectorXd& p_star) {
  if (f0.size() != net.edge_count() || p_star.size() != net.node_count) {
    throw std::invalid_argument("equilibrium: dimension mismatch");
  }
  if (std::abs(p_star.sum()) > 1e-9) {
    throw std::invalid_argument("equilibrium: unbalanced injections");
  }
  const Eigen::MatrixXd wd = net.weighted_incidence();
  const Eigen::MatrixXd laplacian = net.incidence.transpose() * wd;
  const Eigen::VectorXd rhs = p_star - net.incidence.transpose() * f0;

  // Minimum-norm solve of the singular Laplacian system via eigen pinv.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian);
  const double cutoff = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd inv_eval = es.eigenvalues();
  for (int i = 0; i < inv_eval.size(); ++i) {
    inv_eval(i) = (std::abs(inv_eval(i)) > cutoff) ? 1.0 / inv_eval(i) : 0.0;
  }
  const Eigen::VectorXd xi =
      es.eigenvectors() * inv_eval.cwiseProduct(es.eigenvectors().transpose() * rhs);
  return f0 + wd * xi;
}

}  // namespace gridfreq
