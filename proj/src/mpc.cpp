#include "gridfreq/mpc.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace gridfreq {

int MpcConfig::steps() const {
  return static_cast<int>(std::ceil(horizon / step));
}

void MpcConfig::validate(const NetworkModel& net) const {
  const int n = net.node_count;
  if (weight.size() != n || epsilon.size() != n || filter_time.size() != n ||
      omega_min.size() != n || omega_max.size() != n) {
    throw std::invalid_argument("mpc config: dimension mismatch");
  }
  if (horizon <= 0.0 || step <= 0.0 || steps() < 1) {
    throw std::invalid_argument("mpc config: nonpositive horizon or step");
  }
  if (penalty_d < 0.0) throw std::invalid_argument("mpc config: negative penalty");
  for (int i : net.controlled) {
    if (weight(i) <= 0.0) {
      throw std::invalid_argument("mpc config: nonpositive weight at node " +
                                  std::to_string(i + 1));
    }
    if (epsilon(i) <= 0.0 || filter_time(i) <= 0.0) {
      throw std::invalid_argument("mpc config: nonpositive epsilon or filter time at node " +
                                  std::to_string(i + 1));
    }
    if (epsilon(i) * filter_time(i) >= 1.0) {
      throw std::invalid_argument("mpc config: epsilon*filter_time >= 1 at node " +
                                  std::to_string(i + 1));
    }
  }
  for (int i : net.monitored) {
    if (!(omega_min(i) < omega_max(i))) {
      throw std::invalid_argument("mpc config: empty frequency band at node " +
                                  std::to_string(i + 1));
    }
  }
}

namespace {

struct Rollout {
  Eigen::MatrixXd flow;   // (N+1) x m_r
  Eigen::MatrixXd omega;  // (N+1) x n_r
  Eigen::MatrixXd alpha;  // (N+1) x n_r
};

// explicit Euler recursion of the prediction model
Rollout roll(const Subnet& sub, const MpcConfig& cfg, const Eigen::VectorXd& f0,
             const Eigen::VectorXd& w0, const Eigen::VectorXd& a0,
             const Eigen::MatrixXd& forecast, const Eigen::VectorXd& u_local) {
  const int N = cfg.steps();
  const int nr = sub.node_count();
  const int mr = sub.edge_count();
  const double T = cfg.step;
  const Eigen::MatrixXd wd = sub.susceptance.asDiagonal() * sub.incidence;

  Rollout r;
  r.flow.resize(N + 1, mr);
  r.omega.resize(N + 1, nr);
  r.alpha.resize(N + 1, nr);
  Eigen::VectorXd f = f0, w = w0, a = a0;
  r.flow.row(0) = f;
  r.omega.row(0) = w;
  r.alpha.row(0) = a;
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd p = forecast.row(k);
    const Eigen::VectorXd fn = f + T * (wd * w);
    const Eigen::VectorXd wn =
        w + T * (-sub.damping.cwiseProduct(w) - sub.incidence.transpose() * f + p + u_local)
                    .cwiseQuotient(sub.inertia);
    Eigen::VectorXd an = Eigen::VectorXd::Zero(nr);
    for (int j : sub.controlled) {
      const double Ti = cfg.filter_time(sub.global_nodes[j]);
      an(j) = a(j) + T * (-a(j) / Ti - w(j) + u_local(j));
    }
    f = fn;
    w = wn;
    a = an;
    r.flow.row(k + 1) = f;
    r.omega.row(k + 1) = w;
    r.alpha.row(k + 1) = a;
  }
  return r;
}

struct Condensed {
  QpProblem prob;
  Eigen::MatrixXd omega_base;             // (N+1) x n_r, zero-input prediction
  std::vector<Eigen::MatrixXd> omega_u;   // per step: n_r x nu unit responses
  Eigen::VectorXd u_bound;                // eps_i * |alpha_i(sample)| per controlled node
};

Condensed condense(const Subnet& sub, const MpcConfig& cfg, const Snapshot& snap) {
  const int N = cfg.steps();
  const int nr = sub.node_count();
  const int nu = static_cast<int>(sub.controlled.size());
  const int nm = static_cast<int>(sub.monitored.size());

  if (snap.flow.size() != sub.edge_count() || snap.omega.size() != nr ||
      snap.alpha_mpc.size() != nr) {
    throw std::invalid_argument("mpc: snapshot dimension mismatch");
  }
  if (snap.forecast.rows() != N || snap.forecast.cols() != nr) {
    throw std::invalid_argument("mpc: forecast length mismatch (want " +
                                std::to_string(N) + " rows)");
  }
  for (int j : sub.controlled) {
    const int g = sub.global_nodes[j];
    if (cfg.epsilon(g) * cfg.filter_time(g) >= 1.0) {
      throw std::invalid_argument("mpc: epsilon*filter_time >= 1 at node " +
                                  std::to_string(g + 1));
    }
  }

  Condensed c;
  const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(nr);
  c.omega_base = roll(sub, cfg, snap.flow, snap.omega, snap.alpha_mpc, snap.forecast,
                      zero_u).omega;

  // unit input responses; constant input over the horizon makes the
  // predicted frequency affine in u
  c.omega_u.assign(N + 1, Eigen::MatrixXd::Zero(nr, nu));
  const Eigen::MatrixXd zero_fcst = Eigen::MatrixXd::Zero(N, nr);
  for (int col = 0; col < nu; ++col) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(nr);
    u(sub.controlled[col]) = 1.0;
    const Rollout unit = roll(sub, cfg, Eigen::VectorXd::Zero(sub.edge_count()),
                              Eigen::VectorXd::Zero(nr), Eigen::VectorXd::Zero(nr),
                              zero_fcst, u);
    for (int k = 0; k <= N; ++k) c.omega_u[k].col(col) = unit.omega.row(k);
  }

  c.u_bound.resize(nu);
  for (int col = 0; col < nu; ++col) {
    const int j = sub.controlled[col];
    c.u_bound(col) = cfg.epsilon(sub.global_nodes[j]) * std::abs(snap.alpha_mpc(j));
  }

  const int nv = nu + 1;
  const int rows = 2 * N * nm + 2 * nu + 1;
  QpProblem& qp = c.prob;
  qp.K = Eigen::MatrixXd::Zero(nv, nv);
  for (int col = 0; col < nu; ++col) {
    qp.K(col, col) = cfg.weight(sub.global_nodes[sub.controlled[col]]);
  }
  qp.K(nu, nu) = cfg.penalty_d;
  qp.q = Eigen::VectorXd::Zero(nv);
  qp.G = Eigen::MatrixXd::Zero(rows, nv);
  qp.w = Eigen::VectorXd::Zero(rows);

  int r = 0;
  for (int im = 0; im < nm; ++im) {
    const int i = sub.monitored[im];
    const int g = sub.global_nodes[i];
    for (int k = 1; k <= N; ++k) {
      qp.G.block(r, 0, 1, nu) = c.omega_u[k].row(i);
      qp.G(r, nu) = -1.0;
      qp.w(r) = cfg.omega_max(g) - c.omega_base(k, i);
      ++r;
      qp.G.block(r, 0, 1, nu) = -c.omega_u[k].row(i);
      qp.G(r, nu) = -1.0;
      qp.w(r) = c.omega_base(k, i) - cfg.omega_min(g);
      ++r;
    }
  }
  for (int col = 0; col < nu; ++col) {
    qp.G(r, col) = 1.0;
    qp.w(r) = c.u_bound(col);
    ++r;
    qp.G(r, col) = -1.0;
    qp.w(r) = c.u_bound(col);
    ++r;
  }
  qp.G(r, nu) = -1.0;
  qp.w(r) = 0.0;
  return c;
}

MpcResult solve_impl(const Subnet& sub, const MpcConfig& cfg, const Snapshot& snap,
                     double tol) {
  const Condensed c = condense(sub, cfg, snap);
  const int nu = static_cast<int>(sub.controlled.size());
  const int N = cfg.steps();

  // inputs pinned to zero by a zero-width sensitivity band are eliminated
  // before the interior-point solve
  std::vector<int> free_cols;
  for (int col = 0; col < nu; ++col) {
    if (c.u_bound(col) > 1e-14) free_cols.push_back(col);
  }
  const int nf = static_cast<int>(free_cols.size());

  QpSolution qsol;
  Eigen::VectorXd u_cols = Eigen::VectorXd::Zero(nu);
  double beta = 0.0;
  if (nf == nu) {
    qsol = solve_qp(c.prob, tol);
    u_cols = qsol.x.head(nu);
    beta = qsol.x(nu);
  } else {
    QpProblem red;
    const int nv = nf + 1;
    red.K = Eigen::MatrixXd::Zero(nv, nv);
    red.q = Eigen::VectorXd::Zero(nv);
    std::vector<int> keep_rows;
    const int sens_base = static_cast<int>(c.prob.G.rows()) - 2 * nu - 1;
    for (int r = 0; r < sens_base; ++r) keep_rows.push_back(r);
    for (int j = 0; j < nf; ++j) {
      keep_rows.push_back(sens_base + 2 * free_cols[j]);
      keep_rows.push_back(sens_base + 2 * free_cols[j] + 1);
    }
    keep_rows.push_back(static_cast<int>(c.prob.G.rows()) - 1);

    red.G = Eigen::MatrixXd::Zero(static_cast<int>(keep_rows.size()), nv);
    red.w = Eigen::VectorXd::Zero(static_cast<int>(keep_rows.size()));
    for (size_t rr = 0; rr < keep_rows.size(); ++rr) {
      const int src = keep_rows[rr];
      for (int j = 0; j < nf; ++j) red.G(static_cast<int>(rr), j) = c.prob.G(src, free_cols[j]);
      red.G(static_cast<int>(rr), nf) = c.prob.G(src, nu);
      red.w(static_cast<int>(rr)) = c.prob.w(src);
    }
    for (int j = 0; j < nf; ++j) red.K(j, j) = c.prob.K(free_cols[j], free_cols[j]);
    red.K(nf, nf) = c.prob.K(nu, nu);

    qsol = solve_qp(red, tol);
    for (int j = 0; j < nf; ++j) u_cols(free_cols[j]) = qsol.x(j);
    beta = qsol.x(nf);
  }
  if (qsol.status == QpStatus::Infeasible) {
    throw std::runtime_error("mpc: solver reported infeasible problem at t=" +
                             std::to_string(snap.time));
  }

  MpcResult res;
  res.u_star = Eigen::VectorXd::Zero(sub.node_count());
  for (int col = 0; col < nu; ++col) res.u_star(sub.controlled[col]) = u_cols(col);
  res.beta_star = beta;
  res.qp = qsol;

  const Rollout pred = roll(sub, cfg, snap.flow, snap.omega, snap.alpha_mpc,
                            snap.forecast, res.u_star);
  res.pred_flow = pred.flow;
  res.pred_omega = pred.omega;
  res.pred_alpha = pred.alpha;
  (void)N;
  return res;
}

}  // namespace

QpProblem build_problem(const Subnet& sub, const MpcConfig& cfg, const Snapshot& snap) {
  return condense(sub, cfg, snap).prob;
}

MpcResult solve(const Subnet& sub, const MpcConfig& cfg, const Snapshot& snap) {
  return solve_impl(sub, cfg, snap, 1e-8);
}

double lipschitz_probe(const Subnet& sub, const MpcConfig& cfg, const Snapshot& base,
                       double radius, int trials, unsigned seed) {
  if (radius < 0.0) throw std::invalid_argument("lipschitz_probe: negative radius");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  auto perturb = [&](const Snapshot& s) {
    Snapshot out = s;
    for (int i = 0; i < out.flow.size(); ++i) out.flow(i) += radius * unif(rng);
    for (int i = 0; i < out.omega.size(); ++i) out.omega(i) += radius * unif(rng);
    for (int i = 0; i < out.alpha_mpc.size(); ++i) out.alpha_mpc(i) += radius * unif(rng);
    for (int r = 0; r < out.forecast.rows(); ++r) {
      for (int cidx = 0; cidx < out.forecast.cols(); ++cidx) {
        out.forecast(r, cidx) += radius * unif(rng);
      }
    }
    return out;
  };
  auto distance = [](const Snapshot& a, const Snapshot& b) {
    double d2 = (a.flow - b.flow).squaredNorm() + (a.omega - b.omega).squaredNorm() +
                (a.alpha_mpc - b.alpha_mpc).squaredNorm() +
                (a.forecast - b.forecast).squaredNorm();
    return std::sqrt(d2);
  };

  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Snapshot z1 = perturb(base);
    const Snapshot z2 = perturb(base);
    const double dz = distance(z1, z2);
    if (dz == 0.0) continue;
    const Eigen::VectorXd u1 = solve_impl(sub, cfg, z1, 1e-11).u_star;
    const Eigen::VectorXd u2 = solve_impl(sub, cfg, z2, 1e-11).u_star;
    worst = std::max(worst, (u1 - u2).norm() / dz);
  }
  return worst;
}

}  // namespace gridfreq
