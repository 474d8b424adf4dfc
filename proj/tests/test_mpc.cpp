#include <doctest.h>

#include <cmath>
#include <random>

#include "gridfreq/mpc.hpp"
#include "helpers.hpp"

using namespace gridfreq;

namespace {

MpcConfig config_for(const NetworkModel& net, double horizon = 2.0, double step = 0.02) {
  MpcConfig cfg;
  cfg.horizon = horizon;
  cfg.step = step;
  cfg.weight = Eigen::VectorXd::Ones(net.node_count);
  cfg.penalty_d = 100.0;
  cfg.epsilon = Eigen::VectorXd::Constant(net.node_count, 1.9);
  cfg.filter_time = Eigen::VectorXd::Constant(net.node_count, 0.5);
  cfg.omega_min = Eigen::VectorXd::Constant(net.node_count, -0.2);
  cfg.omega_max = Eigen::VectorXd::Constant(net.node_count, 0.2);
  return cfg;
}

Snapshot snapshot_for(const Subnet& sub, const MpcConfig& cfg) {
  Snapshot snap;
  snap.time = 0.0;
  snap.flow = Eigen::VectorXd::Zero(sub.edge_count());
  snap.omega = Eigen::VectorXd::Zero(sub.node_count());
  snap.alpha_mpc = Eigen::VectorXd::Zero(sub.node_count());
  snap.forecast = Eigen::MatrixXd::Zero(cfg.steps(), sub.node_count());
  return snap;
}

// independent Euler recursion of the prediction model, constant input
Eigen::MatrixXd euler_omega(const Subnet& sub, const MpcConfig& cfg, const Snapshot& snap,
                            const Eigen::VectorXd& u_local) {
  const int N = cfg.steps();
  const int nr = sub.node_count();
  Eigen::MatrixXd out(N + 1, nr);
  Eigen::VectorXd f = snap.flow, w = snap.omega, a = snap.alpha_mpc;
  out.row(0) = w;
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd p = snap.forecast.row(k);
    const Eigen::VectorXd fn =
        f + cfg.step * (sub.susceptance.asDiagonal() * sub.incidence * w);
    const Eigen::VectorXd wn =
        w + cfg.step * (-sub.damping.cwiseProduct(w) - sub.incidence.transpose() * f + p +
                        u_local)
                           .cwiseQuotient(sub.inertia);
    Eigen::VectorXd an = Eigen::VectorXd::Zero(nr);
    for (int j : sub.controlled) {
      an(j) = a(j) + cfg.step * (-a(j) / cfg.filter_time(sub.global_nodes[j]) - w(j) +
                                 u_local(j));
    }
    f = fn;
    w = wn;
    a = an;
    out.row(k + 1) = w;
  }
  return out;
}

}  // namespace

TEST_CASE("config validation") {
  const NetworkModel net = testutil::three_bus_line();
  MpcConfig cfg = config_for(net);
  CHECK_NOTHROW(cfg.validate(net));
  CHECK(cfg.steps() == 100);

  SUBCASE("epsilon filter product bound") {
    cfg.epsilon(0) = 2.5;  // 2.5 * 0.5 >= 1
    CHECK_THROWS_AS(cfg.validate(net), std::invalid_argument);
  }
  SUBCASE("nonpositive weight") {
    cfg.weight(0) = 0.0;
    CHECK_THROWS_AS(cfg.validate(net), std::invalid_argument);
  }
  SUBCASE("empty band") {
    cfg.omega_min(0) = 0.3;
    CHECK_THROWS_AS(cfg.validate(net), std::invalid_argument);
  }
}

TEST_CASE("condensed problem dimensions") {
  // 5-node path, 4 controlled, 2 monitored
  const NetworkModel net = build_network(
      {{1, 1.0, 1.0}, {2, 1.0, 1.0}, {3, 1.0, 1.0}, {4, 1.0, 1.0}, {5, 1.0, 1.0}},
      {{1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}}, {1, 2, 3, 4}, {1, 2});
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net);
  Snapshot snap = snapshot_for(sub, cfg);
  const QpProblem prob = build_problem(sub, cfg, snap);
  CHECK(prob.K.rows() == 5);
  CHECK(prob.G.rows() == 4 * 100 + 8 + 1);
  CHECK(prob.G.cols() == 5);
}

TEST_CASE("zero filter state pins the input to zero") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net);
  Snapshot snap = snapshot_for(sub, cfg);
  snap.omega << -0.3, 0.0, 0.1;  // violated band, controller would like to act
  snap.alpha_mpc.setZero();
  const MpcResult res = solve(sub, cfg, snap);
  CHECK(res.u_star.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(res.beta_star > 0.0);
}

TEST_CASE("prediction matches the independent recursion") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net, 0.5, 0.05);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Snapshot snap = snapshot_for(sub, cfg);
  snap.flow << u(rng), u(rng);
  snap.omega << u(rng), u(rng), u(rng);
  snap.alpha_mpc(0) = u(rng);
  snap.alpha_mpc(2) = u(rng);
  for (int k = 0; k < snap.forecast.rows(); ++k) {
    for (int i = 0; i < 3; ++i) snap.forecast(k, i) = 0.1 * u(rng);
  }
  const MpcResult res = solve(sub, cfg, snap);
  const Eigen::MatrixXd ref = euler_omega(sub, cfg, snap, res.u_star);
  CHECK((res.pred_omega - ref).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("condensed band rows agree with the recursion") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net, 0.2, 0.05);  // N = 4
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> dist(-0.3, 0.3);
  Snapshot snap = snapshot_for(sub, cfg);
  snap.flow << dist(rng), dist(rng);
  snap.omega << dist(rng), dist(rng), dist(rng);
  snap.alpha_mpc(0) = dist(rng);
  snap.alpha_mpc(2) = dist(rng);
  const QpProblem prob = build_problem(sub, cfg, snap);

  // random decision vector; compare G x - w to the recursed band residuals
  Eigen::VectorXd x(3);
  x << dist(rng), dist(rng), 0.05;
  Eigen::VectorXd u_local = Eigen::VectorXd::Zero(3);
  u_local(sub.controlled[0]) = x(0);
  u_local(sub.controlled[1]) = x(1);
  const Eigen::MatrixXd omega = euler_omega(sub, cfg, snap, u_local);
  const Eigen::VectorXd resid = prob.G * x - prob.w;
  const int N = cfg.steps();
  int r = 0;
  for (size_t im = 0; im < sub.monitored.size(); ++im) {
    const int i = sub.monitored[im];
    const int g = sub.global_nodes[i];
    for (int k = 1; k <= N; ++k) {
      CHECK(resid(r++) ==
            doctest::Approx(omega(k, i) - x(2) - cfg.omega_max(g)).epsilon(1e-10));
      CHECK(resid(r++) ==
            doctest::Approx(cfg.omega_min(g) - x(2) - omega(k, i)).epsilon(1e-10));
    }
  }
}

TEST_CASE("zero penalty gives zero input") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  MpcConfig cfg = config_for(net);
  cfg.penalty_d = 0.0;
  Snapshot snap = snapshot_for(sub, cfg);
  snap.omega << -0.4, 0.0, 0.2;
  snap.alpha_mpc << 0.3, 0.0, -0.2;
  const MpcResult res = solve(sub, cfg, snap);
  CHECK(res.u_star.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("in-band prediction needs no action") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net);
  Snapshot snap = snapshot_for(sub, cfg);
  snap.alpha_mpc << 0.1, 0.0, 0.1;
  const MpcResult res = solve(sub, cfg, snap);
  CHECK(res.u_star.lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(res.beta_star < 1e-3);
}

TEST_CASE("sensitivity bound and relaxed band hold at the optimum") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net);
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> dist(-0.25, 0.25);
  for (int trial = 0; trial < 10; ++trial) {
    Snapshot snap = snapshot_for(sub, cfg);
    snap.flow << dist(rng), dist(rng);
    snap.omega << dist(rng), dist(rng), dist(rng);
    snap.alpha_mpc(0) = dist(rng);
    snap.alpha_mpc(2) = dist(rng);
    const MpcResult res = solve(sub, cfg, snap);
    for (size_t c = 0; c < sub.controlled.size(); ++c) {
      const int j = sub.controlled[c];
      const double bound = cfg.epsilon(sub.global_nodes[j]) * std::abs(snap.alpha_mpc(j));
      CHECK(std::abs(res.u_star(j)) <= bound + 1e-7);
    }
    CHECK(res.beta_star >= -1e-9);
    for (size_t im = 0; im < sub.monitored.size(); ++im) {
      const int i = sub.monitored[im];
      const int g = sub.global_nodes[i];
      for (int k = 1; k <= cfg.steps(); ++k) {
        CHECK(res.pred_omega(k, i) <= cfg.omega_max(g) + res.beta_star + 1e-6);
        CHECK(res.pred_omega(k, i) >= cfg.omega_min(g) - res.beta_star - 1e-6);
      }
    }
  }
}

TEST_CASE("repeated solves agree") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net);
  Snapshot snap = snapshot_for(sub, cfg);
  snap.omega << -0.25, 0.1, 0.0;
  snap.alpha_mpc << 0.2, 0.0, -0.1;
  const MpcResult a = solve(sub, cfg, snap);
  const MpcResult b = solve(sub, cfg, snap);
  CHECK((a.u_star - b.u_star).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(a.beta_star == doctest::Approx(b.beta_star).epsilon(1e-8));
}

TEST_CASE("invalid snapshots rejected") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net);
  Snapshot snap = snapshot_for(sub, cfg);
  snap.forecast = Eigen::MatrixXd::Zero(7, 3);
  CHECK_THROWS_AS(build_problem(sub, cfg, snap), std::invalid_argument);

  Snapshot bad = snapshot_for(sub, cfg);
  bad.omega = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(build_problem(sub, cfg, bad), std::invalid_argument);

  MpcConfig badcfg = config_for(net);
  badcfg.epsilon.setConstant(3.0);
  Snapshot ok = snapshot_for(sub, badcfg);
  CHECK_THROWS_AS(build_problem(sub, badcfg, ok), std::invalid_argument);
}

TEST_CASE("lipschitz probe basics") {
  const NetworkModel net = testutil::three_bus_line();
  const Subnet sub = whole_network_subnet(net);
  const MpcConfig cfg = config_for(net, 0.5, 0.05);
  Snapshot snap = snapshot_for(sub, cfg);
  snap.omega << -0.22, 0.05, 0.0;
  snap.alpha_mpc << 0.15, 0.0, 0.1;

  SUBCASE("zero radius gives ratio zero") {
    CHECK(lipschitz_probe(sub, cfg, snap, 0.0, 5) == 0.0);
  }
  SUBCASE("finite over many pairs") {
    const double ratio = lipschitz_probe(sub, cfg, snap, 1e-3, 50);
    CHECK(std::isfinite(ratio));
    CHECK(ratio >= 0.0);
  }
  SUBCASE("continuity of the optimizer") {
    const MpcResult base = solve(sub, cfg, snap);
    double prev = 1e30;
    for (double delta : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      Snapshot moved = snap;
      moved.omega(0) += delta;
      const MpcResult m = solve(sub, cfg, moved);
      const double gap = (m.u_star - base.u_star).norm();
      CHECK(gap <= prev + 1e-9);
      prev = gap;
    }
    CHECK(prev < 1e-4);
  }
}
