#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gridfreq/plant.hpp"
#include "helpers.hpp"

using namespace gridfreq;

TEST_CASE("equilibrium condition gives zero derivative") {
  const NetworkModel net = testutil::triangle();
  SystemState s = SystemState::zero(net);
  s.flow << 0.5, 0.2, 0.3;
  const Eigen::VectorXd p = net.incidence.transpose() * s.flow;
  const StateDerivative d = derivative(net, s, p, Eigen::VectorXd::Zero(3));
  CHECK(d.dflow.norm() == doctest::Approx(0.0));
  CHECK(d.domega.norm() == doctest::Approx(0.0));
}

TEST_CASE("two-bus derivative hand values") {
  const NetworkModel net = testutil::two_bus();
  SystemState s = SystemState::zero(net);
  s.omega << 1.0, -1.0;
  const StateDerivative d =
      derivative(net, s, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  CHECK(d.dflow(0) == doctest::Approx(2.0));
  CHECK(d.domega(0) == doctest::Approx(-1.0));
  CHECK(d.domega(1) == doctest::Approx(1.0));
}

TEST_CASE("alpha outside the controlled set rejected") {
  const NetworkModel net = testutil::two_bus();  // controlled = {1}
  const SystemState s = SystemState::zero(net);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
  alpha(1) = 0.1;
  CHECK_THROWS_AS(derivative(net, s, Eigen::VectorXd::Zero(2), alpha),
                  std::invalid_argument);
}

TEST_CASE("derivative is linear in its inputs") {
  const NetworkModel net = testutil::three_bus_line();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand_state = [&] {
    SystemState s = SystemState::zero(net);
    for (int k = 0; k < 2; ++k) s.flow(k) = u(rng);
    for (int i = 0; i < 3; ++i) s.omega(i) = u(rng);
    return s;
  };
  const SystemState s1 = rand_state(), s2 = rand_state();
  Eigen::VectorXd p1(3), p2(3);
  for (int i = 0; i < 3; ++i) {
    p1(i) = u(rng);
    p2(i) = u(rng);
  }
  const double a = 1.7;
  SystemState sc = SystemState::zero(net);
  sc.flow = a * s1.flow + s2.flow;
  sc.omega = a * s1.omega + s2.omega;
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  const StateDerivative d1 = derivative(net, s1, p1, z);
  const StateDerivative d2 = derivative(net, s2, p2, z);
  const StateDerivative dc = derivative(net, sc, a * p1 + p2, z);
  CHECK((dc.dflow - a * d1.dflow - d2.dflow).norm() < 1e-12);
  CHECK((dc.domega - a * d1.domega - d2.domega).norm() < 1e-12);
}

TEST_CASE("aggregate momentum balance") {
  const NetworkModel net = testutil::triangle();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    SystemState s = SystemState::zero(net);
    for (int k = 0; k < 3; ++k) s.flow(k) = u(rng);
    for (int i = 0; i < 3; ++i) s.omega(i) = u(rng);
    Eigen::VectorXd p(3), alpha(3);
    for (int i = 0; i < 3; ++i) {
      p(i) = u(rng);
      alpha(i) = u(rng);
    }
    const StateDerivative d = derivative(net, s, p, alpha);
    const double lhs = net.inertia.cwiseProduct(d.domega).sum();
    const double rhs = -net.damping.cwiseProduct(s.omega).sum() + p.sum() + alpha.sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("step fixes the origin") {
  const NetworkModel net = testutil::two_bus();
  const SystemState s = SystemState::zero(net);
  const SystemState next =
      step(net, s, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 1e-3);
  CHECK(next.flow.norm() == 0.0);
  CHECK(next.omega.norm() == 0.0);
}

TEST_CASE("two-bus propagation matches the matrix exponential") {
  const NetworkModel net = testutil::two_bus();
  // state z = (f, w1, w2); dz = A z with b = M = E = 1
  Eigen::Matrix3d A;
  A << 0, 1, -1,
      -1, -1, 0,
       1, 0, -1;
  Eigen::Vector3d z0(0.3, 0.7, -0.2);
  const Eigen::Vector3d z1 = (A * 1.0).exp() * z0;

  SystemState s = SystemState::zero(net);
  s.flow << z0(0);
  s.omega << z0(1), z0(2);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const double h = 1e-3;
  for (int k = 0; k < 1000; ++k) s = step(net, s, zero, zero, h);
  CHECK(std::abs(s.flow(0) - z1(0)) < 1e-8);
  CHECK(std::abs(s.omega(0) - z1(1)) < 1e-8);
  CHECK(std::abs(s.omega(1) - z1(2)) < 1e-8);
}

TEST_CASE("RK4 convergence order on a lightly damped case") {
  const NetworkModel net = build_network({{1, 1.0, 0.01}, {2, 0.5, 0.01}, {3, 2.0, 0.01}},
                                         {{1, 2, 1.5}, {2, 3, 2.0}}, {1}, {1});
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  auto endpoint = [&](double h) {
    SystemState s = SystemState::zero(net);
    s.omega << 0.4, -0.1, -0.15;
    const int n = static_cast<int>(std::llround(4.0 / h));
    for (int k = 0; k < n; ++k) s = step(net, s, zero, zero, h);
    Eigen::VectorXd out(5);
    out << s.flow, s.omega;
    return out;
  };
  const Eigen::VectorXd a = endpoint(0.1);
  const Eigen::VectorXd b = endpoint(0.05);
  const Eigen::VectorXd c = endpoint(0.025);
  const double order = std::log2((a - b).norm() / (b - c).norm());
  CHECK(order >= 3.5);
}

TEST_CASE("free response decays to the equilibrium") {
  const NetworkModel net = testutil::three_bus_line();
  Eigen::VectorXd p(3);
  p << 0.2, -0.5, 0.3;
  SystemState s = SystemState::zero(net);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  for (int k = 0; k < 200000; ++k) s = step(net, s, p, zero, 1e-3);
  CHECK(s.omega.lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK((net.incidence.transpose() * s.flow - p).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("equilibrium flow") {
  SUBCASE("consistent initial flow is already the equilibrium") {
    const NetworkModel net = testutil::triangle();
    // circulating flow lies in the null space of D^T
    Eigen::VectorXd f0(3);
    f0 << 1.0, 1.0, -1.0;
    REQUIRE((net.incidence.transpose() * f0).norm() < 1e-12);
    const Eigen::VectorXd finf = equilibrium_flow(net, f0, Eigen::VectorXd::Zero(3));
    CHECK((finf - f0).norm() < 1e-10);
  }
  SUBCASE("two-bus closed form") {
    const NetworkModel net = testutil::two_bus();
    Eigen::VectorXd p(2);
    p << 0.8, -0.8;
    const Eigen::VectorXd finf =
        equilibrium_flow(net, Eigen::VectorXd::Zero(1), p);
    CHECK(finf(0) == doctest::Approx(0.8).epsilon(1e-12));
  }
  SUBCASE("triangle residual") {
    const NetworkModel net = testutil::triangle();
    Eigen::VectorXd p(3);
    p << 0.4, -0.9, 0.5;
    const Eigen::VectorXd finf = equilibrium_flow(net, Eigen::VectorXd::Zero(3), p);
    CHECK((net.incidence.transpose() * finf - p).lpNorm<Eigen::Infinity>() < 1e-10);
  }
  SUBCASE("unbalanced injection rejected") {
    const NetworkModel net = testutil::two_bus();
    Eigen::VectorXd p(2);
    p << 1.0, -0.5;
    CHECK_THROWS_AS(equilibrium_flow(net, Eigen::VectorXd::Zero(1), p),
                    std::invalid_argument);
  }
}

TEST_CASE("injection profile validation") {
  const NetworkModel net = testutil::two_bus();
  InjectionProfile prof;
  prof.evaluate = [](double) { return Eigen::VectorXd::Zero(2); };
  prof.t_bar = 0.0;
  prof.p_star = Eigen::VectorXd::Zero(2);
  CHECK_NOTHROW(prof.validate(net));
  prof.p_star << 0.5, -0.4;
  CHECK_THROWS_AS(prof.validate(net), std::invalid_argument);
}
