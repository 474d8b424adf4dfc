#include <doctest.h>

#include <random>

#include "gridfreq/layered.hpp"
#include "helpers.hpp"

using namespace gridfreq;

namespace {

NetworkModel monitored_two_bus() { return testutil::two_bus(); }  // node 1 monitored

}  // namespace

TEST_CASE("stability filter saturation") {
  const NetworkModel net = monitored_two_bus();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd eps = Eigen::VectorXd::Constant(2, 1.9);

  alpha(0) = 0.2;
  u(0) = 0.5;
  CHECK(stability_filter(net, alpha, u, eps)(0) == doctest::Approx(0.38));

  u(0) = 0.3;  // inside the band 1.9*0.2 = 0.38
  CHECK(stability_filter(net, alpha, u, eps)(0) == doctest::Approx(0.3));

  alpha(0) = 0.0;
  u(0) = 123.0;
  CHECK(stability_filter(net, alpha, u, eps)(0) == 0.0);
}

TEST_CASE("filter condition holds for adversarial inputs") {
  const NetworkModel net = monitored_two_bus();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u01(-10.0, 10.0);
  std::uniform_real_distribution<double> ueps(0.05, 3.0);
  for (int trial = 0; trial < 100000; ++trial) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd eps(2);
    alpha(0) = u01(rng);
    u(0) = u01(rng);
    eps << ueps(rng), ueps(rng);
    const double uhat = stability_filter(net, alpha, u, eps)(0);
    CHECK(alpha(0) * uhat <= eps(0) * alpha(0) * alpha(0));
  }
}

TEST_CASE("low-pass derivative") {
  const NetworkModel net = monitored_two_bus();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd uhat = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd T = Eigen::VectorXd::Constant(2, 0.5);

  SUBCASE("hand value") {
    alpha(0) = 0.1;
    omega(0) = 0.05;
    CHECK(lowpass_derivative(net, alpha, omega, uhat, T)(0) == doctest::Approx(-0.25));
  }
  SUBCASE("steady point") {
    uhat(0) = 0.3;
    omega(0) = 0.1;
    alpha(0) = T(0) * (uhat(0) - omega(0));
    CHECK(lowpass_derivative(net, alpha, omega, uhat, T)(0) == doctest::Approx(0.0));
  }
  SUBCASE("zero inputs") {
    CHECK(lowpass_derivative(net, alpha, omega, uhat, T).norm() == 0.0);
  }
  SUBCASE("nonpositive time constant rejected") {
    T(0) = 0.0;
    CHECK_THROWS_AS(lowpass_derivative(net, alpha, omega, uhat, T),
                    std::invalid_argument);
  }
  SUBCASE("uncontrolled nodes stay at zero") {
    alpha(0) = 0.1;
    omega << 0.2, 0.7;
    CHECK(lowpass_derivative(net, alpha, omega, uhat, T)(1) == 0.0);
  }
}

TEST_CASE("safety spec ordering enforced") {
  const NetworkModel net = monitored_two_bus();
  CHECK_NOTHROW(SafetySpec::uniform(net, 0.2, 0.1, 1.0));
  CHECK_THROWS_AS(SafetySpec::uniform(net, 0.1, 0.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SafetySpec::uniform(net, 0.2, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("top layer branch values") {
  const NetworkModel net = monitored_two_bus();
  const SafetySpec spec = SafetySpec::uniform(net, 0.2, 0.1, 1.0);
  SystemState s = SystemState::zero(net);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);

  SUBCASE("dead band") {
    s.omega(0) = 0.0;
    CHECK(top_layer(net, s, p, spec)(0) == 0.0);
    s.omega(0) = 0.09;
    CHECK(top_layer(net, s, p, spec)(0) == 0.0);
  }
  SUBCASE("upper branch, barrier dominates") {
    // v = E*w + [D^T f] - p - alpha = 0.15 - 0.45 = -0.3;
    // barrier = 1*(0.2-0.15)/(0.15-0.1) = 1
    s.omega(0) = 0.15;
    p(0) = 0.45;
    CHECK(top_layer(net, s, p, spec)(0) == doctest::Approx(0.0));
  }
  SUBCASE("upper branch, drift dominates") {
    s.omega(0) = 0.15;
    p(0) = 1.65;  // v = -1.5
    CHECK(top_layer(net, s, p, spec)(0) == doctest::Approx(-0.5));
  }
  SUBCASE("lower branch symmetric") {
    s.omega(0) = -0.15;
    p(0) = -1.65;  // v = +1.5, barrier = 1*(-0.2+0.15)/(-0.1+0.15) = -1
    CHECK(top_layer(net, s, p, spec)(0) == doctest::Approx(0.5));
  }
  SUBCASE("unmonitored node always zero") {
    s.omega(1) = 0.19;
    p(1) = 5.0;
    CHECK(top_layer(net, s, p, spec)(1) == 0.0);
  }
}

TEST_CASE("dissipativity sign of the direct feedback") {
  const NetworkModel net = monitored_two_bus();
  const SafetySpec spec = SafetySpec::uniform(net, 0.2, 0.1, 1.0);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    SystemState s = SystemState::zero(net);
    s.flow(0) = u(rng);
    s.omega << 0.3 * u(rng), 0.3 * u(rng);
    s.alpha_mpc(0) = u(rng);
    Eigen::VectorXd p(2);
    p << u(rng), u(rng);
    const Eigen::VectorXd adf = top_layer(net, s, p, spec);
    CHECK(s.omega(0) * adf(0) <= 0.0);
  }
}

TEST_CASE("barrier keeps the derivative pointing inward at the bounds") {
  const NetworkModel net = monitored_two_bus();
  const SafetySpec spec = SafetySpec::uniform(net, 0.2, 0.1, 1.0);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    SystemState s = SystemState::zero(net);
    s.flow(0) = u(rng);
    s.alpha_mpc(0) = u(rng);
    s.omega(1) = 0.3 * u(rng);
    Eigen::VectorXd p(2);
    p << u(rng), u(rng);

    s.omega(0) = spec.omega_max(0);
    Eigen::VectorXd adf = top_layer(net, s, p, spec);
    StateDerivative d = derivative(net, s, p, s.alpha_mpc + adf);
    CHECK(d.domega(0) <= 1e-12);

    s.omega(0) = spec.omega_min(0);
    adf = top_layer(net, s, p, spec);
    d = derivative(net, s, p, s.alpha_mpc + adf);
    CHECK(d.domega(0) >= -1e-12);
  }
}

TEST_CASE("top layer is continuous across the threshold") {
  const NetworkModel net = monitored_two_bus();
  const SafetySpec spec = SafetySpec::uniform(net, 0.2, 0.1, 1.0);
  SystemState s = SystemState::zero(net);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  p(0) = 2.0;  // large drift so the min is active near the threshold
  double prev = 0.0;
  for (double w = 0.1; w <= 0.1006; w += 1e-4) {
    s.omega(0) = w;
    const double val = top_layer(net, s, p, spec)(0);
    CHECK(std::abs(val - prev) < 0.05);
    prev = val;
  }
}

TEST_CASE("compose") {
  Eigen::VectorXd a(2), b(2);
  a << 0.1, 0.0;
  b << -0.05, 0.0;
  CHECK(compose(a, b)(0) == doctest::Approx(0.05));
  CHECK(compose(a, Eigen::VectorXd::Zero(2)) == a);
}
