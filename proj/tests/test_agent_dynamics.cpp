#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "colearn/agent_dynamics.hpp"
#include "colearn/model.hpp"

using namespace colearn;

TEST_CASE("noise_scale schedule") {
  CHECK(noise_scale(0.0, 0.0) == 0.0);
  CHECK(noise_scale(0.0, 123.0) == 0.0);
  CHECK(noise_scale(1.0, std::exp(1.0) - 2.0) == Catch::Approx(1.0).epsilon(1e-14));
  // c from the experiment section, evaluated independently
  CHECK(noise_scale(0.001, 0.0) == Catch::Approx(0.00120112240878645).epsilon(1e-14));

  double prev = noise_scale(0.7, 0.0);
  for (double tau = 0.5; tau < 50.0; tau += 0.5) {
    const double cur = noise_scale(0.7, tau);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("agent_step hand-evaluated cases") {
  const std::vector<double> zero1{0.0};

  SECTION("fixed point of the deterministic map") {
    AgentState s{{1.5, -2.0}, {0.0, 0.0}};
    const std::vector<double> grad{0.0, 0.0};
    const std::vector<double> draw{0.0, 0.0};
    DynamicsParams params{0.1, 1.0, 0.5, 0.0};
    const AgentState next = agent_step(s, grad, s.theta, params, 1.0, draw);
    CHECK(next.theta == s.theta);
    CHECK(next.momentum == s.momentum);
  }

  SECTION("interaction-only pull") {
    AgentState s{{1.0}, {0.0}};
    DynamicsParams params{0.1, 1.0, 0.01, 0.0};
    const AgentState next = agent_step(s, zero1, {{0.0}}, params, 0.1, zero1);
    CHECK(next.theta[0] == Catch::Approx(1.0));
    CHECK(next.momentum[0] == Catch::Approx(-0.001));
  }

  SECTION("free momentum decay") {
    AgentState s{{0.0}, {1.0}};
    DynamicsParams params{0.1, 1.0, 0.5, 0.0};
    const AgentState next = agent_step(s, zero1, {{0.0}}, params, 0.1, zero1);
    CHECK(next.theta[0] == Catch::Approx(0.1));
    CHECK(next.momentum[0] == Catch::Approx(0.9));
  }
}

TEST_CASE("agent_step is deterministic given the draw") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    AgentState s{{unit(rng), unit(rng)}, {unit(rng), unit(rng)}};
    const std::vector<double> grad{unit(rng), unit(rng)};
    const std::vector<double> bar{unit(rng), unit(rng)};
    const std::vector<double> draw{unit(rng), unit(rng)};
    DynamicsParams params{0.01, 2.0, 0.3, 0.05};
    const AgentState a = agent_step(s, grad, bar, params, 0.7, draw);
    const AgentState b = agent_step(s, grad, bar, params, 0.7, draw);
    CHECK(a.theta == b.theta);
    CHECK(a.momentum == b.momentum);
  }
}

TEST_CASE("agent_step rejects broken input") {
  AgentState s{{1.0}, {0.0}};
  DynamicsParams params{0.1, 1.0, 0.5, 0.0};
  const std::vector<double> grad_inf{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(agent_step(s, grad_inf, {{0.0}}, params, 0.1, {{0.0}}), NumericFailure);
  const std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(agent_step(s, wrong, {{0.0}}, params, 0.1, {{0.0}}), std::invalid_argument);
  const DynamicsParams overdriven{0.5, 3.0, 0.1, 0.0};  // delta*gamma >= 1
  CHECK_THROWS_AS(overdriven.validate(), std::invalid_argument);
}

TEST_CASE("mean_estimate convex combinations") {
  const std::vector<std::vector<double>> pair{{0.0}, {2.0}};
  CHECK(mean_estimate(pair, {{0.5, 0.5}})[0] == 1.0);
  CHECK(mean_estimate(pair, {{1.0, 0.0}})[0] == 0.0);  // exactly theta_1

  const std::vector<std::vector<double>> triple{{1.0}, {2.0}, {3.0}};
  CHECK(mean_estimate(triple, {{0.2, 0.3, 0.5}})[0] == Catch::Approx(2.3));

  CHECK_THROWS_AS(mean_estimate(triple, {{0.5, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(mean_estimate(pair, {{0.7, 0.7}}), std::invalid_argument);
  CHECK_THROWS_AS(mean_estimate(pair, {{-0.1, 1.1}}), std::invalid_argument);
}

TEST_CASE("mean_estimate stays in the componentwise hull") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 4);
    std::vector<std::vector<double>> thetas(k, std::vector<double>(3));
    for (auto& th : thetas)
      for (double& v : th) v = unit(rng);
    std::vector<double> pi(k);
    double sum = 0.0;
    for (double& w : pi) {
      w = -std::log(1.0 - uniform01(rng));
      sum += w;
    }
    for (double& w : pi) w /= sum;
    const auto bar = mean_estimate(thetas, pi);
    for (std::size_t j = 0; j < 3; ++j) {
      double lo = thetas[0][j], hi = thetas[0][j];
      for (const auto& th : thetas) {
        lo = std::min(lo, th[j]);
        hi = std::max(hi, th[j]);
      }
      CHECK(bar[j] >= lo - 1e-12);
      CHECK(bar[j] <= hi + 1e-12);
    }
  }
}

namespace {

// Independent oracle for the two-agent consensus check: the same dynamics
// written as a flat 4-dimensional linear recurrence in
// (theta1, p1, theta2, p2), with grad = 0, c = 0 and equal weights.
struct FlatConsensus {
  double t1, p1, t2, p2;
  void step(double delta, double gamma, double eta) {
    const double bar = 0.5 * (t1 + t2);
    const double nt1 = t1 + delta * p1;
    const double np1 = (1.0 - delta * gamma) * p1 - delta * eta * (t1 - bar);
    const double nt2 = t2 + delta * p2;
    const double np2 = (1.0 - delta * gamma) * p2 - delta * eta * (t2 - bar);
    t1 = nt1;
    p1 = np1;
    t2 = nt2;
    p2 = np2;
  }
};

}  // namespace

TEST_CASE("consensus contraction in the deterministic regime") {
  DynamicsParams params{0.01, 1.0, 0.01, 0.0};
  AgentState a{{1.0}, {0.0}};
  AgentState b{{-1.0}, {0.0}};
  FlatConsensus oracle{1.0, 0.0, -1.0, 0.0};
  const std::vector<double> grad{0.0};
  const std::vector<double> draw{0.0};
  const std::vector<double> pi{0.5, 0.5};

  const double initial_spread = std::abs(a.theta[0] - b.theta[0]);
  double prev_spread = initial_spread;
  for (int n = 0; n < 10000; ++n) {
    const auto bar = mean_estimate({{a.theta, b.theta}}, pi);
    const double tau = (n + 1) * params.delta;
    const AgentState na = agent_step(a, grad, bar, params, tau, draw);
    const AgentState nb = agent_step(b, grad, bar, params, tau, draw);
    a = na;
    b = nb;
    oracle.step(params.delta, params.gamma, params.eta);

    const double spread = std::abs(a.theta[0] - b.theta[0]);
    CHECK(spread <= prev_spread + 1e-15);  // non-increasing
    prev_spread = spread;

    CHECK(a.theta[0] == Catch::Approx(oracle.t1).margin(1e-12));
    CHECK(b.theta[0] == Catch::Approx(oracle.t2).margin(1e-12));
  }
  CHECK(prev_spread <= initial_spread);
  // matches the directly simulated recurrence: ~0.368 of the initial spread
  CHECK(prev_spread / initial_spread == Catch::Approx(0.3678799563).epsilon(1e-6));
}

TEST_CASE("single-agent gradient flow decreases a convex loss") {
  // deterministic limit: c = 0, no interaction, strong friction
  const ModelSpec linear = make_model("linear");
  Dataset data{{{1.0, 2.0}}, "probe"};  // J(theta) = (theta - 2)^2
  DynamicsParams params{0.01, 10.0, 0.0, 0.0};
  AgentState s{{5.0}, {0.0}};
  const std::vector<double> draw{0.0};

  double prev_loss = quadratic_loss(linear, s.theta, data);
  bool monotone_after_burn_in = true;
  for (int n = 0; n < 8000; ++n) {
    const auto grad = loss_gradient(linear, s.theta, data);
    s = agent_step(s, grad, s.theta, params, (n + 1) * params.delta, draw);
    const double loss = quadratic_loss(linear, s.theta, data);
    if (n > 100 && loss > prev_loss + 1e-15) monotone_after_burn_in = false;
    prev_loss = loss;
  }
  CHECK(monotone_after_burn_in);
  CHECK(prev_loss < 1e-8);
}
