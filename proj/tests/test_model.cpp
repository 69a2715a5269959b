#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "colearn/model.hpp"
#include "colearn/synthetic.hpp"

using namespace colearn;

namespace {

// Test-only oracle: central finite differences of the quadratic loss.  Kept
// independent of the analytic predict_gradient path it is checking.
std::vector<double> fd_gradient(const ModelSpec& model, std::vector<double> theta,
                                const Dataset& data, double step = 1e-6) {
  std::vector<double> grad(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double saved = theta[j];
    theta[j] = saved + step;
    const double up = quadratic_loss(model, theta, data);
    theta[j] = saved - step;
    const double down = quadratic_loss(model, theta, data);
    theta[j] = saved;
    grad[j] = (up - down) / (2.0 * step);
  }
  return grad;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

const LogisticGrowthParams kPaperOptimum{1.1224, 229.9285, 0.7259};

}  // namespace

TEST_CASE("logistic_predict closed form") {
  CHECK(logistic_predict(kPaperOptimum, 0.0) == 1.1224);  // N(0) = N0 exactly
  CHECK(logistic_predict({5.0, 5.0, 1.0}, 3.0) == Catch::Approx(5.0));
  // independently evaluated scalar; approaches Ne well within 1%
  const double at24 = logistic_predict(kPaperOptimum, 24.0);
  CHECK(at24 == Catch::Approx(229.92722706685066).epsilon(1e-14));
  CHECK(std::abs(at24 - 229.9285) / 229.9285 < 0.01);
}

TEST_CASE("logistic_predict monotone between N0 and Ne") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> pop(0.5, 300.0), rate(0.05, 2.0);
  int probed = 0;
  for (int trial = 0; trial < 60; ++trial) {
    LogisticGrowthParams p{pop(rng), pop(rng), rate(rng)};
    if (std::abs(p.equilibrium_population - p.initial_population) <
        1e-3 * p.equilibrium_population) {
      continue;  // near-constant curve, nothing to order
    }
    ++probed;
    const bool growing = p.equilibrium_population > p.initial_population;
    // stay where successive values are resolvable in double precision: the
    // tail flattens onto Ne once exp(-r t) underflows the increment scale
    const double t_max = std::min(30.0, 16.0 / p.growth_rate);
    double prev = logistic_predict(p, 0.0);
    for (int i = 1; i <= 120; ++i) {
      const double t = t_max * i / 120.0;
      const double cur = logistic_predict(p, t);
      if (growing) {
        CHECK(cur > prev);
      } else {
        CHECK(cur < prev);
      }
      const double lo = std::min(p.initial_population, p.equilibrium_population);
      const double hi = std::max(p.initial_population, p.equilibrium_population);
      CHECK(cur > lo);
      CHECK(cur < hi);
      prev = cur;
    }
  }
  CHECK(probed >= 50);
}

TEST_CASE("logistic_predict rejects bad input") {
  CHECK_THROWS_AS(logistic_predict(kPaperOptimum, std::nan("")), std::domain_error);
  LogisticGrowthParams bad{-1.0, 10.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  // extreme exponent saturates instead of overflowing
  CHECK(std::isfinite(logistic_predict({1.0, 2.0, 2.0}, -1e6)));
  // a vanishing denominator (decreasing curve probed at negative time) is
  // reported, not returned as inf
  CHECK_THROWS_AS(logistic_predict({2.0, 1.0, 1.0}, -0.6931471805599453), std::domain_error);
}

TEST_CASE("quadratic_loss basics") {
  const ModelSpec linear = make_model("linear");
  Dataset perfect{{{1.0, 3.0}, {2.0, 6.0}}, "fit"};
  std::vector<double> theta{3.0};
  CHECK(quadratic_loss(linear, theta, perfect) == 0.0);

  Dataset single{{{1.0, 1.0}}, "single"};
  CHECK(quadratic_loss(linear, theta, single) == Catch::Approx(4.0));  // (3-1)^2

  Dataset empty;
  CHECK_THROWS_AS(quadratic_loss(linear, theta, empty), std::invalid_argument);
  std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(quadratic_loss(linear, wrong, single), std::invalid_argument);
}

TEST_CASE("quadratic_loss vanishes on noiseless synthetic data") {
  const ModelSpec model = make_model("logistic_growth");
  std::vector<double> times;
  for (int t = 0; t < 24; ++t) times.push_back(t);
  const Dataset exact = generate_logistic(kPaperOptimum, times, 0.0, 99);
  const std::vector<double> theta{kPaperOptimum.initial_population,
                                  kPaperOptimum.equilibrium_population,
                                  kPaperOptimum.growth_rate};
  CHECK(quadratic_loss(model, theta, exact) <= 1e-20);
}

TEST_CASE("quadratic_loss invariant under permutation") {
  const ModelSpec model = make_model("polynomial");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset data;
    for (int i = 0; i < 12; ++i) data.points.push_back({unit(rng), unit(rng)});
    std::vector<double> theta{unit(rng), unit(rng), unit(rng)};
    const double base = quadratic_loss(model, theta, data);
    CHECK(base >= 0.0);
    Dataset shuffled = data;
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
    CHECK(quadratic_loss(model, theta, shuffled) == Catch::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("loss_gradient hand values") {
  const ModelSpec linear = make_model("linear");
  Dataset single{{{1.0, 2.0}}, "d"};
  std::vector<double> zero{0.0};
  const auto grad = loss_gradient(linear, zero, single);
  CHECK(grad.size() == 1);
  CHECK(grad[0] == Catch::Approx(-4.0));  // 2(0-2)*1

  // gradient vanishes at zero residual
  Dataset fit{{{1.0, 3.0}, {2.0, 6.0}}, "d"};
  std::vector<double> theta{3.0};
  CHECK(loss_gradient(linear, theta, fit)[0] == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(-1.5, 1.5);
  std::uniform_real_distribution<double> n0d(0.5, 5.0), ned(50.0, 300.0), rd(0.2, 1.5);
  std::uniform_real_distribution<double> td(0.0, 23.0), yd(0.0, 250.0);

  const auto check_model = [&](const ModelSpec& model, auto draw_theta, auto draw_point) {
    for (int trial = 0; trial < 100; ++trial) {
      const std::vector<double> theta = draw_theta();
      Dataset data;
      const int m = 3 + static_cast<int>(rng() % 10);
      for (int i = 0; i < m; ++i) data.points.push_back(draw_point());
      const auto analytic = loss_gradient(model, theta, data);
      const auto numeric = fd_gradient(model, theta, data);
      std::vector<double> diff(analytic.size());
      for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = analytic[j] - numeric[j];
      CHECK(norm(diff) <= 1e-5 * (1.0 + norm(numeric)));
    }
  };

  check_model(
      make_model("logistic_growth"),
      [&] { return std::vector<double>{n0d(rng), ned(rng), rd(rng)}; },
      [&] { return DataPoint{td(rng), yd(rng)}; });
  check_model(
      make_model("linear"), [&] { return std::vector<double>{unit(rng)}; },
      [&] { return DataPoint{unit(rng), unit(rng)}; });
  check_model(
      make_model("polynomial", 3),
      [&] {
        return std::vector<double>{unit(rng), unit(rng), unit(rng), unit(rng)};
      },
      [&] { return DataPoint{unit(rng), unit(rng)}; });
}

TEST_CASE("clip_gradient growth bound") {
  std::vector<double> zero{0.0, 0.0};
  CHECK(clip_gradient(zero, zero, 1.0) == zero);

  std::vector<double> big{10.0, 0.0};
  const auto clipped = clip_gradient(big, zero, 1.0);
  CHECK(clipped[0] == Catch::Approx(1.0));
  CHECK(clipped[1] == 0.0);

  std::vector<double> small{0.5, 0.0};
  CHECK(clip_gradient(small, zero, 1.0) == small);

  CHECK_THROWS_AS(clip_gradient(big, zero, 0.0), std::invalid_argument);
}

TEST_CASE("clip_gradient properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-20.0, 20.0);
  std::uniform_real_distribution<double> lip(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> g{unit(rng), unit(rng), unit(rng)};
    std::vector<double> theta{unit(rng), unit(rng), unit(rng)};
    const double l_lip = lip(rng);
    const auto once = clip_gradient(g, theta, l_lip);
    const double bound2 = l_lip * (1.0 + norm(theta) * norm(theta));
    CHECK(norm(once) * norm(once) <= bound2 * (1.0 + 1e-12));
    // direction preserved
    if (norm(g) > 0) {
      const double along = std::inner_product(g.begin(), g.end(), once.begin(), 0.0);
      CHECK(along >= 0.0);
      CHECK(std::abs(along - norm(g) * norm(once)) <= 1e-9 * norm(g) * norm(once) + 1e-15);
    }
    // idempotent
    const auto twice = clip_gradient(once, theta, l_lip);
    for (std::size_t j = 0; j < once.size(); ++j) {
      CHECK(twice[j] == Catch::Approx(once[j]).margin(1e-15));
    }
  }
}

TEST_CASE("model registry") {
  CHECK(make_model("logistic_growth").param_dim == 3);
  CHECK(make_model("linear").param_dim == 1);
  CHECK(make_model("polynomial", 4).param_dim == 5);
  CHECK_THROWS_AS(make_model("cubic_spline"), std::invalid_argument);
  CHECK_THROWS_AS(make_model("polynomial", -1), std::invalid_argument);

  // polynomial evaluation sanity: 1 + 2x + 3x^2 at x = 2
  const ModelSpec poly = make_model("polynomial");
  std::vector<double> theta{1.0, 2.0, 3.0};
  CHECK(poly.predict(theta, 2.0) == Catch::Approx(17.0));
}

TEST_CASE("apply_param_box clamps when configured") {
  ModelSpec model = make_model("logistic_growth");
  std::vector<double> theta{-5.0, 400.0, 0.5};
  apply_param_box(model, theta);  // no box: untouched
  CHECK(theta[0] == -5.0);
  model.param_box = {{{0.1, 50.0}, {1.0, 300.0}, {0.01, 5.0}}};
  apply_param_box(model, theta);
  CHECK(theta == std::vector<double>{0.1, 300.0, 0.5});
}
