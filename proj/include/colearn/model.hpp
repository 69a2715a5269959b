#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "colearn/dataset.hpp"

namespace colearn {

// exp with its argument clamped to the double-precision safe range; extreme
// inputs saturate instead of producing inf/NaN.
inline double safe_exp(double x) {
  return std::exp(std::clamp(x, -700.0, 700.0));
}

// Parameters of the logistic growth law
//   N(t) = N0*Ne / (N0 + (Ne - N0) * exp(-r t)).
struct LogisticGrowthParams {
  double initial_population;      // N0 [organisms], N(0) exactly
  double equilibrium_population;  // Ne [organisms], limit for large t
  double growth_rate;             // r [1/days]

  void validate() const {
    if (!(initial_population > 0.0) || !(equilibrium_population > 0.0) || !(growth_rate > 0.0)) {
      throw std::invalid_argument("logistic params must be strictly positive");
    }
  }
};

inline double logistic_predict(const LogisticGrowthParams& params, double t) {
  if (!std::isfinite(t)) throw std::domain_error("logistic_predict: non-finite time");
  const double n0 = params.initial_population;
  const double ne = params.equilibrium_population;
  const double decay = safe_exp(-params.growth_rate * t);
  const double value = n0 * ne / (n0 + (ne - n0) * decay);
  if (!std::isfinite(value)) throw std::domain_error("logistic_predict: non-finite result");
  return value;
}

// A hypothesis family: prediction h(theta, x), its parameter gradient, the
// parameter dimension, and an optional per-coordinate parameter box.
struct ModelSpec {
  std::string name;
  int param_dim = 0;
  // h(theta, x)
  std::function<double(std::span<const double>, double)> predict;
  // writes d h / d theta into `out` (length param_dim)
  std::function<void(std::span<const double>, double, std::span<double>)> predict_gradient;
  // optional box constraint, (lower, upper) per coordinate with lower < upper
  std::optional<std::vector<std::pair<double, double>>> param_box;
};

namespace detail {

inline void check_loss_args(const ModelSpec& model, const std::vector<double>& theta, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("loss: empty dataset");
  if (static_cast<int>(theta.size()) != model.param_dim) {
    throw std::invalid_argument("loss: parameter length does not match model");
  }
}

}  // namespace detail

// Mean squared error (1/m) sum_i (h(theta, x_i) - y_i)^2.
inline double quadratic_loss(const ModelSpec& model, const std::vector<double>& theta,
                             const Dataset& data) {
  detail::check_loss_args(model, theta, data);
  double total = 0.0;
  for (const DataPoint& p : data.points) {
    const double resid = model.predict(theta, p.x) - p.y;
    total += resid * resid;
  }
  return total / static_cast<double>(data.size());
}

// Analytic gradient of quadratic_loss: (2/m) sum_i resid_i * dh/dtheta(x_i).
inline std::vector<double> loss_gradient(const ModelSpec& model, const std::vector<double>& theta,
                                         const Dataset& data) {
  detail::check_loss_args(model, theta, data);
  const std::size_t p = static_cast<std::size_t>(model.param_dim);
  std::vector<double> grad(p, 0.0);
  std::vector<double> dh(p);
  for (const DataPoint& pt : data.points) {
    const double resid = model.predict(theta, pt.x) - pt.y;
    model.predict_gradient(theta, pt.x, dh);
    for (std::size_t j = 0; j < p; ++j) grad[j] += resid * dh[j];
  }
  const double scale = 2.0 / static_cast<double>(data.size());
  for (double& g : grad) g *= scale;
  return grad;
}

// Rescales g onto the growth bound |g|^2 <= l_lip * (1 + |theta|^2) when it
// falls outside; direction is preserved and the map is idempotent.
inline std::vector<double> clip_gradient(const std::vector<double>& g, const std::vector<double>& theta,
                                         double l_lip) {
  if (!(l_lip > 0.0)) throw std::invalid_argument("clip_gradient: l_lip must be positive");
  double g2 = 0.0, t2 = 0.0;
  for (double v : g) g2 += v * v;
  for (double v : theta) t2 += v * v;
  std::vector<double> out(g.begin(), g.end());
  const double bound2 = l_lip * (1.0 + t2);
  if (g2 > bound2) {
    const double scale = std::sqrt(bound2 / g2);
    for (double& v : out) v *= scale;
  }
  return out;
}

// Clamps theta into the model's box, when one is configured.
inline void apply_param_box(const ModelSpec& model, std::vector<double>& theta) {
  if (!model.param_box) return;
  const auto& box = *model.param_box;
  for (std::size_t j = 0; j < box.size(); ++j) {
    theta[j] = std::clamp(theta[j], box[j].first, box[j].second);
  }
}

// --- registered hypothesis families -------------------------------------

inline ModelSpec make_logistic_growth_model() {
  ModelSpec spec;
  spec.name = "logistic_growth";
  spec.param_dim = 3;
  spec.predict = [](std::span<const double> theta, double t) {
    return logistic_predict({theta[0], theta[1], theta[2]}, t);
  };
  spec.predict_gradient = [](std::span<const double> theta, double t, std::span<double> out) {
    const double n0 = theta[0], ne = theta[1], r = theta[2];
    const double decay = safe_exp(-r * t);
    const double denom = n0 + (ne - n0) * decay;
    const double d2 = denom * denom;
    out[0] = ne * ne * decay / d2;
    out[1] = n0 * n0 * (1.0 - decay) / d2;
    out[2] = n0 * ne * (ne - n0) * t * decay / d2;
  };
  return spec;
}

// h(theta, x) = theta[0] * x
inline ModelSpec make_linear_model() {
  ModelSpec spec;
  spec.name = "linear";
  spec.param_dim = 1;
  spec.predict = [](std::span<const double> theta, double x) { return theta[0] * x; };
  spec.predict_gradient = [](std::span<const double>, double x, std::span<double> out) { out[0] = x; };
  return spec;
}

// h(theta, x) = sum_j theta[j] * x^j, degree >= 0
inline ModelSpec make_polynomial_model(int degree) {
  if (degree < 0) throw std::invalid_argument("polynomial degree must be nonnegative");
  ModelSpec spec;
  spec.name = "polynomial";
  spec.param_dim = degree + 1;
  spec.predict = [](std::span<const double> theta, double x) {
    double acc = 0.0;  // Horner
    for (std::size_t j = theta.size(); j-- > 0;) acc = acc * x + theta[j];
    return acc;
  };
  spec.predict_gradient = [](std::span<const double> theta, double x, std::span<double> out) {
    double pow = 1.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      out[j] = pow;
      pow *= x;
    }
  };
  return spec;
}

// Lookup by registered name: "logistic_growth", "linear", "polynomial".
// poly_degree applies to the polynomial family only.
inline ModelSpec make_model(const std::string& name, int poly_degree = 2) {
  if (name == "logistic_growth") return make_logistic_growth_model();
  if (name == "linear") return make_linear_model();
  if (name == "polynomial") return make_polynomial_model(poly_degree);
  throw std::invalid_argument("unknown model: " + name);
}

}  // namespace colearn
