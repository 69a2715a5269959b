#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "colearn/errors.hpp"

namespace colearn {

// One agent's parameter estimate and momentum, same length p.
struct AgentState {
  std::vector<double> theta;
  std::vector<double> momentum;

  bool finite() const {
    for (double v : theta)
      if (!std::isfinite(v)) return false;
    for (double v : momentum)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

// Scalars of the discretized Langevin update.
struct DynamicsParams {
  double delta;  // time step, > 0
  double gamma;  // friction, > 0
  double eta;    // consensus interaction strength, > 0
  double c;      // base noise level, >= 0

  void validate() const {
    if (!(delta > 0.0) || !(gamma > 0.0) || !(eta > 0.0) || !(c >= 0.0) ||
        !std::isfinite(delta) || !std::isfinite(gamma) || !std::isfinite(eta) || !std::isfinite(c)) {
      throw std::invalid_argument("dynamics params out of range");
    }
    if (!(delta * gamma < 1.0)) {
      throw std::invalid_argument("dynamics require delta*gamma < 1");
    }
  }
};

// Annealed noise amplitude c / sqrt(ln(tau + 2)); strictly decreasing in tau
// and zero when c is zero.
inline double noise_scale(double c, double tau_next) {
  return c / std::sqrt(std::log(tau_next + 2.0));
}

// One explicit step of the underdamped dynamics:
//   theta' = theta + delta * p
//   p'     = (1 - delta*gamma) * p - delta * grad - delta*eta * (theta - theta_bar)
//            + noise_scale(c, tau_next) * sqrt(delta) * xi
// xi is a caller-supplied vector of standard normals, so the map is
// deterministic given the draw; sqrt(delta) gives the increment variance
// delta per coordinate.
inline AgentState agent_step(const AgentState& state, const std::vector<double>& grad,
                             const std::vector<double>& theta_bar, const DynamicsParams& params,
                             double tau_next, const std::vector<double>& noise_draw) {
  const std::size_t p = state.theta.size();
  if (state.momentum.size() != p || grad.size() != p || theta_bar.size() != p ||
      noise_draw.size() != p) {
    throw std::invalid_argument("agent_step: vector length mismatch");
  }
  const double sigma = noise_scale(params.c, tau_next) * std::sqrt(params.delta);
  const double decay = 1.0 - params.delta * params.gamma;

  AgentState next;
  next.theta.resize(p);
  next.momentum.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    next.theta[j] = state.theta[j] + params.delta * state.momentum[j];
    next.momentum[j] = decay * state.momentum[j] - params.delta * grad[j] -
                       params.delta * params.eta * (state.theta[j] - theta_bar[j]) +
                       sigma * noise_draw[j];
  }
  if (!next.finite()) {
    throw NumericFailure("agent_step: non-finite state");
  }
  return next;
}

// pi-weighted consensus estimate; componentwise inside the convex hull of
// the inputs.  pi must lie on the simplex.
inline std::vector<double> mean_estimate(const std::vector<std::vector<double>>& thetas,
                                         const std::vector<double>& pi) {
  if (thetas.empty() || thetas.size() != pi.size()) {
    throw std::invalid_argument("mean_estimate: need one weight per agent");
  }
  double sum = 0.0;
  for (double w : pi) {
    if (w < 0.0) throw std::invalid_argument("mean_estimate: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("mean_estimate: weights must sum to 1");
  }
  const std::size_t p = thetas.front().size();
  std::vector<double> out(p, 0.0);
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (thetas[k].size() != p) throw std::invalid_argument("mean_estimate: mixed dimensions");
    for (std::size_t j = 0; j < p; ++j) out[j] += pi[k] * thetas[k][j];
  }
  return out;
}

}  // namespace colearn
