#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "colearn/dataset.hpp"
#include "colearn/errors.hpp"
#include "colearn/model.hpp"

namespace colearn {

// Principal's scalars: discount base and performance-index scale.
struct PrincipalParams {
  double beta;  // in (0,1)
  double mu;    // > 0

  void validate() const {
    if (!(beta > 0.0) || !(beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  }
};

// Score of one estimate on the held-out set: 1 - exp(-mu * mean test loss).
// Zero exactly on a perfect fit, increasing in the loss, below 1 otherwise
// (saturates to 1.0 in double precision once mu * loss passes ~36).
inline double performance_index(const ModelSpec& model, const std::vector<double>& theta,
                                const Dataset& test_set, double mu) {
  if (test_set.empty()) throw std::invalid_argument("performance_index: empty test set");
  if (!(mu > 0.0)) throw std::invalid_argument("performance_index: mu must be positive");
  return 1.0 - safe_exp(-mu * quadratic_loss(model, theta, test_set));
}

// Multiplicative update alpha' = alpha * beta^rho, written as
// exp(-rho * ln(1/beta)).  Requires every rho in [0,1].
inline std::vector<double> update_weights(const std::vector<double>& alpha,
                                          const std::vector<double>& rho, double beta) {
  if (alpha.size() != rho.size()) throw std::invalid_argument("update_weights: length mismatch");
  if (!(beta > 0.0) || !(beta < 1.0)) throw std::invalid_argument("update_weights: beta must lie in (0,1)");
  const double log_inv_beta = std::log(1.0 / beta);
  std::vector<double> out(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(alpha[k] > 0.0)) throw std::invalid_argument("update_weights: alpha must be positive");
    if (!(rho[k] >= 0.0) || !(rho[k] <= 1.0)) {
      throw std::invalid_argument("update_weights: rho outside [0,1]");
    }
    out[k] = alpha[k] * std::exp(-rho[k] * log_inv_beta);
  }
  return out;
}

// Simplex projection pi = alpha / sum(alpha); invariant under uniform
// rescaling of alpha.
inline std::vector<double> normalize(const std::vector<double>& alpha) {
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0)) throw DegenerateWeights("normalize: nonpositive weight");
    sum += a;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw DegenerateWeights("normalize: weight sum underflowed");
  }
  std::vector<double> pi(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) pi[k] = alpha[k] / sum;
  return pi;
}

// Mixture loss L_n = sum_k pi_k * rho_k; lies in [min rho, max rho].
inline double mixture_loss(const std::vector<double>& pi, const std::vector<double>& rho) {
  if (pi.size() != rho.size()) throw std::invalid_argument("mixture_loss: length mismatch");
  double loss = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) loss += pi[k] * rho[k];
  return loss;
}

// Guaranteed upper bound on the cumulative mixture loss:
//   -(1/(1-beta)) * ln(sum alpha_N)
// log_scale restores the true weight sum when alpha has been renormalized
// against underflow (true sum = current sum * exp(log_scale)).
inline double loss_bound(const std::vector<double>& alpha_final, double beta,
                          double log_scale = 0.0) {
  double sum = 0.0;
  for (double a : alpha_final) sum += a;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw DegenerateWeights("loss_bound: degenerate weight sum");
  }
  return -(std::log(sum) + log_scale) / (1.0 - beta);
}

// Weighting and aggregation coefficients plus the loss ledger.  alpha stays
// strictly positive, pi on the simplex, cumulative_loss tracks the sum of
// step_losses.
struct PrincipalState {
  std::vector<double> alpha;
  std::vector<double> pi;
  double cumulative_loss = 0.0;
  std::vector<double> step_losses;
  // ln of the total factor divided out of alpha by underflow renormalization
  double log_scale = 0.0;

  // Uniform start alpha_0 = pi_0 = 1/K, or an arbitrary positive initial
  // weight vector (normalized copy becomes pi_0; the bound needs sum = 1).
  static PrincipalState uniform(int agent_count) {
    if (agent_count < 1) throw std::invalid_argument("need at least one agent");
    PrincipalState s;
    s.alpha.assign(static_cast<std::size_t>(agent_count), 1.0 / agent_count);
    s.pi = normalize(s.alpha);
    return s;
  }

  static PrincipalState from_initial_weights(const std::vector<double>& alpha0) {
    PrincipalState s;
    s.alpha.assign(alpha0.begin(), alpha0.end());
    s.pi = normalize(s.alpha);
    return s;
  }

  // One decision step: accrues the mixture loss against the current pi,
  // applies the exponential update, guards alpha against underflow, and
  // refreshes pi.  Returns L_n.
  //
  // Two underflow guards keep alpha strictly positive over long runs.  A
  // component whose true weight falls hundreds of orders below the leader
  // is pinned at the smallest normal double; the pinned value is invisible
  // next to the dominant component, so the weight sum, and with it the loss
  // bound, is unchanged at double precision.  When the whole sum approaches
  // the representable floor, alpha is rescaled to sum 1 and the removed
  // factor is accumulated in log_scale so the bound stays exact.
  double step(const std::vector<double>& rho, double beta) {
    const double loss = mixture_loss(pi, rho);
    step_losses.push_back(loss);
    cumulative_loss += loss;
    alpha = update_weights(alpha, rho, beta);
    double sum = 0.0;
    for (double& a : alpha) {
      if (a < std::numeric_limits<double>::min()) a = std::numeric_limits<double>::min();
      sum += a;
    }
    if (sum < 1e-300) {
      log_scale += std::log(sum);
      for (double& a : alpha) a /= sum;
    }
    pi = normalize(alpha);
    return loss;
  }

  double bound(double beta) const { return loss_bound(alpha, beta, log_scale); }
};

}  // namespace colearn
