#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "colearn/agent_dynamics.hpp"
#include "colearn/dataset.hpp"
#include "colearn/errors.hpp"
#include "colearn/model.hpp"
#include "colearn/parallel.hpp"
#include "colearn/principal.hpp"
#include "colearn/rng.hpp"

namespace colearn {

// Everything a run needs beyond the model and the datasets.
struct RunConfig {
  int agent_count = 1;        // K
  double horizon = 1.0;       // T
  long steps = 1;             // N, with delta = T/N
  DynamicsParams dynamics{};  // delta, gamma, eta, c
  PrincipalParams principal{};
  double tol = 1e-8;          // convergence threshold on ||theta_bar step||
  std::uint64_t seed = 0;
  long record_stride = 1;

  // Shared initial state; per-agent overrides win when present.
  std::vector<double> theta0;
  std::vector<double> p0;  // empty means zero momentum
  std::vector<std::vector<double>> theta0_per_agent;
  std::vector<std::vector<double>> p0_per_agent;

  std::optional<std::vector<double>> alpha0;  // positive; default uniform 1/K
  std::optional<double> l_lip;                // gradient clipping when set
  bool use_param_box = false;

  void validate(int param_dim) const {
    if (agent_count < 1) throw std::invalid_argument("agent_count must be >= 1");
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
    dynamics.validate();
    principal.validate();
    if (std::abs(dynamics.delta - horizon / static_cast<double>(steps)) > 1e-15) {
      throw std::invalid_argument("dynamics.delta must equal horizon/steps");
    }
    auto check_len = [param_dim](const std::vector<double>& v, const char* what) {
      if (static_cast<int>(v.size()) != param_dim) {
        throw std::invalid_argument(std::string(what) + " must have model dimension");
      }
    };
    if (theta0_per_agent.empty()) {
      check_len(theta0, "theta0");
    } else {
      if (static_cast<int>(theta0_per_agent.size()) != agent_count) {
        throw std::invalid_argument("theta0_per_agent needs one entry per agent");
      }
      for (const auto& v : theta0_per_agent) check_len(v, "theta0_per_agent entry");
    }
    if (!p0.empty()) check_len(p0, "p0");
    if (!p0_per_agent.empty()) {
      if (static_cast<int>(p0_per_agent.size()) != agent_count) {
        throw std::invalid_argument("p0_per_agent needs one entry per agent");
      }
      for (const auto& v : p0_per_agent) check_len(v, "p0_per_agent entry");
    }
    if (alpha0 && static_cast<int>(alpha0->size()) != agent_count) {
      throw std::invalid_argument("alpha0 needs one entry per agent");
    }
    if (l_lip && !(*l_lip > 0.0)) throw std::invalid_argument("l_lip must be positive");
  }
};

// One recorded iteration: the post-move agent states and the principal's
// response to them.
struct TrajectoryStep {
  long n = 0;       // iteration index, 0-based
  double tau = 0;   // tau_{n+1} = (n+1)*delta
  std::vector<double> theta_bar;           // consensus after this iteration
  std::vector<std::vector<double>> theta;  // per-agent parameters after the move
  std::vector<double> rho;                 // performance indices of the moved estimates
  std::vector<double> alpha;               // updated weighting coefficients
  std::vector<double> pi;                  // updated aggregation coefficients
  double step_loss = 0.0;                  // L_n
};

enum class TerminationReason { kConvergence, kHorizon };

inline const char* to_string(TerminationReason r) {
  return r == TerminationReason::kConvergence ? "convergence" : "horizon";
}

struct TrajectoryRecord {
  std::vector<TrajectoryStep> steps;  // thinned by record_stride
  std::vector<double> step_losses;    // complete, one entry per executed iteration
  std::vector<double> final_theta_bar;
  std::vector<double> final_alpha;
  double final_log_scale = 0.0;
  long steps_executed = 0;
  TerminationReason terminated_by = TerminationReason::kHorizon;
  double cumulative_loss = 0.0;
  double bound = 0.0;
};

struct BoundReport {
  bool ok = false;
  double cumulative_loss = 0.0;
  double bound = 0.0;
};

// Recomputes the cumulative loss from the recorded per-step losses and the
// bound from the final weights; ok iff loss <= bound + 1e-9.
inline BoundReport verify_bound(const TrajectoryRecord& record, double beta) {
  BoundReport report;
  report.cumulative_loss = 0.0;
  for (double l : record.step_losses) report.cumulative_loss += l;
  report.bound = loss_bound(record.final_alpha, beta, record.final_log_scale);
  report.ok = report.cumulative_loss <= report.bound + 1e-9;
  return report;
}

// Runs the full alternation: agents move under the current consensus, the
// principal rescores and reweights, until the consensus stalls or the step
// horizon is reached.  Deterministic given config.seed for any pool size.
inline TrajectoryRecord run(const RunConfig& config, const ModelSpec& model,
                            const std::vector<Dataset>& train_sets, const Dataset& test_set,
                            ThreadPool* pool = nullptr) {
  config.validate(model.param_dim);
  const int agent_count = config.agent_count;
  const std::size_t p = static_cast<std::size_t>(model.param_dim);
  if (static_cast<int>(train_sets.size()) != agent_count) {
    throw std::invalid_argument("need one training set per agent");
  }
  for (const Dataset& d : train_sets) {
    if (d.empty()) throw std::invalid_argument("empty training set: " + d.label);
  }
  if (test_set.empty()) throw std::invalid_argument("empty test set");

  std::vector<std::mt19937_64> streams = rng_streams(config.seed, agent_count);

  // Fan the per-agent block out to the pool only when one iteration carries
  // enough work to amortize the handoff.  Either path produces identical
  // bytes: agents own disjoint slots and their own RNG streams.
  std::size_t points_per_iteration = static_cast<std::size_t>(agent_count) * test_set.size();
  for (const Dataset& d : train_sets) points_per_iteration += d.size();
  const bool fan_out = pool && pool->workers() > 1 && agent_count >= 2 &&
                       points_per_iteration >= 512;

  std::vector<AgentState> agents(static_cast<std::size_t>(agent_count));
  for (int k = 0; k < agent_count; ++k) {
    AgentState& a = agents[static_cast<std::size_t>(k)];
    a.theta = config.theta0_per_agent.empty() ? config.theta0
                                              : config.theta0_per_agent[static_cast<std::size_t>(k)];
    if (!config.p0_per_agent.empty()) {
      a.momentum = config.p0_per_agent[static_cast<std::size_t>(k)];
    } else if (!config.p0.empty()) {
      a.momentum = config.p0;
    } else {
      a.momentum.assign(p, 0.0);
    }
    if (!a.finite()) throw NumericFailure("non-finite initial state", k, -1);
  }

  PrincipalState principal = config.alpha0 ? PrincipalState::from_initial_weights(*config.alpha0)
                                           : PrincipalState::uniform(agent_count);

  std::vector<std::vector<double>> theta_snapshot(static_cast<std::size_t>(agent_count));
  for (int k = 0; k < agent_count; ++k) {
    theta_snapshot[static_cast<std::size_t>(k)] = agents[static_cast<std::size_t>(k)].theta;
  }
  std::vector<double> theta_bar = mean_estimate(theta_snapshot, principal.pi);

  TrajectoryRecord record;
  record.step_losses.reserve(static_cast<std::size_t>(config.steps));

  std::vector<AgentState> next(static_cast<std::size_t>(agent_count));
  std::vector<std::vector<double>> draws(static_cast<std::size_t>(agent_count),
                                         std::vector<double>(p));
  std::vector<double> rho(static_cast<std::size_t>(agent_count));

  long last_recorded = -1;
  const auto record_row = [&](long n, double tau) {
    if (n == last_recorded) return;
    last_recorded = n;
    TrajectoryStep row;
    row.n = n;
    row.tau = tau;
    row.theta_bar = theta_bar;  // caller updates theta_bar before recording
    row.theta = theta_snapshot;
    row.rho.assign(rho.begin(), rho.end());
    row.alpha = principal.alpha;
    row.pi = principal.pi;
    row.step_loss = record.step_losses.back();
    record.steps.push_back(std::move(row));
  };

  TerminationReason terminated_by = TerminationReason::kHorizon;
  long executed = 0;

  const auto agent_task = [&](int k) {
    const std::size_t ku = static_cast<std::size_t>(k);
    const long n = executed;
    const double tau_next = static_cast<double>(n + 1) * config.dynamics.delta;
    try {
      std::vector<double> grad =
          loss_gradient(model, agents[ku].theta, train_sets[ku]);
      if (config.l_lip) grad = clip_gradient(grad, agents[ku].theta, *config.l_lip);
      fill_standard_normal(streams[ku], draws[ku]);
      next[ku] = agent_step(agents[ku], grad, theta_bar, config.dynamics, tau_next, draws[ku]);
      if (config.use_param_box) apply_param_box(model, next[ku].theta);
      rho[ku] = performance_index(model, next[ku].theta, test_set, config.principal.mu);
    } catch (const NumericFailure& e) {
      throw NumericFailure(std::string(e.what()) + " [agent " + std::to_string(k + 1) + ", step " +
                               std::to_string(n) + "]",
                           k, n);
    }
  };

  for (long n = 0; n < config.steps; ++n) {
    executed = n;
    // Step 1: every agent moves against the same consensus; each consumes
    // only its own stream, so the block may run on any number of workers.
    if (fan_out) {
      pool->parallel_for(agent_count, agent_task);
    } else {
      for (int k = 0; k < agent_count; ++k) agent_task(k);
    }
    agents.swap(next);
    for (int k = 0; k < agent_count; ++k) {
      theta_snapshot[static_cast<std::size_t>(k)] = agents[static_cast<std::size_t>(k)].theta;
    }

    // Step 2: principal scores the moved estimates and reweights.
    principal.step(rho, config.principal.beta);
    record.step_losses.push_back(principal.step_losses.back());

    // Step 3: convergence test on the consensus displacement.
    std::vector<double> theta_bar_next = mean_estimate(theta_snapshot, principal.pi);
    double displacement2 = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = theta_bar_next[j] - theta_bar[j];
      displacement2 += d * d;
    }
    theta_bar = std::move(theta_bar_next);

    const bool converged = std::sqrt(displacement2) <= config.tol;
    const bool last = converged || n + 1 == config.steps;
    if (n % config.record_stride == 0 || last) {
      record_row(n, static_cast<double>(n + 1) * config.dynamics.delta);
    }
    if (converged) {
      terminated_by = TerminationReason::kConvergence;
      executed = n + 1;
      break;
    }
    executed = n + 1;
  }

  record.final_theta_bar = theta_bar;
  record.final_alpha = principal.alpha;
  record.final_log_scale = principal.log_scale;
  record.steps_executed = executed;
  record.terminated_by = terminated_by;
  record.cumulative_loss = principal.cumulative_loss;
  record.bound = principal.bound(config.principal.beta);
  return record;
}

}  // namespace colearn
