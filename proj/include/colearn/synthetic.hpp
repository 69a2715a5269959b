#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "colearn/dataset.hpp"
#include "colearn/model.hpp"
#include "colearn/rng.hpp"

namespace colearn {

// Samples the logistic curve at the given times and adds seeded Gaussian
// noise: y_i = N(t_i) + eps_i, eps_i ~ Normal(0, noise_sd^2).  Stands in for
// the digitized growth dataset, which is not distributable.
inline Dataset generate_logistic(const LogisticGrowthParams& params, const std::vector<double>& times,
                                 double noise_sd, std::uint64_t seed) {
  params.validate();
  if (times.empty()) throw std::invalid_argument("generate_logistic: no sample times");
  if (noise_sd < 0.0) throw std::invalid_argument("generate_logistic: negative noise_sd");

  std::mt19937_64 rng = make_stream(seed, 0);
  Dataset out;
  out.label = "synthetic-logistic";
  out.points.reserve(times.size());
  for (double t : times) {
    const double mean = logistic_predict(params, t);
    const double noise = noise_sd > 0.0 ? noise_sd * standard_normal(rng) : 0.0;
    out.points.push_back({t, mean + noise});
  }
  return out;
}

}  // namespace colearn
