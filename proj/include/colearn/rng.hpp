#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace colearn {

// One reproducible engine per stream id.  Streams are keyed by
// (master seed, stream id) through std::seed_seq, so the same master seed
// always rebuilds the same family of engines, on any platform.
inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint32_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32), stream_id};
  return std::mt19937_64(seq);
}

// Derives `count` independent streams; stream k belongs to agent k.
inline std::vector<std::mt19937_64> rng_streams(std::uint64_t master_seed, int count) {
  std::vector<std::mt19937_64> streams;
  streams.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    streams.push_back(make_stream(master_seed, static_cast<std::uint32_t>(k)));
  }
  return streams;
}

// Uniform in [0,1) built from the top 53 bits of the engine output.  The
// mapping depends only on the engine's specified bit stream, never on
// distribution internals, which keeps draw sequences portable.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller pair.  Stateless: every pair consumes exactly two engine
// outputs, so stream positions stay predictable across callers.
inline void normal_pair(std::mt19937_64& rng, double& z0, double& z1) {
  const double u1 = 1.0 - uniform01(rng);  // in (0,1], keeps the log finite
  const double u2 = uniform01(rng);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  z0 = radius * std::cos(angle);
  z1 = radius * std::sin(angle);
}

inline void fill_standard_normal(std::mt19937_64& rng, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    normal_pair(rng, out[i], out[i + 1]);
  }
  if (i < out.size()) {
    double discarded;
    normal_pair(rng, out[i], discarded);
  }
}

inline double standard_normal(std::mt19937_64& rng) {
  double z0, z1;
  normal_pair(rng, z0, z1);
  return z0;
}

}  // namespace colearn
