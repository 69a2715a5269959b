#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "colearn/errors.hpp"
#include "colearn/rng.hpp"

namespace colearn {

struct DataPoint {
  double x;  // observation input (time in days for the growth data)
  double y;  // observed output
};

// Ordered observation pairs plus a provenance label ("agent-1",
// "principal-test", ...).  Training and testing operations require the
// set to be nonempty and all coordinates finite.
struct Dataset {
  std::vector<DataPoint> points;
  std::string label;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

enum class PartitionMode {
  kByRange,                     // contiguous 1-based inclusive slices
  kBootstrapWithReplacement,    // seeded resampling, duplicates allowed
  kBootstrapWithoutReplacement  // seeded subsampling of distinct rows
};

// Describes how one source dataset is split into K agent training sets
// followed by the principal's test set (K+1 recipients in total, the test
// set last).
struct PartitionSpec {
  PartitionMode mode = PartitionMode::kByRange;
  // kByRange: one (first,last) pair per recipient, 1-based inclusive.
  std::vector<std::pair<long, long>> ranges;
  // Bootstrap modes: requested sample size per recipient.
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 0;

  std::size_t recipients() const {
    return mode == PartitionMode::kByRange ? ranges.size() : sizes.size();
  }
};

namespace detail {

inline bool parse_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace detail

// Reads a two-column numeric CSV (x,y), optional single header row.  Row
// order is preserved.  Throws ParseError with the offending 1-based row.
inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  Dataset out;
  out.label = path;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view view = detail::strip_cr(line);
    if (view.empty()) continue;
    const std::size_t comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError(path + ": row " + std::to_string(row) + ": expected two comma-separated columns", row);
    }
    double x, y;
    const bool ok = detail::parse_double(view.substr(0, comma), x) &&
                    detail::parse_double(view.substr(comma + 1), y);
    if (!ok) {
      if (row == 1 && out.points.empty()) continue;  // header row
      throw ParseError(path + ": row " + std::to_string(row) + ": non-numeric cell", row);
    }
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw ParseError(path + ": row " + std::to_string(row) + ": non-finite value", row);
    }
    out.points.push_back({x, y});
  }
  if (out.points.empty()) {
    throw ParseError(path + ": no data rows", row);
  }
  return out;
}

// Writes a dataset as "t,y" CSV with 17 significant digits so that
// load_csv(save_csv(d)) reproduces the coordinates bit for bit.
inline void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "t,y\n";
  char buf[64];
  for (const DataPoint& p : data.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.x, p.y);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace detail {

inline void validate_partition(const Dataset& source, const PartitionSpec& spec) {
  const std::size_t m = source.size();
  if (spec.recipients() < 1) throw std::invalid_argument("partition: no recipients");
  if (spec.mode == PartitionMode::kByRange) {
    std::vector<char> taken(m, 0);
    for (const auto& [first, last] : spec.ranges) {
      if (first < 1 || last < first || static_cast<std::size_t>(last) > m) {
        throw std::invalid_argument("partition: range out of bounds");
      }
      for (long i = first; i <= last; ++i) {
        if (taken[static_cast<std::size_t>(i - 1)]++) {
          throw std::invalid_argument("partition: overlapping ranges");
        }
      }
    }
  } else {
    for (std::size_t s : spec.sizes) {
      if (s == 0) throw std::invalid_argument("partition: empty recipient");
    }
    if (spec.mode == PartitionMode::kBootstrapWithoutReplacement) {
      const std::size_t total = std::accumulate(spec.sizes.begin(), spec.sizes.end(), std::size_t{0});
      if (total > m) throw std::invalid_argument("partition: sizes exceed source without replacement");
    }
  }
}

inline std::string recipient_label(std::size_t index, std::size_t count) {
  return index + 1 == count ? std::string("principal-test") : "agent-" + std::to_string(index + 1);
}

}  // namespace detail

// Splits `source` into K agent training sets plus the principal's test set
// (last recipient).  Bootstrap modes are a pure function of (source, spec):
// indices come from the stream keyed by spec.seed, using modular reduction
// so the draw sequence is platform independent.
inline std::vector<Dataset> partition(const Dataset& source, const PartitionSpec& spec) {
  detail::validate_partition(source, spec);
  const std::size_t m = source.size();
  const std::size_t count = spec.recipients();
  std::vector<Dataset> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j].label = detail::recipient_label(j, count);

  switch (spec.mode) {
    case PartitionMode::kByRange:
      for (std::size_t j = 0; j < count; ++j) {
        const auto& [first, last] = spec.ranges[j];
        out[j].points.assign(source.points.begin() + (first - 1), source.points.begin() + last);
      }
      break;
    case PartitionMode::kBootstrapWithReplacement: {
      std::mt19937_64 rng = make_stream(spec.seed, 0);
      for (std::size_t j = 0; j < count; ++j) {
        out[j].points.reserve(spec.sizes[j]);
        for (std::size_t i = 0; i < spec.sizes[j]; ++i) {
          out[j].points.push_back(source.points[rng() % m]);
        }
      }
      break;
    }
    case PartitionMode::kBootstrapWithoutReplacement: {
      std::mt19937_64 rng = make_stream(spec.seed, 0);
      std::vector<std::size_t> pool(m);
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t i = m - 1; i > 0; --i) {  // Fisher-Yates
        std::swap(pool[i], pool[rng() % (i + 1)]);
      }
      std::size_t next = 0;
      for (std::size_t j = 0; j < count; ++j) {
        out[j].points.reserve(spec.sizes[j]);
        for (std::size_t i = 0; i < spec.sizes[j]; ++i) {
          out[j].points.push_back(source.points[pool[next++]]);
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace colearn
