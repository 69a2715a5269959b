#pragma once

#include <stdexcept>
#include <string>

namespace colearn {

// Raised when an agent update produces or consumes a non-finite value.
// Carries the offending agent index and step when known (-1 otherwise).
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what, int agent = -1, long step = -1)
      : std::runtime_error(what), agent_(agent), step_(step) {}

  int agent() const { return agent_; }
  long step() const { return step_; }

 private:
  int agent_;
  long step_;
};

// Raised when the principal's weights leave the representable regime:
// a nonpositive component, or a weight sum that underflowed to zero.
class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CSV or config-file parse failure; row is 1-based, -1 when not applicable.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, long row = -1)
      : std::runtime_error(what), row_(row) {}

  long row() const { return row_; }

 private:
  long row_;
};

}  // namespace colearn
