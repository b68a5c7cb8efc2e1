#pragma once

#include <stdexcept>

namespace ncsched {

/// Malformed input: bad dimensions, out-of-range parameters, unparsable files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A plant/gain pair that cannot be made (or is not) Schur stable.
class NotStabilizable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The m/p/Pi heuristic produced values outside their admissible range.
class InfeasibleHeuristic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No alpha on the search grid produced a feasible scheduler design.
class InfeasibleDesign : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation state left the finite range.
class Divergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ncsched
