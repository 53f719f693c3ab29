#pragma once

#include <stdexcept>
#include <string>

namespace pfr {

/// Invalid input: malformed config, bad parameter, mismatched grids.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Solver breakdown: CG not converging, NaN in a field, divergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pfr
