#pragma once

#include <stdexcept>
#include <string>

namespace dispctl {

// Bad user input: malformed region, nonsense parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that cannot deliver what was asked (blow-up, stagnation,
// indefinite matrix).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid too coarse to represent the requested band without aliasing.
class AliasingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dispctl
