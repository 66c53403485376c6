#pragma once

#include <stdexcept>
#include <string>

namespace twistbeam {

/// Invalid user input: bad parameters, malformed configuration, inconsistent grids.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation could not reach its accuracy contract (collapse, non-convergence, leakage).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace twistbeam
