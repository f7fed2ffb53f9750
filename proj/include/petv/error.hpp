#pragma once

#include <stdexcept>
#include <string>

namespace petv {

/// Invalid parameters or inconsistent configuration (bad grid, unknown key, singular operator).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector or matrix sizes that do not match the grid or state dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a formula (negative root argument, m(x) <= 0 with fractional power).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Failure inside a numerical kernel (eigensolver budget, non-finite state during time stepping).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_size(long got, long want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(got) + ", expected " +
                         std::to_string(want));
  }
}

}  // namespace detail
}  // namespace petv
