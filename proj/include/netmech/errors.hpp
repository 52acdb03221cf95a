#pragma once

#include <stdexcept>
#include <string>

namespace netmech {

/// Malformed or unreadable scenario configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A scenario that violates a modelling assumption (regularity or
/// diagonal dominance). Carries the violated inequality in what().
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Linear solve failed or the system matrix is numerically singular.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace netmech
