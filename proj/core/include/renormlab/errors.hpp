#pragma once

#include <stdexcept>
#include <string>

namespace renormlab {

/// Base class for all renormlab errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration, scenario file, or operation preconditions (CLI exit code 2).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Numerical failure: solver non-convergence, non-integrable quadrature (CLI exit code 3).
class SolverError : public Error {
public:
  explicit SolverError(const std::string& what) : Error(what) {}
};

}  // namespace renormlab
