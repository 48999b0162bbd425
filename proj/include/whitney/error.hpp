#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters (bad N, L, p, grid spacing, ...). Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A geometric property the construction relies on does not hold for the
/// given parameters (e.g. cluster balls fail to nest).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Upstream artifacts disagree (e.g. a square assigned to an unknown cluster).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of budget. Carries the best iterate seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_iterate,
                   double residual)
      : Error(what), best_iterate_(std::move(best_iterate)), residual_(residual) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_iterate_;
  double residual_;
};

}  // namespace whitney
