#pragma once

#include <stdexcept>
#include <string>

namespace pcmpc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested object would not fit the platform's index range.
struct SizeError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

/// Rank-deficient regression or linear system.
struct SingularityError : Error {
  using Error::Error;
};

struct IntegrationError : Error {
  IntegrationError(const std::string& what, double last_time)
      : Error(what), last_accepted_time(last_time) {}
  double last_accepted_time;
};

struct ConvergenceError : Error {
  using Error::Error;
};

struct InfeasibleError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pcmpc
