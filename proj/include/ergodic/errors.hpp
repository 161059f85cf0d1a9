#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace ergodic {

/// Caller supplied an argument outside the operation's domain.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model / scheme combination that the library refuses to run.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested computation has no supported evaluation route.
class UnsupportedConfiguration : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

/// A computation would exceed a hard resource limit (e.g. Poisson intensity).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coefficient or functional produced a non-finite value.
class NumericFault : public std::runtime_error {
 public:
  NumericFault(const std::string& what, Eigen::VectorXd state, double step,
               std::uint64_t index = 0)
      : std::runtime_error(what),
        state_(std::move(state)),
        step_(step),
        index_(index) {}

  const Eigen::VectorXd& state() const { return state_; }
  double step() const { return step_; }
  std::uint64_t index() const { return index_; }

 private:
  Eigen::VectorXd state_;
  double step_;
  std::uint64_t index_;
};

}  // namespace ergodic
