#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pushsum {

inline constexpr const char* kVersion = "0.1.0";

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Round = std::size_t;

/// Base of every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A runtime invariant of the protocol was violated. `invariant()` names it.
class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string invariant, const std::string& detail)
      : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// An iterative solver ran out of budget above its residual threshold.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

inline void require_dimension(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                std::to_string(got) + ", expected " + std::to_string(want) + ")");
  }
}

}  // namespace pushsum
