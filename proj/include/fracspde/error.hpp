#pragma once

#include <stdexcept>
#include <string>

namespace fracspde {

enum class ErrorKind {
  InvalidLevel,
  InvalidParameter,
  DimensionMismatch,
  Aliasing,
  QuadratureFailure,
  TruncationFailure,
  Divergence,
  InsufficientNoise,
  TimeGridMismatch,
  InsufficientData,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when adaptive quadrature exhausts its interval budget.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(ErrorKind::QuadratureFailure,
              what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved_error() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace fracspde
