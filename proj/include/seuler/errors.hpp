#pragma once

#include <stdexcept>
#include <string>

namespace seuler {

/// Argument outside the mathematical domain of an evaluator (r > 2*pi, |z| >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested value exists only for the divergent class of moduli.
class UnrepresentableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A construction precondition failed; the message names the violated bound.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical procedure did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace seuler
