#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kurthbif {

/// Argument outside the mathematical domain of an operation (chart singularities, s outside [0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid user-supplied configuration: bad Gamma, mixture weights, node counts.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quadrature error estimate exceeded the requested tolerance.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double estimate)
      : std::runtime_error(what + " (estimated error " + std::to_string(estimate) + ")"),
        estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// The iterate series for psi lost its contraction (Gamma too far from 1).
class ContractionError : public std::runtime_error {
 public:
  ContractionError(const std::string& what, double ratio)
      : std::runtime_error(what), ratio_(ratio) {}
  double ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

/// Newton/bisection or another iteration failed to converge.
class IterationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo sampler could not produce samples (zero acceptance, empty support).
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Profile construction failed its own verification; carries the residual profile.
class BuildError : public std::runtime_error {
 public:
  BuildError(const std::string& what, std::vector<double> s, std::vector<double> residual)
      : std::runtime_error(what), s_(std::move(s)), residual_(std::move(residual)) {}
  const std::vector<double>& nodes() const noexcept { return s_; }
  const std::vector<double>& residuals() const noexcept { return residual_; }

 private:
  std::vector<double> s_;
  std::vector<double> residual_;
};

}  // namespace kurthbif
