#pragma once

#include <cmath>

namespace kurthbif {

/// Bifurcation parameter Gamma together with its exact complement 1 - Gamma.
///
/// The complement is stored once and reused; every bound in the construction is
/// a power of 1 - Gamma, so it must never be recomputed by subtraction from a
/// rounded Gamma.
class GammaParam {
 public:
  /// Smallest exponent k with Gamma = 1 - 2^-k inside the validated range.
  static constexpr int kMinExponent = 12;
  /// Largest k for which 1 - 2^-k is distinct from 1 in double precision.
  static constexpr int kMaxExponent = 52;
  /// Lower end of the range where the iterate series is known to contract.
  static constexpr double kSeriesLowerBound = 1727.0 / 1728.0;

  /// Gamma = 1 - 2^-k, the canonical parametrization. Throws ValidationError outside [12, 52].
  static GammaParam from_exponent(int k);
  /// Gamma = 1: the Kurth solution itself.
  static GammaParam kurth();
  /// Arbitrary Gamma in the pipeline range [1 - 2^-12, 1].
  static GammaParam from_value(double gamma);
  /// Gamma in [1727/1728, 1]: enough for the iterate series, not for the full pipeline.
  static GammaParam series_only(double gamma);

  double gamma() const noexcept { return gamma_; }
  double one_minus_gamma() const noexcept { return one_minus_gamma_; }
  /// Radius 2 (1 - Gamma)^{1/3} of the disk on which the iterate series converges.
  double radius() const noexcept { return 2.0 * std::cbrt(one_minus_gamma_); }
  bool is_kurth() const noexcept { return one_minus_gamma_ == 0.0; }
  bool in_pipeline_range() const noexcept { return one_minus_gamma_ <= std::ldexp(1.0, -kMinExponent); }
  /// The exponent k if Gamma = 1 - 2^-k exactly, otherwise 0.
  int exponent() const noexcept { return exponent_; }

 private:
  GammaParam(double gamma, double one_minus_gamma, int exponent)
      : gamma_(gamma), one_minus_gamma_(one_minus_gamma), exponent_(exponent) {}

  double gamma_;
  double one_minus_gamma_;
  int exponent_;
};

}  // namespace kurthbif
