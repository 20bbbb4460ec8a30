#pragma once

// The map h_Gamma, its iterate series and the piecewise solution psi of
//   psi(s) - psi(h(s)) = s,   s in [0, 1].

#include "kurthbif/gamma_param.hpp"

namespace kurthbif {

/// Value and first two derivatives of a scalar function at one point.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// chi(s) = Gamma s / (1 - s) on [0, 1-Gamma], s on [1-Gamma, 1].
double chi(double s, const GammaParam& g);

/// h(s) = s - chi(s); zero on [1-Gamma, 1].
double h(double s, const GammaParam& g);

/// Jet of h on the inner branch: h, h', h'' at s in [0, 1-Gamma].
Jet h_jet(double s, const GammaParam& g);

/// Partial sum of sum_k h^k(s) on [0, 1-Gamma] truncated once the tail bound drops below tol.
/// Also returns the term-wise first and second derivatives.
/// Throws ContractionError if Gamma lies below the contraction range of the series.
Jet psi_tilde_jet(double s, const GammaParam& g, double tol = 1e-18);

inline double psi_tilde(double s, const GammaParam& g, double tol = 1e-18) {
  return psi_tilde_jet(s, g, tol).value;
}

/// Piecewise psi: the iterate series on [0, 1-Gamma), identity on [1-Gamma, 1].
/// The split point itself uses the identity branch.
Jet psi_jet(double s, const GammaParam& g);

inline double psi(double s, const GammaParam& g) { return psi_jet(s, g).value; }
inline double psi_prime(double s, const GammaParam& g) { return psi_jet(s, g).d1; }
inline double psi_second(double s, const GammaParam& g) { return psi_jet(s, g).d2; }

/// Largest observed ratio h^{k+1}(s) / h^k(s) along the orbit of s (0 if the orbit hits 0 at once).
double iterate_ratio(double s, const GammaParam& g);

}  // namespace kurthbif
