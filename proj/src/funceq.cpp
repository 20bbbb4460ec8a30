#include "kurthbif/funceq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kurthbif/errors.hpp"

namespace kurthbif {

namespace {

void check_unit_interval(double s, const char* who) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError(std::string(who) + ": s must lie in [0, 1]");
}

}  // namespace

double chi(double s, const GammaParam& g) {
  check_unit_interval(s, "chi");
  const double delta = g.one_minus_gamma();
  if (s >= delta) return s;
  return g.gamma() * s / (1.0 - s);
}

double h(double s, const GammaParam& g) {
  check_unit_interval(s, "h");
  const double delta = g.one_minus_gamma();
  if (s >= delta) return 0.0;
  // s (1 - Gamma/(1-s)) written without the cancelling subtraction
  return s * (delta - s) / (1.0 - s);
}

Jet h_jet(double s, const GammaParam& g) {
  const double delta = g.one_minus_gamma();
  const double q = 1.0 - s;
  Jet j;
  j.value = s * (delta - s) / q;
  // h'(s) = 1 - Gamma/(1-s)^2 = ((1-s)^2 - Gamma)/(1-s)^2 = (delta - 2s + s^2)/(1-s)^2
  j.d1 = (delta - s * (2.0 - s)) / (q * q);
  j.d2 = -2.0 * g.gamma() / (q * q * q);
  return j;
}

Jet psi_tilde_jet(double s, const GammaParam& g, double tol) {
  const double delta = g.one_minus_gamma();
  if (!(s >= 0.0 && s <= delta)) throw DomainError("psi_tilde: s must lie in [0, 1-Gamma]");
  // |h_c(z)| <= 6 (1-Gamma)^{1/3} |z| on the disk of radius R; the series is only
  // known to converge when that factor is at most 1/2
  const double disk_ratio = 6.0 * std::cbrt(delta);
  if (disk_ratio > 0.5) {
    throw ContractionError("psi_tilde: Gamma below the contraction range [1727/1728, 1)", disk_ratio);
  }
  Jet sum;
  double x = s;
  double d = 1.0;
  double dd = 0.0;
  double ratio = 0.0;
  for (int k = 0; k < 200; ++k) {
    sum.value += x;
    sum.d1 += d;
    sum.d2 += dd;
    const Jet hj = h_jet(x, g);
    const double nx = hj.value;
    const double nd = hj.d1 * d;
    const double ndd = hj.d2 * d * d + hj.d1 * dd;
    if (x > 0.0) ratio = std::max(ratio, nx / x);
    if (ratio > 0.5) throw ContractionError("psi_tilde: measured iterate ratio exceeds 1/2", ratio);
    // geometric tails; derivative terms contract at rate |h'| <= 2 (1-Gamma) near the orbit
    const double q = std::max({ratio, std::abs(hj.d1), 1e-300});
    const double tail_factor = 1.0 / (1.0 - std::min(q, 0.5));
    if (std::abs(nx) * tail_factor < tol && std::abs(nd) * tail_factor < tol &&
        std::abs(ndd) * tail_factor < tol * std::max(1.0, std::abs(sum.d2))) {
      sum.value += nx;
      sum.d1 += nd;
      sum.d2 += ndd;
      return sum;
    }
    x = nx;
    d = nd;
    dd = ndd;
  }
  throw ContractionError("psi_tilde: series did not reach tolerance", ratio);
}

Jet psi_jet(double s, const GammaParam& g) {
  check_unit_interval(s, "psi");
  if (s >= g.one_minus_gamma()) return {s, 1.0, 0.0};
  return psi_tilde_jet(s, g);
}

double iterate_ratio(double s, const GammaParam& g) {
  double ratio = 0.0;
  double x = s;
  for (int k = 0; k < 200 && x > 0.0; ++k) {
    const double nx = h(x, g);
    ratio = std::max(ratio, nx / x);
    x = nx;
  }
  return ratio;
}

}  // namespace kurthbif
