#include "kurthbif/gamma_param.hpp"

#include <cmath>
#include <string>

#include "kurthbif/errors.hpp"

namespace kurthbif {

GammaParam GammaParam::from_exponent(int k) {
  if (k < kMinExponent || k > kMaxExponent) {
    throw ValidationError("gamma exponent k must lie in [" + std::to_string(kMinExponent) + ", " +
                          std::to_string(kMaxExponent) + "] (Gamma = 1 - 2^-k), got " + std::to_string(k));
  }
  const double delta = std::ldexp(1.0, -k);
  return GammaParam(1.0 - delta, delta, k);
}

GammaParam GammaParam::kurth() { return GammaParam(1.0, 0.0, 0); }

GammaParam GammaParam::from_value(double gamma) {
  if (!(gamma >= 1.0 - std::ldexp(1.0, -kMinExponent) && gamma <= 1.0)) {
    throw ValidationError("Gamma must lie in [1 - 2^-12, 1], got " + std::to_string(gamma));
  }
  // exact by Sterbenz for gamma in [1/2, 1]
  const double delta = 1.0 - gamma;
  int e = 0;
  const double mant = std::frexp(delta, &e);
  return GammaParam(gamma, delta, (delta > 0.0 && mant == 0.5) ? 1 - e : 0);
}

GammaParam GammaParam::series_only(double gamma) {
  if (!(gamma >= kSeriesLowerBound && gamma <= 1.0)) {
    throw ValidationError("Gamma must lie in [1727/1728, 1] for the iterate series, got " + std::to_string(gamma));
  }
  return GammaParam(gamma, 1.0 - gamma, 0);
}

}  // namespace kurthbif
