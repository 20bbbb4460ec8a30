#pragma once

// Quadrature and interpolation building blocks shared by every module.
//
// All rules are fixed-order composite rules. Integrands with x^{+-1/2}
// behaviour at panel ends go through integrate_singular(), which applies the
// cubic map x = a + (b-a)(3t^2 - 2t^3). Its Jacobian 6t(1-t) vanishes to first
// order at both ends, which turns sqrt and inverse-sqrt endpoint behaviour
// into analytic integrands in t.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace kurthbif {

/// Nodes and weights on [-1, 1].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

struct EstimatedValue {
  double value = 0.0;
  double error = 0.0;
};

/// Gauss-Legendre rule with n points (cached; thread-safe).
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Jacobi rule for weight (1-x)^alpha (1+x)^beta via Golub-Welsch.
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

/// Plain Gauss-Legendre on [a, b] for smooth integrands.
template <class F>
double integrate_smooth(F&& f, double a, double b, int n) {
  if (b == a) return 0.0;
  const auto& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

/// Gauss-Legendre after the cubic endpoint map; tolerates (x-a)^{+-1/2}, (b-x)^{+-1/2}.
template <class F>
double integrate_singular(F&& f, double a, double b, int n) {
  if (b == a) return 0.0;
  const auto& rule = gauss_legendre(n);
  const double len = b - a;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (rule.nodes[i] + 1.0);
    const double jac = 6.0 * t * (1.0 - t);
    // evaluate the short side of the panel from the nearer endpoint to keep
    // the offset from the singular point exact in floating point
    const double q = t * t * (3.0 - 2.0 * t);
    const double x = t <= 0.5 ? a + len * q : b - len * ((1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t));
    sum += rule.weights[i] * jac * f(x);
  }
  return 0.5 * len * sum;
}

/// As integrate_singular, but f(x, x - a, b - x) also receives both endpoint offsets,
/// computed from the map parameter rather than by subtraction.
template <class F>
double integrate_singular_offsets(F&& f, double a, double b, int n) {
  if (b == a) return 0.0;
  const auto& rule = gauss_legendre(n);
  const double len = b - a;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (rule.nodes[i] + 1.0);
    const double jac = 6.0 * t * (1.0 - t);
    const double da = len * (t * t * (3.0 - 2.0 * t));
    const double db = len * ((1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t));
    const double x = t <= 0.5 ? a + da : b - db;
    sum += rule.weights[i] * jac * f(x, da, db);
  }
  return 0.5 * len * sum;
}

/// Composite singular-panel integral over consecutive breakpoints (sorted, duplicates ignored).
template <class F>
double integrate_panels(F&& f, std::span<const double> breaks, int n) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (breaks[k + 1] > breaks[k]) sum += integrate_singular(f, breaks[k], breaks[k + 1], n);
  }
  return sum;
}

/// Same as integrate_panels, plus an error estimate from the half-order rule.
template <class F>
EstimatedValue integrate_panels_estimated(F&& f, std::span<const double> breaks, int n) {
  const int coarse = std::max(2, n / 2);
  const double fine = integrate_panels(f, breaks, n);
  const double rough = integrate_panels(f, breaks, coarse);
  return {fine, std::abs(fine - rough)};
}

/// Sorted, deduplicated breakpoints restricted to [lo, hi], always containing lo and hi.
std::vector<double> clip_breaks(double lo, double hi, std::vector<double> interior);

/// Chebyshev points of the first kind on [a, b] (open: no endpoint nodes), ascending.
Eigen::VectorXd chebyshev_nodes(double a, double b, int n);

/// Barycentric interpolation on first-kind Chebyshev points.
double chebyshev_eval(double a, double b, const Eigen::Ref<const Eigen::VectorXd>& values, double x);

/// Piecewise Chebyshev interpolant: one first-kind Chebyshev panel per break interval.
class PiecewiseChebyshev {
 public:
  PiecewiseChebyshev() = default;
  PiecewiseChebyshev(std::vector<double> breaks, int degree);

  /// All interpolation nodes, panel by panel, ascending.
  std::vector<double> nodes() const;
  /// Install sampled values in the order returned by nodes().
  void set_values(std::span<const double> values);

  double operator()(double x) const;

  const std::vector<double>& breaks() const noexcept { return breaks_; }
  int degree() const noexcept { return degree_; }
  bool empty() const noexcept { return values_.empty(); }

 private:
  std::vector<double> breaks_;
  int degree_ = 0;
  std::vector<Eigen::VectorXd> values_;
};

/// Safeguarded root of a monotone-bracketed function: Newton steps inside a shrinking bracket.
template <class F, class DF>
double bracketed_newton(F&& f, DF&& df, double lo, double hi, double xtol, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    if (hi - lo <= xtol) return 0.5 * (lo + hi);
    const double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= xtol) return next;
    x = next;
  }
  return x;
}

}  // namespace kurthbif
