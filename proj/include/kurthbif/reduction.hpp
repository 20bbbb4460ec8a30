#pragma once

// Spherically symmetric phase-space chart (r, p_r, l^2, u), support geometry of
// D_Gamma and the SO(3)-reduced integration rules.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kurthbif/errors.hpp"
#include "kurthbif/gamma_param.hpp"

namespace kurthbif {

template <class Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <class Scalar>
struct PhasePointT {
  Vec3<Scalar> x = Vec3<Scalar>::Zero();
  Vec3<Scalar> v = Vec3<Scalar>::Zero();
};

template <class Scalar>
struct ReducedCoordsT {
  Scalar r{};
  Scalar p_r{};
  Scalar ell2{};
  Scalar u{};
};

using PhasePoint = PhasePointT<double>;
using ReducedCoords = ReducedCoordsT<double>;

/// |x ^ v|^2 computed from the cross product.
template <class Scalar>
Scalar ell2_of(const PhasePointT<Scalar>& p) {
  return p.x.cross(p.v).squaredNorm();
}

/// u = |x ^ v|^2 - |x|^2 - |v|^2, the argument of the profile.
template <class Scalar>
Scalar u_of(const PhasePointT<Scalar>& p) {
  return ell2_of(p) - p.x.squaredNorm() - p.v.squaredNorm();
}

/// Chart map. Throws DomainError at r = 0.
template <class Scalar>
ReducedCoordsT<Scalar> to_reduced(const PhasePointT<Scalar>& p) {
  using std::sqrt;
  const Scalar r2 = p.x.squaredNorm();
  if (!(r2 > Scalar(0))) throw DomainError("to_reduced: r = 0 is a singular point of the chart");
  ReducedCoordsT<Scalar> c;
  c.r = sqrt(r2);
  c.p_r = p.x.dot(p.v) / c.r;
  c.ell2 = ell2_of(p);
  c.u = -(r2 + c.p_r * c.p_r + (c.ell2 / r2) * (Scalar(1) - r2));
  return c;
}

/// l^2 = -(u + r^2 + p_r^2) r^2 / (1 - r^2). May be negative (point outside the chart image).
double ell2_from(double r, double p_r, double u);

/// Canonical representative x = r e3, v = (l/r, 0, p_r) of a reduced point (requires l^2 >= 0).
PhasePoint from_reduced(double r, double p_r, double ell2);

/// gamma = r^2 + Gamma (1 - r^2) / r^2.
double gamma_bar(double r, const GammaParam& g);

enum class RegionCase { Empty, Inner, Outer };

/// The slice of D_Gamma at fixed radius r in the (p_r, u) plane.
struct SupportRegion {
  RegionCase kind = RegionCase::Empty;
  double r = 0.0;
  double gamma = 1.0;
  /// gamma_bar(r) on the outer case, +inf otherwise.
  double gbar = 0.0;

  /// |p_r| <= p_max().
  double p_max() const;
  /// Outer case: |p_r| below this uses the lower bound -gbar - p^2; 0 on the inner case.
  double p_split() const;
  double u_lower(double p_r) const;
  double u_upper(double p_r) const;
  bool contains(double p_r, double u, double tol = 0.0) const;
};

SupportRegion support_region(double r, const GammaParam& g);

/// -1 <= l^2 - |x|^2 - |v|^2 <= 0 and l^2 <= Gamma, with an optional boundary tolerance.
bool in_support(const PhasePoint& p, const GammaParam& g, double tol = 0.0);

struct QuadratureSpec {
  int radial_nodes = 24;
  int pr_nodes = 24;
  int u_nodes = 24;
  int euler_nodes = 12;
  std::int64_t mc_samples = 20000;
  std::uint64_t seed = 12345;
  double tol = 1e-9;

  /// Throws ValidationError unless all counts are >= 1 and tol > 0.
  void validate() const;
  std::string to_json() const;
  static QuadratureSpec from_json(const std::string& text);
};

/// Breakpoints of the integrand over the reduced domain.
struct ReducedDomain {
  /// The integration region is D_gamma.
  GammaParam gamma = GammaParam::kurth();
  /// Interior radial breaks in (0, 1).
  std::vector<double> r_breaks;
  /// Absolute u values where the weight has kinks or endpoint singularities.
  std::vector<double> u_breaks;
  /// Interior p_r breaks in (0, p_max(r)), mirrored to negative p_r.
  std::function<std::vector<double>(double r)> p_breaks;

  /// Geometry of D_Gamma together with the singular value u = -Gamma of the profile
  /// and any further u breaks of the weight.
  static ReducedDomain for_gamma(const GammaParam& g, const std::vector<double>& extra_u_breaks = {});
  /// Region D of the largest Gamma, with the cutoff l^2 = Gamma_i of every entry as a kink.
  static ReducedDomain for_gammas(const std::vector<GammaParam>& gs, const std::vector<double>& extra_u_breaks = {});
};

using ReducedWeight = std::function<double(double r, double p_r, double u)>;
using RotationFactor = std::function<double(const PhasePoint&)>;

/// Integral over D_Gamma of weight(r, p_r, u) * I_g, where I_g = 8 pi^2 without a rotation
/// factor and the Euler-angle average of rotation_factor(R x0, R v0) otherwise.
/// Throws AccuracyError when the half-order estimate exceeds spec.tol (relative to max(1, |value|)).
double reduced_integral(const ReducedWeight& weight, const std::optional<RotationFactor>& rotation_factor,
                        const QuadratureSpec& spec, const ReducedDomain& domain);

/// Same integral together with its error estimate, without throwing.
struct IntegralReport {
  double value = 0.0;
  double error = 0.0;
};
IntegralReport reduced_integral_report(const ReducedWeight& weight,
                                       const std::optional<RotationFactor>& rotation_factor,
                                       const QuadratureSpec& spec, const ReducedDomain& domain);

/// Euler z-y-z rotation R = Rz(alpha) Ry(beta) Rz(gamma).
Eigen::Matrix3d euler_zyz(double alpha, double beta, double gamma);

/// Product rule on SO(3) with total weight 8 pi^2: trapezoid in alpha, gamma, Gauss in cos(beta).
struct SO3Rule {
  std::vector<Eigen::Matrix3d> rotations;
  std::vector<double> weights;
};
SO3Rule so3_rule(int n);

/// Velocity-space breaks for velocity_integral.
struct VelocityDomain {
  double vmax = 1.0;
  /// Interior p_r breaks in (-vmax, vmax).
  std::vector<double> p_breaks;
  /// Interior l^2 breaks at fixed p_r.
  std::function<std::vector<double>(double p_r)> ell2_breaks;
};

/// (1 / 2r^2) int dp_r int dl^2 int dtheta g(v) with v = (l/r cos t, l/r sin t, p_r), over |v| <= vmax.
double velocity_integral(const std::function<double(const Vec3<double>&)>& g, double r,
                         const QuadratureSpec& spec, const VelocityDomain& domain = {});

}  // namespace kurthbif
