#pragma once

// The steady states f = (3/4pi) Phi'(l^2 - |x|^2 - |v|^2) 1{l^2 <= Gamma},
// their densities, masses, distance to the Kurth state and singular sets.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kurthbif/abel.hpp"
#include "kurthbif/reduction.hpp"

namespace kurthbif {

/// Phi(u) = phi(u + 1) on [-1, 0], zero elsewhere.
double big_phi(double u, const EnergyProfile& profile);
/// Phi'(u) on (-1, 0], zero elsewhere.
double big_phi_prime(double u, const EnergyProfile& profile);
/// Q(u) = (3/4pi) Phi'(u).
double q_weight(double u, const EnergyProfile& profile);

/// (3/4pi) Phi'(l^2 - |x|^2 - |v|^2) 1{l^2 <= Gamma}.
double f_gamma(const PhasePoint& p, const EnergyProfile& profile);

/// Density from the two-branch Abel representation:
///   rho(r) = (3 / (4 s)) [I^{1/2} phi(s) - I^{1/2} phi(h(s))],  s = 1 - r^2,
/// the second term vanishing for r^2 <= Gamma; zero for r > 1.
double rho_f_gamma(double r, const EnergyProfile& profile, const QuadratureSpec& spec);

/// Density as the velocity integral of f_gamma at x = r e3.
double rho_by_velocity(double r, const EnergyProfile& profile, const QuadratureSpec& spec);

/// Reduced-coordinate breakpoints adapted to the profile (kinks of the support and of Phi').
ReducedDomain profile_domain(const EnergyProfile& profile);
/// Velocity-space breakpoints for f_gamma at radius r.
VelocityDomain profile_velocity_domain(double r, const EnergyProfile& profile);

struct MassReport {
  /// int 4 pi r^2 rho(r) dr.
  double radial = 0.0;
  /// Reduced phase-space integral of f.
  double reduced = 0.0;
  double reduced_error = 0.0;
  /// 24 pi^2 |Q|_1 int_0^1 r^2 / sqrt(1 - r^2) dr.
  double upper_bound = 0.0;
};

MassReport total_mass(const EnergyProfile& profile, const QuadratureSpec& spec);

/// Sign changes of phi'_Gamma(s) - 1/(pi^2 sqrt(s)) on (0, 1).
std::vector<double> deviation_sign_changes(const EnergyProfile& profile);

/// || f_Gamma - f_Kurth ||_{L^1} in reduced coordinates.
double l1_distance_to_kurth(const EnergyProfile& profile, const QuadratureSpec& spec);

enum class PointClass { Outside, Interior, NearM, NearN_above, NearN_below };
std::string to_string(PointClass c);

/// Classify by w = |x|^2 + |v|^2 - l^2 relative to 1 and Gamma. "Above" N means w >= Gamma.
PointClass classify_point(const PhasePoint& p, const GammaParam& g, double tol);

/// An evaluatable steady state: the Kurth solution, a single profile, or a convex mixture.
class SteadyState {
 public:
  enum class Kind { Kurth, Gamma, Mixture };

  struct Component {
    double weight = 1.0;
    std::shared_ptr<const EnergyProfile> profile;
    /// Evaluate with the closed Kurth formula instead of the profile.
    bool closed_kurth = false;
  };

  static SteadyState kurth();
  static SteadyState from_profile(std::shared_ptr<const EnergyProfile> profile);
  /// Weights in [0, 1] summing to 1 (within 1e-12). Nested mixtures are flattened.
  static SteadyState mixture(const std::vector<std::pair<double, SteadyState>>& parts);

  Kind kind() const { return kind_; }
  const std::vector<Component>& components() const { return components_; }

  double operator()(const PhasePoint& p) const;
  /// Union of the component supports D_Gamma.
  bool in_support(const PhasePoint& p, double tol = 0.0) const;
  double density(double r, const QuadratureSpec& spec) const;
  /// Largest Gamma among the components (support is contained in D of that Gamma).
  GammaParam max_gamma() const;

 private:
  Kind kind_ = Kind::Kurth;
  std::vector<Component> components_;
};

}  // namespace kurthbif
