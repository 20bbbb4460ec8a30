#pragma once

// The Kurth steady state, its density and potential, and the scaled
// time-periodic family.

#include <functional>
#include <vector>

#include "kurthbif/numerics.hpp"
#include "kurthbif/orbit.hpp"
#include "kurthbif/reduction.hpp"

namespace kurthbif {

/// (3/4pi^3) (1 - |x|^2 - |v|^2 + |x^v|^2)^{-1/2} where that argument is positive and |x^v| < 1.
double f_kurth(const PhasePoint& p);

/// 3/4pi on the closed unit ball.
double rho_kurth(const Vec3<double>& x);
double rho_kurth_radial(double r);

/// |x|^2/2 - 3/2 inside the unit ball, -1/|x| outside.
double u_kurth(const Vec3<double>& x);
Vec3<double> grad_u_kurth(const Vec3<double>& x);

/// phi(t)^{-3} rho_Kurth(x / phi(t)).
double scaled_density(double t, const Vec3<double>& x, const Trajectory& orbit);
/// phi(t)^{-1} U_Kurth(x / phi(t)).
double scaled_potential(double t, const Vec3<double>& x, const Trajectory& orbit);

/// Potential and field of a radial density supported in [0, radius], from the shell formula
///   U(r) = -(1/r) int_0^r 4 pi s^2 rho ds - int_r^inf 4 pi s rho ds.
/// Tabulates the enclosed mass on a fixed grid; the field is M(r)/r^2 along x/|x|.
class ShellPotential {
 public:
  /// rho_breaks are radii where rho is not smooth; rho is sampled at nodes Chebyshev points per panel.
  ShellPotential(std::function<double(double)> rho, double radius, std::vector<double> rho_breaks = {},
                 int panels = 64, int nodes = 12);

  double enclosed_mass(double r) const;
  double potential(double r) const;
  /// dU/dr = M(r)/r^2.
  double radial_field(double r) const;
  Vec3<double> gradient(const Vec3<double>& x) const;
  double total_mass() const { return mass_.back(); }

 private:
  // cumulative integrals on the grid grid_[k]
  double interp_cumulative(const std::vector<double>& cum, double r, int moment) const;

  std::function<double(double)> rho_;
  double radius_;
  int nodes_;
  std::vector<double> grid_;
  PiecewiseChebyshev interp_;
  std::vector<double> mass_;   // int_0^r 4 pi s^2 rho
  std::vector<double> shell_;  // int_0^r 4 pi s rho
};

}  // namespace kurthbif
