#pragma once

// Radial equation phi'' = -1/phi^2 + 1/phi^3, its periodic orbits and the
// eccentric-anomaly representation.

#include <string>
#include <vector>

namespace kurthbif {

/// V(phi) = -1/phi + 1/(2 phi^2).
inline double orbit_potential(double phi) { return -1.0 / phi + 0.5 / (phi * phi); }
inline double orbit_energy(double phi, double phi_dot) { return 0.5 * phi_dot * phi_dot + orbit_potential(phi); }
inline double orbit_accel(double phi) { return -1.0 / (phi * phi) + 1.0 / (phi * phi * phi); }

struct OrbitState {
  double t = 0.0;
  double phi = 1.0;
  double phi_dot = 0.0;
  double energy() const { return orbit_energy(phi, phi_dot); }
};

/// Closed-form data of the orbit through (phi, phi_dot) = (1, eps).
struct PeriodicOrbit {
  double eps = 0.0;
  double period = 0.0;
  double phi_min = 1.0;
  double phi_max = 1.0;
  double energy = -0.5;

  /// Throws DomainError for |eps| >= 1 (unbounded orbit).
  static PeriodicOrbit from_eps(double eps);
};

/// Dense-output trajectory produced by integrate().
class Trajectory {
 public:
  /// Dense output through accepted steps (t_k, phi_k, phi_dot_k); t must be strictly increasing.
  Trajectory(std::vector<double> t, std::vector<double> phi, std::vector<double> phi_dot);

  /// The equilibrium phi = 1 on [t0, t1].
  static Trajectory stationary(double t0, double t1);

  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  double phi(double t) const;
  double phi_dot(double t) const;
  double phi_ddot(double t) const { return orbit_accel(phi(t)); }
  OrbitState state(double t) const { return {t, phi(t), phi_dot(t)}; }

  /// Largest |E(t_k) - E(t_0)| over the accepted steps.
  double max_energy_drift() const { return max_drift_; }
  /// Smallest and largest phi over the accepted steps and their dense output.
  double phi_min() const { return phi_min_; }
  double phi_max() const { return phi_max_; }
  std::size_t steps() const { return t_.size() - 1; }

  /// CSV rows t,phi,phi_dot,energy at n+1 equispaced times.
  std::string to_csv(int n) const;

 private:
  std::size_t segment(double t) const;

  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> yd_;
  double max_drift_ = 0.0;
  double phi_min_ = 1.0;
  double phi_max_ = 1.0;
};

/// Adaptive Dormand-Prince 5(4) integration from ic to t_final.
/// Local error control is set well below tol; throws AccuracyError if the
/// energy drift still exceeds tol, DomainError if phi approaches 0.
Trajectory integrate(const OrbitState& ic, double t_final, double tol = 1e-10);

double period_closed_form(double eps);
/// Twice the turning-point integral of ds / sqrt(2(E - V(s))), computed with
/// s = c - d cos(theta) which removes both endpoint singularities.
double period_quadrature(double eps, int nodes = 32);

/// Time of pericentre passage for the orbit through (1, eps) at t = 0.
double kepler_pericentre_time(double eps);

/// Radius a (1 - e cos E) with a = 1/(1-e^2), mean motion (1-e^2)^{3/2},
/// E solving E - e sin E = n (t - t0). Throws IterationError if Newton and bisection fail.
double kepler_anomaly_phi(double t, double e, double t0);

}  // namespace kurthbif
