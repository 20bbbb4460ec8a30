#include "kurthbif/kurth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kurthbif/numerics.hpp"

namespace kurthbif {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kRhoBall = 3.0 / (4.0 * kPi);
}  // namespace

double f_kurth(const PhasePoint& p) {
  const double l2 = ell2_of(p);
  const double arg = 1.0 - p.x.squaredNorm() - p.v.squaredNorm() + l2;
  // both conditions are needed: arg > 0 alone does not force |x^v| < 1
  if (!(arg > 0.0) || !(l2 < 1.0)) return 0.0;
  return 3.0 / (4.0 * kPi * kPi * kPi) / std::sqrt(arg);
}

double rho_kurth_radial(double r) { return r <= 1.0 ? kRhoBall : 0.0; }

double rho_kurth(const Vec3<double>& x) { return rho_kurth_radial(x.norm()); }

double u_kurth(const Vec3<double>& x) {
  const double r2 = x.squaredNorm();
  if (r2 <= 1.0) return 0.5 * r2 - 1.5;
  return -1.0 / std::sqrt(r2);
}

Vec3<double> grad_u_kurth(const Vec3<double>& x) {
  const double r2 = x.squaredNorm();
  if (r2 <= 1.0) return x;
  return x / (r2 * std::sqrt(r2));
}

double scaled_density(double t, const Vec3<double>& x, const Trajectory& orbit) {
  const double ph = orbit.phi(t);
  if (!(ph > 0.0)) throw DomainError("scaled_density: phi(t) must be positive");
  return rho_kurth(x / ph) / (ph * ph * ph);
}

double scaled_potential(double t, const Vec3<double>& x, const Trajectory& orbit) {
  const double ph = orbit.phi(t);
  if (!(ph > 0.0)) throw DomainError("scaled_potential: phi(t) must be positive");
  return u_kurth(x / ph) / ph;
}

ShellPotential::ShellPotential(std::function<double(double)> rho, double radius, std::vector<double> rho_breaks,
                               int panels, int nodes)
    : rho_(std::move(rho)), radius_(radius), nodes_(nodes) {
  if (!(radius > 0.0) || panels < 1 || nodes < 2) throw ValidationError("ShellPotential: bad layout");
  std::vector<double> interior = std::move(rho_breaks);
  for (int k = 1; k < panels; ++k) interior.push_back(radius * k / panels);
  grid_ = clip_breaks(0.0, radius, interior);
  interp_ = PiecewiseChebyshev(grid_, nodes);
  std::vector<double> samples;
  for (double r : interp_.nodes()) samples.push_back(rho_(r));
  interp_.set_values(samples);
  mass_.assign(grid_.size(), 0.0);
  shell_.assign(grid_.size(), 0.0);
  for (std::size_t k = 0; k + 1 < grid_.size(); ++k) {
    mass_[k + 1] = mass_[k] + integrate_smooth([&](double s) { return 4.0 * kPi * s * s * interp_(s); }, grid_[k],
                                               grid_[k + 1], nodes_);
    shell_[k + 1] = shell_[k] + integrate_smooth([&](double s) { return 4.0 * kPi * s * interp_(s); }, grid_[k],
                                                 grid_[k + 1], nodes_);
  }
}

double ShellPotential::interp_cumulative(const std::vector<double>& cum, double r, int moment) const {
  if (r <= 0.0) return 0.0;
  if (r >= radius_) return cum.back();
  auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double a = grid_[k];
  const double part = integrate_smooth(
      [&](double s) { return 4.0 * kPi * (moment == 2 ? s * s : s) * interp_(std::min(s, radius_)); }, a, r,
      nodes_);
  return cum[k] + part;
}

double ShellPotential::enclosed_mass(double r) const { return interp_cumulative(mass_, r, 2); }

double ShellPotential::potential(double r) const {
  const double m = enclosed_mass(r);
  const double outer = shell_.back() - interp_cumulative(shell_, r, 1);
  if (r <= 0.0) return -shell_.back();
  return -m / r - outer;
}

double ShellPotential::radial_field(double r) const {
  if (r <= 0.0) return 0.0;
  return enclosed_mass(r) / (r * r);
}

Vec3<double> ShellPotential::gradient(const Vec3<double>& x) const {
  const double r = x.norm();
  if (r == 0.0) return Vec3<double>::Zero();
  return x * (radial_field(r) / r);
}

}  // namespace kurthbif
