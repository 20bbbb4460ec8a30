#include "kurthbif/orbit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "kurthbif/errors.hpp"
#include "kurthbif/numerics.hpp"

namespace kurthbif {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double orbit_jerk(double phi, double phi_dot) {
  return (2.0 / (phi * phi * phi) - 3.0 / (phi * phi * phi * phi)) * phi_dot;
}

// quintic Hermite on [0, h] from value, first and second derivative at both ends
double hermite5(double h, double theta, double y0, double d0, double c0, double y1, double d1, double c1) {
  const double t = theta;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double t5 = t4 * t;
  const double h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  const double h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
  const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  const double h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
  return h00 * y0 + h * h10 * d0 + h * h * h20 * c0 + h01 * y1 + h * h11 * d1 + h * h * h21 * c1;
}

}  // namespace

PeriodicOrbit PeriodicOrbit::from_eps(double eps) {
  if (!(std::abs(eps) < 1.0)) throw DomainError("PeriodicOrbit: |eps| must be < 1 for a bounded orbit");
  PeriodicOrbit o;
  o.eps = eps;
  o.period = period_closed_form(eps);
  o.phi_min = 1.0 / (1.0 + std::abs(eps));
  o.phi_max = 1.0 / (1.0 - std::abs(eps));
  o.energy = -0.5 * (1.0 - eps * eps);
  return o;
}

Trajectory::Trajectory(std::vector<double> t, std::vector<double> y, std::vector<double> yd)
    : t_(std::move(t)), y_(std::move(y)), yd_(std::move(yd)) {
  if (t_.size() < 2 || y_.size() != t_.size() || yd_.size() != t_.size()) {
    throw ValidationError("Trajectory: need at least two steps of matching length");
  }
  const double e0 = orbit_energy(y_[0], yd_[0]);
  phi_min_ = phi_max_ = y_[0];
  for (std::size_t k = 0; k < t_.size(); ++k) {
    max_drift_ = std::max(max_drift_, std::abs(orbit_energy(y_[k], yd_[k]) - e0));
    phi_min_ = std::min(phi_min_, y_[k]);
    phi_max_ = std::max(phi_max_, y_[k]);
  }
  // turning points fall between steps; locate them where phi_dot changes sign
  for (std::size_t k = 0; k + 1 < t_.size(); ++k) {
    if (yd_[k] != 0.0 && (yd_[k] > 0.0) != (yd_[k + 1] > 0.0)) {
      const double tp = bracketed_newton([&](double s) { return phi_dot(s); },
                                         [&](double s) { return orbit_accel(phi(s)); }, t_[k], t_[k + 1], 1e-15);
      const double p = phi(tp);
      phi_min_ = std::min(phi_min_, p);
      phi_max_ = std::max(phi_max_, p);
    }
  }
}

Trajectory Trajectory::stationary(double t0, double t1) {
  return Trajectory({t0, std::max(t1, t0 + 1e-300)}, {1.0, 1.0}, {0.0, 0.0});
}

std::size_t Trajectory::segment(double t) const {
  if (!(t >= t_.front() - 1e-12 && t <= t_.back() + 1e-12)) {
    throw DomainError("Trajectory: time outside the integrated window");
  }
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return std::min(k, t_.size() - 2);
}

double Trajectory::phi(double t) const {
  const std::size_t k = segment(t);
  const double h = t_[k + 1] - t_[k];
  if (h == 0.0) return y_[k];
  const double th = (t - t_[k]) / h;
  return hermite5(h, th, y_[k], yd_[k], orbit_accel(y_[k]), y_[k + 1], yd_[k + 1], orbit_accel(y_[k + 1]));
}

double Trajectory::phi_dot(double t) const {
  const std::size_t k = segment(t);
  const double h = t_[k + 1] - t_[k];
  if (h == 0.0) return yd_[k];
  const double th = (t - t_[k]) / h;
  return hermite5(h, th, yd_[k], orbit_accel(y_[k]), orbit_jerk(y_[k], yd_[k]), yd_[k + 1],
                  orbit_accel(y_[k + 1]), orbit_jerk(y_[k + 1], yd_[k + 1]));
}

std::string Trajectory::to_csv(int n) const {
  std::string out = "t,phi,phi_dot,energy\n";
  char buf[160];
  const int m = std::max(1, n);
  for (int i = 0; i <= m; ++i) {
    const double t = i == m ? t_end() : t_begin() + (t_end() - t_begin()) * i / m;
    const double p = phi(t);
    const double pd = phi_dot(t);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", t, p, pd, orbit_energy(p, pd));
    out += buf;
  }
  return out;
}

namespace {

Trajectory integrate_once(const OrbitState& ic, double t_final, double local_tol) {
  // Dormand-Prince 5(4) tableau
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  using State = std::array<double, 2>;
  auto rhs = [](const State& y) -> State {
    if (!(y[0] > 1e-8)) throw DomainError("integrate: phi approached 0 (collision)");
    return {y[1], orbit_accel(y[0])};
  };
  auto axpy = [](const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (const auto& [c, k] : terms) {
      out[0] += h * c * (*k)[0];
      out[1] += h * c * (*k)[1];
    }
    return out;
  };

  State y{ic.phi, ic.phi_dot};
  double t = ic.t;
  std::vector<double> ts{t}, ys{y[0]}, yds{y[1]};
  double h = std::min(1e-2, std::max(t_final - t, 0.0));
  State k1 = rhs(y);
  int guard = 0;
  while (t < t_final) {
    if (++guard > 50'000'000) throw IterationError("integrate: step budget exhausted");
    if (t + h > t_final) h = t_final - t;
    const State k2 = rhs(axpy(y, h, {{a21, &k1}}));
    const State k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State yn = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = rhs(yn);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = local_tol * (1.0 + std::max(std::abs(y[i]), std::abs(yn[i])));
      err = std::max(err, std::abs(ei) / sc);
    }
    if (err <= 1.0) {
      t = (t + h >= t_final) ? t_final : t + h;
      y = yn;
      k1 = k7;
      ts.push_back(t);
      ys.push_back(y[0]);
      yds.push_back(y[1]);
    }
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= fac;
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw IterationError("integrate: step size underflow");
  }
  if (ts.size() == 1) {
    ts.push_back(t + 1e-300);
    ys.push_back(y[0]);
    yds.push_back(y[1]);
  }
  return Trajectory(std::move(ts), std::move(ys), std::move(yds));
}

}  // namespace

Trajectory integrate(const OrbitState& ic, double t_final, double tol) {
  if (!(ic.phi > 0.0)) throw DomainError("integrate: phi must be positive");
  if (!(tol > 0.0)) throw ValidationError("integrate: tol must be positive");
  if (t_final < ic.t) throw DomainError("integrate: t_final before initial time");
  double local = std::max(tol * 1e-3, 1e-15);
  for (int attempt = 0; attempt < 3; ++attempt) {
    Trajectory tr = integrate_once(ic, t_final, local);
    if (tr.max_energy_drift() <= tol) return tr;
    local = std::max(local * 1e-2, 1e-16);
    if (attempt == 2) throw AccuracyError("integrate: energy drift above tolerance", tr.max_energy_drift());
  }
  throw AccuracyError("integrate: energy drift above tolerance", tol);
}

double period_closed_form(double eps) {
  if (!(std::abs(eps) < 1.0)) throw DomainError("period: |eps| must be < 1 for a bounded orbit");
  const double q = 1.0 - eps * eps;
  return kTwoPi / (q * std::sqrt(q));
}

double period_quadrature(double eps, int nodes) {
  if (!(std::abs(eps) < 1.0)) throw DomainError("period: |eps| must be < 1 for a bounded orbit");
  const double E = orbit_energy(1.0, eps);
  // 2(E - V(s)) s^2 = 2E s^2 + 2s - 1 = -2E (s - s1)(s2 - s)
  const double a = 2.0 * E;
  const double disc = std::sqrt(std::max(0.0, 4.0 + 4.0 * a));
  // stable quadratic formula
  const double qq = -0.5 * (2.0 + disc);
  const double r1 = qq / a;
  const double r2 = -1.0 / qq;
  const double s1 = std::min(r1, r2);
  const double s2 = std::max(r1, r2);
  const double c = 0.5 * (s1 + s2);
  const double d = 0.5 * (s2 - s1);
  const double k = std::sqrt(-a);
  // ds / sqrt((s - s1)(s2 - s)) = dtheta under s = c - d cos(theta)
  const double integral = integrate_smooth([&](double th) { return (c - d * std::cos(th)) / k; }, 0.0,
                                           std::numbers::pi, nodes);
  return 2.0 * integral;
}

double kepler_pericentre_time(double eps) {
  if (!(std::abs(eps) < 1.0)) throw DomainError("kepler: |eps| must be < 1");
  const double e = std::abs(eps);
  const double q = 1.0 - e * e;
  const double n = q * std::sqrt(q);
  // phi(0) = 1 forces cos E0 = e; the sign of phi_dot(0) picks the half orbit
  const double E0 = std::copysign(std::acos(e), eps == 0.0 ? 1.0 : eps);
  return -(E0 - e * std::sin(E0)) / n;
}

double kepler_anomaly_phi(double t, double e, double t0) {
  if (!(e >= 0.0 && e < 1.0)) throw DomainError("kepler_anomaly_phi: e must lie in [0, 1)");
  const double q = 1.0 - e * e;
  const double n = q * std::sqrt(q);
  const double a = 1.0 / q;
  const double M = n * (t - t0);
  const double turns = std::floor(M / kTwoPi);
  const double Mr = M - turns * kTwoPi;
  auto f = [&](double E) { return E - e * std::sin(E) - Mr; };
  auto df = [&](double E) { return 1.0 - e * std::cos(E); };
  // f is increasing with f(0) <= 0 <= f(2 pi)
  const double E = bracketed_newton(f, df, 0.0, kTwoPi, 1e-15);
  if (!(std::abs(f(E)) <= 1e-13)) throw IterationError("kepler_anomaly_phi: residual above 1e-13");
  return a * (1.0 - e * std::cos(E));
}

}  // namespace kurthbif
