#include "kurthbif/steady.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kurthbif/kurth.hpp"

namespace kurthbif {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

double phi_kurth(double s) { return s > 0.0 ? 2.0 * std::sqrt(s) / kPi2 : 0.0; }

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

double big_phi(double u, const EnergyProfile& profile) {
  if (u <= -1.0) return 0.0;
  if (u > 0.0) return profile.phi(1.0);
  return profile.phi(u + 1.0);
}

double big_phi_prime(double u, const EnergyProfile& profile) {
  if (u <= -1.0 || u > 0.0) return 0.0;
  return profile.phi_prime(u + 1.0);
}

double q_weight(double u, const EnergyProfile& profile) { return 0.75 / kPi * big_phi_prime(u, profile); }

double f_gamma(const PhasePoint& p, const EnergyProfile& profile) {
  const double l2 = ell2_of(p);
  if (l2 > profile.gamma().gamma()) return 0.0;
  // s = u + 1 directly, avoids one rounding near the split
  const double s = 1.0 + l2 - p.x.squaredNorm() - p.v.squaredNorm();
  if (s <= 0.0 || s > 1.0) return 0.0;
  return 0.75 / kPi * profile.phi_prime(s);
}

double rho_f_gamma(double r, const EnergyProfile& profile, const QuadratureSpec& spec) {
  if (!(r >= 0.0)) throw DomainError("rho_f_gamma: r must be non-negative");
  if (r > 1.0) return 0.0;
  const GammaParam& g = profile.gamma();
  const double delta = g.one_minus_gamma();
  if (r == 1.0) {
    const double eps = 1e-200;
    return 0.375 * kPi * (1.0 - delta) * profile.phi(eps) / std::sqrt(eps);
  }
  const double s = (1.0 - r) * (1.0 + r);
  const std::vector<double> bp = profile.breakpoints();
  ProfileFn phi = [&](double x) { return profile.phi(x); };
  double val = abel_apply(phi, s, spec, bp);
  if (s < delta) val -= abel_apply(phi, h(s, g), spec, bp);
  return 0.75 / s * val;
}

ReducedDomain profile_domain(const EnergyProfile& profile) {
  std::vector<double> ub;
  for (double b : profile.breakpoints()) ub.push_back(b - 1.0);
  return ReducedDomain::for_gamma(profile.gamma(), ub);
}

VelocityDomain profile_velocity_domain(double r, const EnergyProfile& profile) {
  VelocityDomain d;
  d.vmax = 1.0;
  const GammaParam& g = profile.gamma();
  const double r2 = r * r;
  const double q = (1.0 - r) * (1.0 + r);
  std::vector<double> levels{-1.0};
  for (double b : profile.breakpoints()) levels.push_back(b - 1.0);
  const bool cut = !g.is_kurth() && r > 0.0;
  const double gbar = cut ? gamma_bar(r, g) : 0.0;
  for (double b : levels) {
    if (-b - r2 > 0.0) {
      d.p_breaks.push_back(std::sqrt(-b - r2));
      d.p_breaks.push_back(-std::sqrt(-b - r2));
    }
    if (cut && -b - gbar > 0.0) {
      d.p_breaks.push_back(std::sqrt(-b - gbar));
      d.p_breaks.push_back(-std::sqrt(-b - gbar));
    }
  }
  d.p_breaks.push_back(0.0);
  sort_unique(d.p_breaks);
  const double gam = g.gamma();
  d.ell2_breaks = [levels, r2, q, gam](double p) {
    std::vector<double> out;
    if (gam < 1.0) out.push_back(gam);
    // u = -r^2 - p^2 - l^2 (1 - r^2)/r^2 reaches b
    for (double b : levels) out.push_back((-b - r2 - p * p) * r2 / q);
    return out;
  };
  return d;
}

double rho_by_velocity(double r, const EnergyProfile& profile, const QuadratureSpec& spec) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("rho_by_velocity: r must lie in (0, 1)");
  const Vec3<double> x(0.0, 0.0, r);
  auto f = [&](const Vec3<double>& v) {
    PhasePoint p;
    p.x = x;
    p.v = v;
    return f_gamma(p, profile);
  };
  // f depends on v only through p_r and l^2, so two angles are plenty
  QuadratureSpec s = spec;
  s.euler_nodes = 1;
  return velocity_integral(f, r, s, profile_velocity_domain(r, profile));
}

MassReport total_mass(const EnergyProfile& profile, const QuadratureSpec& spec) {
  spec.validate();
  MassReport rep;
  const GammaParam& g = profile.gamma();
  std::vector<double> rb{0.0, 1.0};
  if (!g.is_kurth()) rb.push_back(std::sqrt(g.gamma()));
  for (double b : profile.breakpoints()) rb.push_back(std::sqrt(1.0 - b));
  sort_unique(rb);
  rep.radial = integrate_panels(
      [&](double r) { return 4.0 * kPi * r * r * rho_f_gamma(r, profile, spec); }, rb, spec.radial_nodes);

  const ReducedWeight w = [&](double, double, double u) { return q_weight(u, profile); };
  const IntegralReport red = reduced_integral_report(w, std::nullopt, spec, profile_domain(profile));
  rep.reduced = red.value;
  rep.reduced_error = red.error;
  // ||Q||_1 = (3/4pi) phi(1), int_0^1 r^2/sqrt(1-r^2) dr = pi/4
  rep.upper_bound = 24.0 * kPi2 * (0.75 / kPi) * profile.phi(1.0) * kPi / 4.0;
  return rep;
}

std::vector<double> deviation_sign_changes(const EnergyProfile& profile) {
  const GammaParam& g = profile.gamma();
  if (g.is_kurth()) return {};
  const double delta = g.one_minus_gamma();
  auto dev = [&](double s) { return profile.phi_prime(s) - 1.0 / (kPi2 * std::sqrt(s)); };

  std::vector<double> grid;
  const int n_inner = 400;
  for (int i = 0; i <= n_inner; ++i) grid.push_back(delta * std::pow(1e-12, 1.0 - double(i) / n_inner));
  const double wmax = std::sqrt((1.0 - delta));
  const double w0 = 1e-7 * std::sqrt(delta);
  const int n_outer = 800;
  for (int i = 0; i <= n_outer; ++i) {
    const double w = w0 * std::pow(wmax / w0, double(i) / n_outer);
    grid.push_back(delta + w * w);
  }
  grid.back() = 1.0;
  sort_unique(grid);

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double a = grid[i];
    double b = grid[i + 1];
    // the jump at delta is not a root of a continuous function
    if (a < delta && b > delta) continue;
    double fa = dev(a);
    const double fb = dev(b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0)) continue;
    // sign flips at the interpolation noise level are not roots
    const double floor = 1e-11 / (kPi2 * std::sqrt(a));
    if (std::abs(fa) < floor && std::abs(fb) < floor) continue;
    for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = dev(m);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  sort_unique(roots);
  return roots;
}

namespace {

struct L1Kernel {
  const EnergyProfile& profile;
  std::vector<double> cuts;  // monotonicity and scale points of phi - phi_1

  double dphi(double s) const { return profile.phi(s) - phi_kurth(s); }

  // total variation of phi - phi_1 on [a, b]
  double variation(double a, double b) const {
    if (!(b > a)) return 0.0;
    double total = 0.0;
    double prev = dphi(a);
    auto lo = std::upper_bound(cuts.begin(), cuts.end(), a);
    for (auto it = lo; it != cuts.end() && *it < b; ++it) {
      const double v = dphi(*it);
      total += std::abs(v - prev);
      prev = v;
    }
    return total + std::abs(dphi(b) - prev);
  }
};

double l1_pass(const L1Kernel& k, const GammaParam& g, int nr, int np) {
  const double gam = g.gamma();
  auto p_integrand = [&](double r, double gbar, double p) {
    const double p2 = p * p;
    const double up = -r * r - p2;
    if (!(up > -1.0)) return 0.0;
    const double lo = std::max(-1.0, -gbar - p2);
    if (!(up > lo)) return phi_kurth(up + 1.0);
    return phi_kurth(lo + 1.0) + k.variation(lo + 1.0, (1.0 - r) * (1.0 + r) - p2);
  };
  auto r_integrand = [&](double r) {
    if (!(r > 0.0 && r < 1.0)) return 0.0;
    const double q = (1.0 - r) * (1.0 + r);
    const double gbar = gamma_bar(r, g);
    std::vector<double> pb;
    std::vector<double> levels = k.cuts;
    levels.push_back(0.0);
    for (double c : levels) {
      if (q - c > 0.0) pb.push_back(std::sqrt(q - c));
      if (1.0 - gbar - c > 0.0) pb.push_back(std::sqrt(1.0 - gbar - c));
    }
    const double pm = std::sqrt(q);
    const std::vector<double> br = clip_breaks(0.0, pm, pb);
    // integrand is even in p
    const double inner = 2.0 * integrate_panels([&](double p) { return p_integrand(r, gbar, p); }, br, np);
    return r * r / q * inner;
  };
  std::vector<double> rb;
  rb.push_back(std::sqrt(gam));
  std::vector<double> levels = k.cuts;
  levels.push_back(0.0);
  for (double c : levels) {
    if (c < 1.0) rb.push_back(std::sqrt(1.0 - c));
    // gbar(r) = 1 - c  <=>  x^2 - (Gamma + 1 - c) x + Gamma = 0 with x = r^2
    const double bq = gam + 1.0 - c;
    const double disc = bq * bq - 4.0 * gam;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      for (double x : {0.5 * (bq - sq), 0.5 * (bq + sq)}) {
        if (x > 0.0 && x < 1.0) rb.push_back(std::sqrt(x));
      }
    }
  }
  const std::vector<double> rr = clip_breaks(0.0, 1.0, rb);
  return 3.0 * kPi * integrate_panels(r_integrand, rr, nr);
}

}  // namespace

double l1_distance_to_kurth(const EnergyProfile& profile, const QuadratureSpec& spec) {
  spec.validate();
  const GammaParam& g = profile.gamma();
  if (g.is_kurth()) return 0.0;
  L1Kernel k{profile, deviation_sign_changes(profile)};
  for (double b : profile.breakpoints()) k.cuts.push_back(b);
  sort_unique(k.cuts);
  const double fine = l1_pass(k, g, spec.radial_nodes, spec.pr_nodes);
  const double coarse =
      l1_pass(k, g, std::max(2, (2 * spec.radial_nodes) / 3), std::max(2, (2 * spec.pr_nodes) / 3));
  const double err = std::abs(fine - coarse);
  if (err > spec.tol * std::max(1.0, std::abs(fine)) && err > 1e-6 * std::abs(fine)) {
    throw AccuracyError("l1_distance_to_kurth: quadrature did not reach tolerance", err);
  }
  return fine;
}

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::Outside: return "outside";
    case PointClass::Interior: return "interior";
    case PointClass::NearM: return "near_M";
    case PointClass::NearN_above: return "near_N_above";
    case PointClass::NearN_below: return "near_N_below";
  }
  return "unknown";
}

PointClass classify_point(const PhasePoint& p, const GammaParam& g, double tol) {
  if (!(tol >= 0.0)) throw ValidationError("classify_point: tol must be non-negative");
  const double l2 = ell2_of(p);
  const double w = p.x.squaredNorm() + p.v.squaredNorm() - l2;
  if (l2 > g.gamma() || w > 1.0 || w < 0.0) return PointClass::Outside;
  const double gam = g.gamma();
  const double dm = std::abs(w - 1.0);
  const double dn = std::abs(w - gam);
  if (dm <= tol && (dm <= dn || g.is_kurth())) return PointClass::NearM;
  if (!g.is_kurth() && dn <= tol) return w >= gam ? PointClass::NearN_above : PointClass::NearN_below;
  return PointClass::Interior;
}

SteadyState SteadyState::kurth() {
  SteadyState st;
  st.kind_ = Kind::Kurth;
  Component c;
  c.weight = 1.0;
  c.profile = std::make_shared<ProfileTable>(GammaParam::kurth());
  c.closed_kurth = true;
  st.components_.push_back(std::move(c));
  return st;
}

SteadyState SteadyState::from_profile(std::shared_ptr<const EnergyProfile> profile) {
  if (!profile) throw ValidationError("SteadyState: null profile");
  SteadyState st;
  st.kind_ = Kind::Gamma;
  st.components_.push_back({1.0, std::move(profile), false});
  return st;
}

SteadyState SteadyState::mixture(const std::vector<std::pair<double, SteadyState>>& parts) {
  if (parts.empty()) throw ValidationError("SteadyState::mixture: no components");
  double total = 0.0;
  SteadyState st;
  st.kind_ = Kind::Mixture;
  for (const auto& [w, s] : parts) {
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("SteadyState::mixture: weights must lie in [0, 1]");
    total += w;
    for (const Component& c : s.components_) {
      Component cc = c;
      cc.weight = w * c.weight;
      st.components_.push_back(std::move(cc));
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("SteadyState::mixture: weights must sum to 1");
  return st;
}

double SteadyState::operator()(const PhasePoint& p) const {
  double sum = 0.0;
  for (const Component& c : components_) {
    if (c.weight == 0.0) continue;
    sum += c.weight * (c.closed_kurth ? f_kurth(p) : f_gamma(p, *c.profile));
  }
  return sum;
}

bool SteadyState::in_support(const PhasePoint& p, double tol) const {
  for (const Component& c : components_) {
    if (c.weight > 0.0 && kurthbif::in_support(p, c.profile->gamma(), tol)) return true;
  }
  return false;
}

double SteadyState::density(double r, const QuadratureSpec& spec) const {
  double sum = 0.0;
  for (const Component& c : components_) {
    if (c.weight == 0.0) continue;
    sum += c.weight * (c.closed_kurth ? rho_kurth_radial(r) : rho_f_gamma(r, *c.profile, spec));
  }
  return sum;
}

GammaParam SteadyState::max_gamma() const {
  GammaParam best = components_.front().profile->gamma();
  for (const Component& c : components_) {
    if (c.profile->gamma().gamma() > best.gamma()) best = c.profile->gamma();
  }
  return best;
}

}  // namespace kurthbif
