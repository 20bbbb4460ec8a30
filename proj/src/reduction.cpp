#include "kurthbif/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "kurthbif/numerics.hpp"

namespace kurthbif {

double ell2_from(double r, double p_r, double u) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("ell2_from: r must lie in (0, 1)");
  const double r2 = r * r;
  return -(u + r2 + p_r * p_r) * r2 / ((1.0 - r) * (1.0 + r));
}

PhasePoint from_reduced(double r, double p_r, double ell2) {
  if (!(r > 0.0)) throw DomainError("from_reduced: r must be positive");
  PhasePoint p;
  p.x = Vec3<double>(0.0, 0.0, r);
  p.v = Vec3<double>(std::sqrt(std::max(ell2, 0.0)) / r, 0.0, p_r);
  return p;
}

double gamma_bar(double r, const GammaParam& g) {
  if (!(r > 0.0)) throw DomainError("gamma_bar: r must be positive");
  const double r2 = r * r;
  return r2 + g.gamma() * ((1.0 - r) * (1.0 + r)) / r2;
}

double SupportRegion::p_max() const {
  if (kind == RegionCase::Empty) return 0.0;
  return std::sqrt(std::max(0.0, (1.0 - r) * (1.0 + r)));
}

double SupportRegion::p_split() const {
  if (kind != RegionCase::Outer) return 0.0;
  return std::sqrt(std::max(0.0, 1.0 - gbar));
}

double SupportRegion::u_lower(double p_r) const {
  if (kind == RegionCase::Empty) return 0.0;
  return std::max(-1.0, -gbar - p_r * p_r);
}

double SupportRegion::u_upper(double p_r) const {
  if (kind == RegionCase::Empty) return -1.0;
  return -r * r - p_r * p_r;
}

bool SupportRegion::contains(double p_r, double u, double tol) const {
  if (kind == RegionCase::Empty) return false;
  if (std::abs(p_r) > p_max() + tol) return false;
  return u >= u_lower(p_r) - tol && u <= u_upper(p_r) + tol;
}

SupportRegion support_region(double r, const GammaParam& g) {
  if (!(r >= 0.0)) throw DomainError("support_region: r must be non-negative");
  SupportRegion reg;
  reg.r = r;
  reg.gamma = g.gamma();
  if (r > 1.0) {
    reg.kind = RegionCase::Empty;
    return reg;
  }
  reg.gbar = r > 0.0 ? gamma_bar(r, g) : std::numeric_limits<double>::infinity();
  reg.kind = r * r <= g.gamma() ? RegionCase::Inner : RegionCase::Outer;
  return reg;
}

bool in_support(const PhasePoint& p, const GammaParam& g, double tol) {
  const double l2 = ell2_of(p);
  const double u = l2 - p.x.squaredNorm() - p.v.squaredNorm();
  return u >= -1.0 - tol && u <= tol && l2 <= g.gamma() + tol;
}

void QuadratureSpec::validate() const {
  if (radial_nodes < 1 || pr_nodes < 1 || u_nodes < 1 || euler_nodes < 1 || mc_samples < 1) {
    throw ValidationError("QuadratureSpec: all node and sample counts must be >= 1");
  }
  if (!(tol > 0.0)) throw ValidationError("QuadratureSpec: tol must be positive");
}

std::string QuadratureSpec::to_json() const {
  nlohmann::ordered_json j;
  j["radial_nodes"] = radial_nodes;
  j["pr_nodes"] = pr_nodes;
  j["u_nodes"] = u_nodes;
  j["euler_nodes"] = euler_nodes;
  j["mc_samples"] = mc_samples;
  j["seed"] = seed;
  j["tol"] = tol;
  return j.dump();
}

QuadratureSpec QuadratureSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("QuadratureSpec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("QuadratureSpec: expected a JSON object");
  QuadratureSpec s;
  try {
    if (j.contains("radial_nodes")) s.radial_nodes = j.at("radial_nodes").get<int>();
    if (j.contains("pr_nodes")) s.pr_nodes = j.at("pr_nodes").get<int>();
    if (j.contains("u_nodes")) s.u_nodes = j.at("u_nodes").get<int>();
    if (j.contains("euler_nodes")) s.euler_nodes = j.at("euler_nodes").get<int>();
    if (j.contains("mc_samples")) s.mc_samples = j.at("mc_samples").get<std::int64_t>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) s.tol = j.at("tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("QuadratureSpec: bad field type: ") + e.what());
  }
  s.validate();
  return s;
}

ReducedDomain ReducedDomain::for_gamma(const GammaParam& g, const std::vector<double>& extra_u_breaks) {
  return for_gammas({g}, extra_u_breaks);
}

ReducedDomain ReducedDomain::for_gammas(const std::vector<GammaParam>& gs, const std::vector<double>& extra_u_breaks) {
  if (gs.empty()) throw ValidationError("ReducedDomain: need at least one Gamma");
  ReducedDomain d;
  d.gamma = gs.front();
  std::vector<GammaParam> cuts;
  for (const GammaParam& g : gs) {
    if (g.gamma() > d.gamma.gamma()) d.gamma = g;
    if (!g.is_kurth()) cuts.push_back(g);
  }
  for (const GammaParam& g : cuts) d.u_breaks.push_back(-g.gamma());
  for (double b : extra_u_breaks) {
    if (b > -1.0 && b < 0.0) d.u_breaks.push_back(b);
  }
  std::sort(d.u_breaks.begin(), d.u_breaks.end());
  d.u_breaks.erase(std::unique(d.u_breaks.begin(), d.u_breaks.end()), d.u_breaks.end());
  // the upper u bound -r^2 - p^2 reaches a break b at r^2 = -b
  for (double b : d.u_breaks) d.r_breaks.push_back(std::sqrt(-b));
  std::sort(d.r_breaks.begin(), d.r_breaks.end());
  d.r_breaks.erase(std::unique(d.r_breaks.begin(), d.r_breaks.end()), d.r_breaks.end());
  std::vector<double> levels = d.u_breaks;
  levels.push_back(-1.0);
  d.p_breaks = [levels, cuts](double r) {
    std::vector<double> out;
    if (!(r > 0.0 && r <= 1.0)) return out;
    const double r2 = r * r;
    for (double b : levels) {
      // upper bound -r^2 - p^2 crosses b
      if (-b - r2 > 0.0) out.push_back(std::sqrt(-b - r2));
      // cutoff bound -gbar - p^2 crosses b
      for (const GammaParam& g : cuts) {
        const double c = -b - gamma_bar(r, g);
        if (c > 0.0) out.push_back(std::sqrt(c));
      }
    }
    return out;
  };
  return d;
}

Eigen::Matrix3d euler_zyz(double alpha, double beta, double gamma) {
  return (Eigen::AngleAxisd(alpha, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(beta, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(gamma, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

SO3Rule so3_rule(int n) {
  SO3Rule rule;
  const auto& gl = gauss_legendre(n);
  const double h = 2.0 * std::numbers::pi / n;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double beta = std::acos(gl.nodes[b]);
      for (int c = 0; c < n; ++c) {
        rule.rotations.push_back(euler_zyz(a * h, beta, c * h));
        rule.weights.push_back(h * h * gl.weights[b]);
      }
    }
  }
  return rule;
}

namespace {

double reduced_pass(const ReducedWeight& weight, const std::optional<RotationFactor>& rot, const SO3Rule* so3,
                    const ReducedDomain& domain, int nr, int np, int nu) {
  const double rot_const = 8.0 * std::numbers::pi * std::numbers::pi;
  const GammaParam& g = domain.gamma;

  auto u_integral = [&](double r, const SupportRegion& reg, double p) {
    const double lo = reg.u_lower(p);
    const double hi = reg.u_upper(p);
    if (!(hi > lo)) return 0.0;
    const std::vector<double> ub = clip_breaks(lo, hi, domain.u_breaks);
    auto fu = [&](double u) {
      const double w = weight(r, p, u);
      if (w == 0.0) return 0.0;
      if (!rot) return w * rot_const;
      const PhasePoint ref = from_reduced(r, p, ell2_from(r, p, u));
      double ig = 0.0;
      for (std::size_t k = 0; k < so3->rotations.size(); ++k) {
        PhasePoint q;
        q.x = so3->rotations[k] * ref.x;
        q.v = so3->rotations[k] * ref.v;
        ig += so3->weights[k] * (*rot)(q);
      }
      return w * ig;
    };
    return integrate_panels(fu, ub, nu);
  };

  auto r_integrand = [&](double r) {
    const SupportRegion reg = support_region(r, g);
    if (reg.kind == RegionCase::Empty) return 0.0;
    const double pm = reg.p_max();
    if (!(pm > 0.0)) return 0.0;
    std::vector<double> interior;
    interior.push_back(0.0);
    if (domain.p_breaks) {
      for (double b : domain.p_breaks(r)) {
        interior.push_back(b);
        interior.push_back(-b);
      }
    }
    const std::vector<double> pb = clip_breaks(-pm, pm, interior);
    const double inner = integrate_panels([&](double p) { return u_integral(r, reg, p); }, pb, np);
    // l dl = (1/2) dl^2 = (1/2) r^2/(1-r^2) du
    return 0.5 * r * r / ((1.0 - r) * (1.0 + r)) * inner;
  };

  const std::vector<double> rb = clip_breaks(0.0, 1.0, domain.r_breaks);
  return integrate_panels(r_integrand, rb, nr);
}

}  // namespace

IntegralReport reduced_integral_report(const ReducedWeight& weight,
                                       const std::optional<RotationFactor>& rotation_factor,
                                       const QuadratureSpec& spec, const ReducedDomain& domain) {
  spec.validate();
  std::optional<SO3Rule> fine_rule;
  std::optional<SO3Rule> coarse_rule;
  if (rotation_factor) {
    fine_rule = so3_rule(spec.euler_nodes);
    coarse_rule = so3_rule(std::max(1, (2 * spec.euler_nodes) / 3));
  }
  const double fine = reduced_pass(weight, rotation_factor, fine_rule ? &*fine_rule : nullptr, domain,
                                   spec.radial_nodes, spec.pr_nodes, spec.u_nodes);
  const double coarse =
      reduced_pass(weight, rotation_factor, coarse_rule ? &*coarse_rule : nullptr, domain,
                   std::max(2, (2 * spec.radial_nodes) / 3), std::max(2, (2 * spec.pr_nodes) / 3),
                   std::max(2, (2 * spec.u_nodes) / 3));
  return {fine, std::abs(fine - coarse)};
}

double reduced_integral(const ReducedWeight& weight, const std::optional<RotationFactor>& rotation_factor,
                        const QuadratureSpec& spec, const ReducedDomain& domain) {
  const IntegralReport rep = reduced_integral_report(weight, rotation_factor, spec, domain);
  if (rep.error > spec.tol * std::max(1.0, std::abs(rep.value))) {
    throw AccuracyError("reduced_integral: quadrature did not reach tolerance", rep.error);
  }
  return rep.value;
}

double velocity_integral(const std::function<double(const Vec3<double>&)>& g, double r, const QuadratureSpec& spec,
                         const VelocityDomain& domain) {
  spec.validate();
  if (!(r > 0.0)) throw DomainError("velocity_integral: r must be positive");
  const double vmax = domain.vmax;
  const int ntheta = 2 * spec.euler_nodes;
  const double dtheta = 2.0 * std::numbers::pi / ntheta;
  std::vector<Eigen::Vector2d> dirs(ntheta);
  for (int k = 0; k < ntheta; ++k) dirs[k] = {std::cos(k * dtheta), std::sin(k * dtheta)};

  auto ell2_integral = [&](double p) {
    const double top = r * r * (vmax - p) * (vmax + p);
    if (!(top > 0.0)) return 0.0;
    std::vector<double> interior;
    if (domain.ell2_breaks) interior = domain.ell2_breaks(p);
    const std::vector<double> lb = clip_breaks(0.0, top, interior);
    auto fl = [&](double l2) {
      const double w = std::sqrt(std::max(l2, 0.0)) / r;
      double s = 0.0;
      for (int k = 0; k < ntheta; ++k) s += g(Vec3<double>(w * dirs[k][0], w * dirs[k][1], p));
      return s * dtheta;
    };
    return integrate_panels(fl, lb, spec.u_nodes);
  };
  const std::vector<double> pb = clip_breaks(-vmax, vmax, domain.p_breaks);
  return integrate_panels(ell2_integral, pb, spec.pr_nodes) / (2.0 * r * r);
}

}  // namespace kurthbif
