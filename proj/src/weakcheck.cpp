#include "kurthbif/weakcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <json.hpp>

#include "kurthbif/funceq.hpp"

namespace kurthbif {

namespace {

constexpr double kPi = std::numbers::pi;

double u01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// open interval, for inverse transforms that must not hit the ends
double u01_open(std::mt19937_64& rng) { return (double(rng() >> 11) + 0.5) * 0x1.0p-53; }

double normal(std::mt19937_64& rng) {
  // Box-Muller, first output only; keeps draws platform independent
  const double a = u01_open(rng);
  const double b = u01(rng);
  return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * kPi * b);
}

Vec3<double> random_direction(std::mt19937_64& rng) {
  const double z = 2.0 * u01(rng) - 1.0;
  const double t = 2.0 * kPi * u01(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(t), s * std::sin(t), z};
}

// uniform rotation from a uniform unit quaternion (Shoemake)
Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  const double u1 = u01(rng);
  const double u2 = 2.0 * kPi * u01(rng);
  const double u3 = 2.0 * kPi * u01(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  Eigen::Quaterniond q(b * std::cos(u3), a * std::sin(u2), a * std::cos(u2), b * std::sin(u3));
  return q.toRotationMatrix();
}

// bump exp(-1/(1 - |y|^2/R^2)) and its gradient in y
double bump(const Vec3<double>& y, double R, Vec3<double>& grad) {
  const double q = y.squaredNorm() / (R * R);
  if (q >= 1.0) {
    grad.setZero();
    return 0.0;
  }
  const double one_q = 1.0 - q;
  const double b = std::exp(-1.0 / one_q);
  grad = (-b / (one_q * one_q)) * (2.0 / (R * R)) * y;
  return b;
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

double eval_component(const SteadyState::Component& c, const PhasePoint& p) {
  return c.closed_kurth ? f_kurth(p) : f_gamma(p, *c.profile);
}

ResidualReport summarize(const std::vector<double>& terms) {
  ResidualReport rep;
  rep.samples = static_cast<std::int64_t>(terms.size());
  if (terms.empty()) return rep;
  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= double(terms.size());
  double var = 0.0;
  for (double t : terms) var += (t - mean) * (t - mean);
  if (terms.size() > 1) var /= double(terms.size() - 1);
  rep.estimate = mean;
  rep.std_error = std::sqrt(var / double(terms.size()));
  return rep;
}

}  // namespace

TestFunction TestFunction::random(std::uint64_t seed, std::optional<TimeWindow> window) {
  TestFunction tf;
  tf.kind_ = Kind::Polynomial;
  tf.seed_ = seed;
  tf.window_ = window;
  std::mt19937_64 rng(seed);
  Monomial c0;
  c0.coeff = normal(rng);
  tf.terms_.push_back(c0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Monomial m;
      m.coeff = normal(rng);
      m.exps[i] += 1;
      m.exps[3 + j] += 1;
      tf.terms_.push_back(m);
    }
  }
  for (int k = 0; k < 6; ++k) {
    Monomial m;
    m.coeff = normal(rng);
    const int degree = 1 + static_cast<int>(rng() % 4);
    for (int d = 0; d < degree; ++d) m.exps[rng() % 6] += 1;
    tf.terms_.push_back(m);
  }
  tf.cx_ = 0.25 * u01(rng) * random_direction(rng);
  tf.cv_ = 0.25 * u01(rng) * random_direction(rng);
  tf.rx_ = 2.0 - tf.cx_.norm();
  tf.rv_ = 2.0 - tf.cv_.norm();
  return tf;
}

TestFunction TestFunction::random_invariant(std::uint64_t seed) {
  TestFunction tf;
  tf.kind_ = Kind::Invariant;
  tf.seed_ = seed;
  std::mt19937_64 rng(seed);
  for (int i = 0; i <= 2; ++i) {
    for (int j = 0; i + j <= 2; ++j) {
      Monomial m;
      m.coeff = normal(rng);
      m.exps[0] = i;
      m.exps[1] = j;
      tf.terms_.push_back(m);
    }
  }
  return tf;
}

TestEval TestFunction::eval(double t, const PhasePoint& p) const {
  TestEval out;
  double time_factor = 1.0;
  double time_deriv = 0.0;
  if (window_) {
    const double tau = (t - window_->center) / window_->half_width;
    if (std::abs(tau) >= 1.0) return out;
    const double one = 1.0 - tau * tau;
    time_factor = std::exp(-1.0 / one);
    time_deriv = time_factor * (-2.0 * tau / (one * one)) / window_->half_width;
  }

  double value = 0.0;
  Vec3<double> gx = Vec3<double>::Zero();
  Vec3<double> gv = Vec3<double>::Zero();
  if (kind_ == Kind::Polynomial) {
    Vec3<double> bgx;
    Vec3<double> bgv;
    const double bx = bump(p.x - cx_, rx_, bgx);
    const double bv = bump(p.v - cv_, rv_, bgv);
    if (bx == 0.0 || bv == 0.0) return out;
    std::array<double, 6> z{p.x[0], p.x[1], p.x[2], p.v[0], p.v[1], p.v[2]};
    double poly = 0.0;
    std::array<double, 6> dpoly{};
    for (const Monomial& m : terms_) {
      double prod = m.coeff;
      for (int k = 0; k < 6; ++k) prod *= ipow(z[k], m.exps[k]);
      poly += prod;
      for (int k = 0; k < 6; ++k) {
        if (m.exps[k] == 0) continue;
        double d = m.coeff * m.exps[k] * ipow(z[k], m.exps[k] - 1);
        for (int j = 0; j < 6; ++j) {
          if (j != k) d *= ipow(z[j], m.exps[j]);
        }
        dpoly[k] += d;
      }
    }
    const double b = bx * bv;
    value = poly * b;
    for (int k = 0; k < 3; ++k) {
      gx[k] = dpoly[k] * b + poly * bgx[k] * bv;
      gv[k] = dpoly[3 + k] * b + poly * bx * bgv[k];
    }
  } else {
    const double a = p.x.squaredNorm() + p.v.squaredNorm();
    if (a >= 4.0) return out;
    const double xv = p.x.dot(p.v);
    const double bb = ell2_of(p);
    double poly = 0.0;
    double pa = 0.0;
    double pb = 0.0;
    for (const Monomial& m : terms_) {
      const int i = m.exps[0];
      const int j = m.exps[1];
      poly += m.coeff * ipow(a, i) * ipow(bb, j);
      if (i > 0) pa += m.coeff * i * ipow(a, i - 1) * ipow(bb, j);
      if (j > 0) pb += m.coeff * j * ipow(a, i) * ipow(bb, j - 1);
    }
    const double one = 1.0 - a / 4.0;
    const double bump_a = std::exp(-1.0 / one);
    const double dbump_a = -bump_a / (one * one) / 4.0;
    value = poly * bump_a;
    const double da = pa * bump_a + poly * dbump_a;
    const double db = pb * bump_a;
    gx = da * 2.0 * p.x + db * 2.0 * (p.v.squaredNorm() * p.x - xv * p.v);
    gv = da * 2.0 * p.v + db * 2.0 * (p.x.squaredNorm() * p.v - xv * p.x);
  }
  out.value = value * time_factor;
  out.dt = value * time_deriv;
  out.dx = gx * time_factor;
  out.dv = gv * time_factor;
  return out;
}

double bonferroni_z(int n, double alpha) {
  if (n < 1 || !(alpha > 0.0 && alpha < 1.0)) throw ValidationError("bonferroni_z: need n >= 1, alpha in (0, 1)");
  const double target = alpha / n;
  double lo = 0.0;
  double hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::numbers::sqrt2) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PhasePoint flow_map(double t, const PhasePoint& p) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  PhasePoint q;
  q.x = c * p.x + s * p.v;
  q.v = -s * p.x + c * p.v;
  return q;
}

double rho_from_profile(double r, const EnergyProfile& profile, int nodes) {
  if (!(r >= 0.0)) throw DomainError("rho_from_profile: r must be non-negative");
  if (r >= 1.0) return 0.0;
  const GammaParam& g = profile.gamma();
  const double s = (1.0 - r) * (1.0 + r);
  // lower cutoff active when h(s) > 0, i.e. r^2 > Gamma
  const double hs = s < g.one_minus_gamma() ? h(s, g) : 0.0;
  std::vector<double> levels = profile.breakpoints();
  levels.push_back(0.0);
  std::vector<double> interior;
  for (double c : levels) {
    if (s - c > 0.0) interior.push_back(std::sqrt(s - c));
    if (hs - c > 0.0) interior.push_back(std::sqrt(hs - c));
  }
  const double pm = std::sqrt(s);
  const std::vector<double> br = clip_breaks(0.0, pm, interior);
  auto g_of_p = [&](double p) {
    const double p2 = p * p;
    double val = profile.phi(std::max(0.0, s - p2));
    if (p2 < hs) val -= profile.phi(hs - p2);
    return val;
  };
  return 1.5 / s * integrate_panels(g_of_p, br, nodes);
}

SteadySampler::SteadySampler(const SteadyState& state) : state_(state) {
  double acc = 0.0;
  for (const SteadyState::Component& c : state_.components()) {
    if (c.weight <= 0.0) continue;
    Part part{c.weight, c.profile, {}};
    std::vector<double> rb{0.0, 1.0};
    const GammaParam& g = c.profile->gamma();
    if (!g.is_kurth()) rb.push_back(std::sqrt(g.gamma()));
    for (double b : c.profile->breakpoints()) rb.push_back(std::sqrt(1.0 - b));
    for (int j = 1; j <= 24; ++j) rb.push_back(1.0 - std::ldexp(1.0, -j));
    for (int j = 1; j < 8; ++j) rb.push_back(j / 8.0);
    rb = clip_breaks(0.0, 1.0, rb);
    part.rho = PiecewiseChebyshev(rb, 16);
    std::vector<double> vals;
    for (double r : part.rho.nodes()) vals.push_back(rho_from_profile(r, *c.profile));
    part.rho.set_values(vals);
    acc += c.weight;
    parts_.push_back(std::move(part));
    cumulative_.push_back(acc);
  }
  if (parts_.empty()) throw SamplerError("SteadySampler: state has no component with positive weight");
  std::vector<double> breaks;
  for (const Part& part : parts_) {
    for (double b : part.rho.breaks()) breaks.push_back(b);
  }
  potential_ = std::make_shared<ShellPotential>([this](double r) { return density(r); }, 1.0, breaks, 64, 12);
}

double SteadySampler::density(double r) const {
  if (r < 0.0 || r >= 1.0) return 0.0;
  double sum = 0.0;
  for (const Part& part : parts_) sum += part.weight * part.rho(r);
  return sum;
}

double SteadySampler::proposal_density(const PhasePoint& p) const {
  const double r = p.x.norm();
  if (r >= 1.0) return 0.0;
  double sum = 0.0;
  std::size_t k = 0;
  for (const SteadyState::Component& c : state_.components()) {
    if (c.weight <= 0.0) continue;
    const double rho = parts_[k++].rho(r);
    if (rho > 0.0) sum += c.weight * 0.75 / kPi * eval_component(c, p) / rho;
  }
  return sum;
}

WeightedSample SteadySampler::draw_one(const Part& part, std::mt19937_64& rng) const {
  const EnergyProfile& prof = *part.profile;
  const GammaParam& g = prof.gamma();
  const double r = std::cbrt(u01_open(rng));
  const double q = (1.0 - r) * (1.0 + r);
  const double hs = q < g.one_minus_gamma() ? h(q, g) : 0.0;
  const double pm = std::sqrt(q);
  const double top = prof.phi(q);
  if (!(top > 0.0)) throw SamplerError("SteadySampler: profile vanishes on the support");

  // p_r has density proportional to phi(q - p^2) - phi(h - p^2) <= phi(q)
  double p = 0.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  bool accepted = false;
  for (int tries = 0; tries < 100000; ++tries) {
    p = pm * (2.0 * u01(rng) - 1.0);
    const double p2 = p * p;
    s_hi = std::max(0.0, q - p2);
    s_lo = std::max(0.0, hs - p2);
    const double mass = prof.phi(s_hi) - prof.phi(s_lo);
    if (u01(rng) * top < mass) {
      accepted = true;
      break;
    }
  }
  if (!accepted) throw SamplerError("SteadySampler: rejection sampling of p_r did not accept");

  // s = u + 1 by inverse CDF of phi on [s_lo, s_hi]
  const double target = prof.phi(s_lo) + u01_open(rng) * (prof.phi(s_hi) - prof.phi(s_lo));
  const double s = bracketed_newton([&](double x) { return prof.phi(x) - target; },
                                    [&](double x) { return prof.phi_prime(x); }, s_lo, s_hi, 1e-16);
  // l^2 = -(u + r^2 + p^2) r^2 / (1 - r^2) = (q - p^2 - s) r^2 / q
  double l2 = (q - p * p - s) * r * r / q;
  l2 = std::clamp(l2, 0.0, g.gamma());
  const double vt = std::sqrt(l2) / r;
  const double th = 2.0 * kPi * u01(rng);
  const Eigen::Matrix3d R = random_rotation(rng);
  WeightedSample out;
  out.z.x = R * Vec3<double>(0.0, 0.0, r);
  out.z.v = R * Vec3<double>(vt * std::cos(th), vt * std::sin(th), p);
  out.weight = 4.0 * kPi / 3.0 * part.rho(r);
  return out;
}

std::vector<WeightedSample> SteadySampler::draw(std::int64_t n, std::uint64_t seed) const {
  if (n < 1) throw ValidationError("SteadySampler::draw: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<WeightedSample> out;
  out.reserve(static_cast<std::size_t>(n));
  const double total = cumulative_.back();
  for (std::int64_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    if (parts_.size() > 1) {
      const double pick = u01(rng) * total;
      while (k + 1 < parts_.size() && pick >= cumulative_[k]) ++k;
    }
    WeightedSample smp = draw_one(parts_[k], rng);
    // mixture weights are sampled, the importance weight stays per component
    smp.weight *= total;
    out.push_back(smp);
  }
  return out;
}

std::vector<ResidualReport> static_residuals(const SteadySampler& sampler, const std::vector<TestFunction>& tfs,
                                             const QuadratureSpec& spec) {
  spec.validate();
  const std::vector<WeightedSample> smp = sampler.draw(spec.mc_samples, spec.seed);
  std::vector<Vec3<double>> grad_u;
  grad_u.reserve(smp.size());
  for (const WeightedSample& s : smp) grad_u.push_back(sampler.potential().gradient(s.z.x));
  std::vector<ResidualReport> out;
  std::vector<double> terms(smp.size());
  for (const TestFunction& tf : tfs) {
    for (std::size_t i = 0; i < smp.size(); ++i) {
      const TestEval e = tf.eval(smp[i].z);
      terms[i] = smp[i].weight * (smp[i].z.v.dot(e.dx) - grad_u[i].dot(e.dv));
    }
    out.push_back(summarize(terms));
  }
  return out;
}

ResidualReport static_residual(const SteadyState& f, const TestFunction& tf, const QuadratureSpec& spec) {
  return static_residuals(SteadySampler(f), {tf}, spec).front();
}

PhasePoint transport_forward(const Trajectory& orbit, double t, const PhasePoint& yw) {
  const double ph = orbit.phi(t);
  const double pd = orbit.phi_dot(t);
  PhasePoint p;
  p.x = ph * yw.x;
  p.v = yw.v / ph + pd * yw.x;
  return p;
}

double transported_value(const SteadyState& f, const Trajectory& orbit, double t, const PhasePoint& p) {
  const double ph = orbit.phi(t);
  const double pd = orbit.phi_dot(t);
  PhasePoint q;
  q.x = p.x / ph;
  q.v = ph * p.v - pd * p.x;
  return f(q);
}

Eigen::Matrix<double, 6, 6> transport_jacobian(const Trajectory& orbit, double t) {
  const double ph = orbit.phi(t);
  const double pd = orbit.phi_dot(t);
  Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
  J.topLeftCorner<3, 3>() = ph * Eigen::Matrix3d::Identity();
  J.bottomLeftCorner<3, 3>() = pd * Eigen::Matrix3d::Identity();
  J.bottomRightCorner<3, 3>() = Eigen::Matrix3d::Identity() / ph;
  return J;
}

std::vector<ResidualReport> dynamic_residuals(const SteadySampler& sampler, const Trajectory& orbit,
                                              const std::vector<TestFunction>& tfs, const QuadratureSpec& spec) {
  spec.validate();
  for (const TestFunction& tf : tfs) {
    if (!tf.window()) throw ValidationError("dynamic_residual: test function has no time window");
    if (tf.window()->begin() < orbit.t_begin() || tf.window()->end() > orbit.t_end()) {
      throw ValidationError("dynamic_residual: test function window lies outside the trajectory");
    }
  }
  const std::vector<WeightedSample> smp = sampler.draw(spec.mc_samples, spec.seed);
  std::mt19937_64 trng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> tu(smp.size());
  for (double& u : tu) u = u01(trng);

  std::vector<ResidualReport> out;
  std::vector<double> terms(smp.size());
  for (const TestFunction& tf : tfs) {
    const TimeWindow w = *tf.window();
    const double len = 2.0 * w.half_width;
    for (std::size_t i = 0; i < smp.size(); ++i) {
      const double t = w.begin() + len * tu[i];
      const double ph = orbit.phi(t);
      const PhasePoint p = transport_forward(orbit, t, smp[i].z);
      const Vec3<double> gu = sampler.potential().gradient(p.x / ph) / (ph * ph);
      const TestEval e = tf.eval(t, p);
      terms[i] = len * smp[i].weight * (e.dt + p.v.dot(e.dx) - gu.dot(e.dv));
    }
    out.push_back(summarize(terms));
  }
  return out;
}

ResidualReport dynamic_residual(const SteadyState& f, const Trajectory& orbit, const TestFunction& tf,
                                const QuadratureSpec& spec) {
  return dynamic_residuals(SteadySampler(f), orbit, {tf}, spec).front();
}

ResidualReport transport_l1_continuity(const SteadySampler& sampler, const Trajectory& orbit, double t0, double dt,
                                       const QuadratureSpec& spec) {
  spec.validate();
  if (dt == 0.0) return {0.0, 0.0, spec.mc_samples};
  const double t1 = t0 + dt;
  if (std::min(t0, t1) < orbit.t_begin() || std::max(t0, t1) > orbit.t_end()) {
    throw ValidationError("transport_l1_continuity: times lie outside the trajectory");
  }
  const std::vector<WeightedSample> smp = sampler.draw(spec.mc_samples, spec.seed);
  const SteadyState& f = sampler.state();
  std::vector<double> terms(smp.size());
  for (std::size_t i = 0; i < smp.size(); ++i) {
    const double a = f(smp[i].z);
    if (!(a > 0.0)) {
      terms[i] = 0.0;
      continue;
    }
    const PhasePoint p = transport_forward(orbit, t0, smp[i].z);
    const double b = transported_value(f, orbit, t1, p);
    terms[i] = 2.0 * smp[i].weight * (1.0 - std::min(1.0, b / a));
  }
  return summarize(terms);
}

ResidualReport transport_mass(const SteadySampler& sampler, const Trajectory& orbit, double t, double t_ref,
                              const QuadratureSpec& spec) {
  spec.validate();
  const SteadyState& f = sampler.state();
  auto vbound = [&](double s) { return 1.0 / orbit.phi(s) + std::abs(orbit.phi_dot(s)); };
  const double xb = std::max(orbit.phi(t), orbit.phi(t_ref));
  const double vb = std::max(vbound(t), vbound(t_ref));
  const double vol = std::pow(4.0 * kPi / 3.0, 2) * std::pow(xb * vb, 3);
  const double alpha = 0.5;
  const double ph_ref = orbit.phi(t_ref);
  const double pd_ref = orbit.phi_dot(t_ref);

  const std::vector<WeightedSample> smp = sampler.draw(spec.mc_samples, spec.seed);
  std::mt19937_64 rng(spec.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<double> terms(smp.size());
  for (std::size_t i = 0; i < smp.size(); ++i) {
    PhasePoint z;
    if (u01(rng) < alpha) {
      z = transport_forward(orbit, t_ref, smp[i].z);
    } else {
      z.x = xb * std::cbrt(u01(rng)) * random_direction(rng);
      z.v = vb * std::cbrt(u01(rng)) * random_direction(rng);
    }
    PhasePoint back;
    back.x = z.x / ph_ref;
    back.v = ph_ref * z.v - pd_ref * z.x;
    const double q = alpha * sampler.proposal_density(back) + (1.0 - alpha) / vol;
    terms[i] = transported_value(f, orbit, t, z) / q;
  }
  return summarize(terms);
}

std::string residual_json(const std::string& kind, double gamma_or_eps, std::uint64_t tf_seed,
                          const ResidualReport& rep, double z) {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["gamma_or_eps"] = gamma_or_eps;
  j["tf_seed"] = tf_seed;
  j["estimate"] = rep.estimate;
  j["std_error"] = rep.std_error;
  j["samples"] = rep.samples;
  j["pass"] = rep.passes(z);
  return j.dump();
}

}  // namespace kurthbif
