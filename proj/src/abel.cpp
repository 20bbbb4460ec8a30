#include "kurthbif/abel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "kurthbif/errors.hpp"

namespace kurthbif {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

struct TauPanel {
  double lo;
  double hi;
  double sigma_at_hi;  // sigma = s - hi^2, exact when hi comes from a break
};

std::vector<TauPanel> tau_panels(double s, std::span<const double> breaks) {
  struct Mark {
    double tau;
    double sigma;
  };
  std::vector<Mark> marks{{0.0, s}, {std::sqrt(s), 0.0}};
  for (double b : breaks) {
    if (b > 0.0 && b < s) marks.push_back({std::sqrt(s - b), b});
  }
  std::sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) { return a.tau < b.tau; });
  std::vector<TauPanel> out;
  for (std::size_t k = 0; k + 1 < marks.size(); ++k) {
    if (marks[k + 1].tau > marks[k].tau) out.push_back({marks[k].tau, marks[k + 1].tau, marks[k + 1].sigma});
  }
  return out;
}

double abel_pass(const ProfileFn& g, const std::vector<TauPanel>& panels, int n) {
  double sum = 0.0;
  for (const TauPanel& p : panels) {
    sum += integrate_singular_offsets(
        [&](double tau, double, double db) {
          // s - tau^2 = (s - hi^2) + (hi - tau)(hi + tau)
          return g(p.sigma_at_hi + db * (p.hi + tau));
        },
        p.lo, p.hi, n);
  }
  return 2.0 * sum;
}

}  // namespace

EstimatedValue abel_apply_estimated(const ProfileFn& g, double s, int nodes, std::span<const double> breaks) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("abel_apply: s must lie in [0, 1]");
  if (s == 0.0) return {0.0, 0.0};
  const auto panels = tau_panels(s, breaks);
  const double fine = abel_pass(g, panels, nodes);
  const double coarse = abel_pass(g, panels, std::max(2, (2 * nodes) / 3));
  return {fine, std::abs(fine - coarse)};
}

double abel_apply(const ProfileFn& g, double s, const QuadratureSpec& spec, std::span<const double> breaks) {
  spec.validate();
  const EstimatedValue v = abel_apply_estimated(g, s, spec.u_nodes, breaks);
  if (v.error > spec.tol * std::max(1.0, std::abs(v.value))) {
    throw AccuracyError("abel_apply: quadrature did not reach tolerance at s = " + std::to_string(s), v.error);
  }
  return v.value;
}

double k_gamma_apply(const ProfileFn& g, double s, const GammaParam& gamma, const QuadratureSpec& spec,
                     std::span<const double> breaks) {
  return abel_apply(g, h(s, gamma), spec, breaks);
}

// ---------------------------------------------------------------------------
// ProfileTable

std::vector<double> ProfileTable::outer_w_breaks(double delta) {
  const double top = std::sqrt(1.0 - delta);
  std::vector<double> b{0.0};
  double w = std::sqrt(delta);
  while (w < 0.75 * top) {
    b.push_back(w);
    w *= 2.0;
  }
  b.push_back(top);
  return b;
}

ProfileTable::ProfileTable(const GammaParam& gamma, const ProfileLayout& layout)
    : ProfileTable(gamma, layout, true) {}

ProfileTable::ProfileTable(const GammaParam& gamma, const ProfileLayout& layout, bool tabulate)
    : gamma_(gamma), layout_(layout) {
  if (layout.inner_degree < 2 || layout.outer_degree < 2 || layout.quad_nodes < 2) {
    throw ValidationError("ProfileTable: degrees and quadrature order must be >= 2");
  }
  if (gamma_.is_kurth()) return;
  const double delta = gamma_.one_minus_gamma();
  a_ = PiecewiseChebyshev({0.0, delta}, layout.inner_degree);
  b_ = PiecewiseChebyshev({0.0, delta}, layout.inner_degree);
  c_ = PiecewiseChebyshev(outer_w_breaks(delta), layout.outer_degree);
  d_ = PiecewiseChebyshev(outer_w_breaks(delta), layout.outer_degree);
  inner_s_ = a_.nodes();
  outer_w_ = c_.nodes();
  if (!tabulate) return;
  std::vector<double> ip, id, op, od;
  for (double s : inner_s_) {
    const double rs = std::sqrt(s);
    ip.push_back(inner_a(s) * rs);
    id.push_back(inner_b(s) / rs);
  }
  for (double w : outer_w_) {
    op.push_back(outer_c(w));
    od.push_back(outer_d(w) / w);
  }
  install(ip, id, op, od);
}

void ProfileTable::install(const std::vector<double>& inner_phi, const std::vector<double>& inner_dphi,
                           const std::vector<double>& outer_phi, const std::vector<double>& outer_dphi) {
  inner_phi_ = inner_phi;
  inner_dphi_ = inner_dphi;
  outer_phi_ = outer_phi;
  outer_dphi_ = outer_dphi;
  std::vector<double> av, bv, cv, dv;
  for (std::size_t k = 0; k < inner_s_.size(); ++k) {
    const double rs = std::sqrt(inner_s_[k]);
    av.push_back(inner_phi_[k] / rs);
    bv.push_back(inner_dphi_[k] * rs);
  }
  for (std::size_t k = 0; k < outer_w_.size(); ++k) {
    cv.push_back(outer_phi_[k]);
    dv.push_back(outer_dphi_[k] * outer_w_[k]);
  }
  a_.set_values(av);
  b_.set_values(bv);
  c_.set_values(cv);
  d_.set_values(dv);
}

double ProfileTable::inner_a(double s) const {
  // phi/sqrt(s) = (2/pi^2) int_0^1 psi'(s (1 - x^2)) dx
  const double delta = gamma_.one_minus_gamma();
  const double integral = integrate_smooth(
      [&](double x) {
        const double sig = std::clamp(s * (1.0 - x) * (1.0 + x), 0.0, delta);
        return psi_tilde_jet(sig, gamma_).d1;
      },
      0.0, 1.0, layout_.quad_nodes);
  return 2.0 / kPi2 * integral;
}

double ProfileTable::inner_b(double s) const {
  // phi' sqrt(s) = (1/pi^2) [1/Gamma + 2 s int_0^1 psi''(s (1 - x^2)) dx]
  const double delta = gamma_.one_minus_gamma();
  const double integral = integrate_smooth(
      [&](double x) {
        const double sig = std::clamp(s * (1.0 - x) * (1.0 + x), 0.0, delta);
        return psi_tilde_jet(sig, gamma_).d2;
      },
      0.0, 1.0, layout_.quad_nodes);
  return (1.0 / gamma_.gamma() + 2.0 * s * integral) / kPi2;
}

double ProfileTable::outer_c(double w) const {
  const double delta = gamma_.one_minus_gamma();
  const double rs = std::sqrt(delta + w * w);
  const double integral = integrate_smooth(
      [&](double tau) {
        const double sig = std::clamp((rs - tau) * (rs + tau), 0.0, delta);
        return psi_tilde_jet(sig, gamma_).d1;
      },
      w, rs, layout_.quad_nodes);
  return (2.0 * w + 2.0 * integral) / kPi2;
}

double ProfileTable::outer_d(double w) const {
  const double delta = gamma_.one_minus_gamma();
  const double G = gamma_.gamma();
  const double rs = std::sqrt(delta + w * w);
  const double integral = integrate_smooth(
      [&](double tau) {
        const double sig = std::clamp((rs - tau) * (rs + tau), 0.0, delta);
        return psi_tilde_jet(sig, gamma_).d2;
      },
      w, rs, layout_.quad_nodes);
  return (delta / (G * G) + w / (G * rs) + 2.0 * w * integral) / kPi2;
}

double ProfileTable::phi(double s) const {
  if (s <= 0.0) return 0.0;
  if (s > 1.0) throw DomainError("phi: s must not exceed 1");
  if (gamma_.is_kurth()) return 2.0 * std::sqrt(s) / kPi2;
  const double delta = gamma_.one_minus_gamma();
  if (s <= delta) return a_(s) * std::sqrt(s);
  return c_(std::sqrt(s - delta));
}

double ProfileTable::phi_prime(double s) const {
  if (s <= 0.0) return 0.0;
  if (s > 1.0) throw DomainError("phi_prime: s must not exceed 1");
  if (gamma_.is_kurth()) return 1.0 / (kPi2 * std::sqrt(s));
  const double delta = gamma_.one_minus_gamma();
  if (s <= delta) return b_(s) / std::sqrt(s);
  const double w = std::sqrt(s - delta);
  return d_(w) / w;
}

double ProfileTable::phi_direct(double s) const {
  if (s <= 0.0) return 0.0;
  if (s > 1.0) throw DomainError("phi: s must not exceed 1");
  if (gamma_.is_kurth()) return 2.0 * std::sqrt(s) / kPi2;
  const double delta = gamma_.one_minus_gamma();
  if (s <= delta) return inner_a(s) * std::sqrt(s);
  return outer_c(std::sqrt(s - delta));
}

double ProfileTable::phi_prime_direct(double s) const {
  if (s <= 0.0) return 0.0;
  if (s > 1.0) throw DomainError("phi_prime: s must not exceed 1");
  if (gamma_.is_kurth()) return 1.0 / (kPi2 * std::sqrt(s));
  const double delta = gamma_.one_minus_gamma();
  if (s <= delta) return inner_b(s) / std::sqrt(s);
  const double w = std::sqrt(s - delta);
  return outer_d(w) / w;
}

double ProfileTable::phi_by_differentiation(double s, double step) const {
  // J(s) = int_0^s psi(s - sigma)/sqrt(sigma) dsigma = (I^{1/2} psi)(s)
  const double delta = gamma_.one_minus_gamma();
  (void)delta;
  const std::vector<double> br = breakpoints();
  auto J = [&](double x) {
    if (x <= 0.0) return 0.0;
    return abel_apply_estimated([&](double sig) { return psi(std::clamp(sig, 0.0, 1.0), gamma_); }, x, 48, br)
        .value;
  };
  const double lo = std::max(0.0, s - step);
  const double hi = std::min(1.0, s + step);
  return (J(hi) - J(lo)) / (hi - lo) / kPi2;
}

double ProfileTable::l_gamma() const {
  if (gamma_.is_kurth()) throw DomainError("l_gamma: undefined for Gamma = 1");
  const double delta = gamma_.one_minus_gamma();
  return inner_b(delta) / std::sqrt(delta);
}

std::vector<double> ProfileTable::singular_points() const {
  if (gamma_.is_kurth()) return {};
  return {gamma_.one_minus_gamma()};
}

std::vector<double> ProfileTable::breakpoints() const {
  if (gamma_.is_kurth()) return {};
  const double delta = gamma_.one_minus_gamma();
  std::vector<double> out{delta};
  const std::vector<double>& wb = c_.breaks();
  for (std::size_t k = 1; k + 1 < wb.size(); ++k) out.push_back(delta + wb[k] * wb[k]);
  return out;
}

std::vector<double> ProfileTable::inner_nodes() const { return inner_s_; }

std::vector<double> ProfileTable::outer_nodes() const {
  std::vector<double> out;
  const double delta = gamma_.one_minus_gamma();
  for (double w : outer_w_) out.push_back(delta + w * w);
  return out;
}

std::string ProfileTable::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["gamma"] = gamma_.gamma();
  j["one_minus_gamma"] = gamma_.one_minus_gamma();
  j["gamma_exponent"] = gamma_.exponent();
  j["layout"] = {{"inner_degree", layout_.inner_degree},
                 {"outer_degree", layout_.outer_degree},
                 {"quad_nodes", layout_.quad_nodes}};
  auto rows = [](const std::vector<double>& s, const std::vector<double>& p, const std::vector<double>& d) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < s.size(); ++k) {
      arr.push_back({{"s", s[k]}, {"phi", p[k]}, {"phi_prime", d[k]}});
    }
    return arr;
  };
  j["inner"] = rows(inner_s_, inner_phi_, inner_dphi_);
  j["outer"] = rows(outer_nodes(), outer_phi_, outer_dphi_);
  j["build_spec"] = nlohmann::ordered_json::parse(build_spec_.to_json());
  j["residuals"] = {{"abel", residuals_.abel}, {"functional", residuals_.functional}};
  return j.dump(1);
}

ProfileTable ProfileTable::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("ProfileTable: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != 1) throw ValidationError("ProfileTable: unsupported schema_version");
    const int k = j.value("gamma_exponent", 0);
    const double g = j.at("gamma").get<double>();
    const double om = j.at("one_minus_gamma").get<double>();
    GammaParam gp = k > 0 ? GammaParam::from_exponent(k) : (om == 0.0 ? GammaParam::kurth() : GammaParam::from_value(g));
    if (gp.gamma() != g || gp.one_minus_gamma() != om) throw ValidationError("ProfileTable: inconsistent gamma fields");
    ProfileLayout layout;
    layout.inner_degree = j.at("layout").at("inner_degree").get<int>();
    layout.outer_degree = j.at("layout").at("outer_degree").get<int>();
    layout.quad_nodes = j.at("layout").at("quad_nodes").get<int>();
    ProfileTable t(gp, layout, false);
    auto read = [](const nlohmann::json& arr, const std::vector<double>& expect_s, std::vector<double>& p,
                   std::vector<double>& d) {
      if (arr.size() != expect_s.size()) throw ValidationError("ProfileTable: node count does not match layout");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (arr[i].at("s").get<double>() != expect_s[i]) {
          throw ValidationError("ProfileTable: stored nodes do not match layout");
        }
        p.push_back(arr[i].at("phi").get<double>());
        d.push_back(arr[i].at("phi_prime").get<double>());
      }
    };
    std::vector<double> ip, id, op, od;
    read(j.at("inner"), t.inner_s_, ip, id);
    read(j.at("outer"), t.outer_nodes(), op, od);
    if (!gp.is_kurth()) t.install(ip, id, op, od);
    t.build_spec_ = QuadratureSpec::from_json(j.at("build_spec").dump());
    t.residuals_.abel = j.at("residuals").at("abel").get<double>();
    t.residuals_.functional = j.at("residuals").at("functional").get<double>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("ProfileTable: malformed document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<double> residual_check_points(const GammaParam& gamma) {
  std::vector<double> pts;
  for (int k = 1; k <= 128; ++k) pts.push_back(static_cast<double>(k) / 128.0);
  if (!gamma.is_kurth()) {
    const double delta = gamma.one_minus_gamma();
    for (int k = 1; k <= 128; ++k) pts.push_back(2.0 * delta * (k - 0.5) / 128.0);
  } else {
    for (int k = 1; k <= 128; ++k) pts.push_back((k - 0.5) / 128.0 * 1e-3);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

ProfileResiduals profile_residuals(const EnergyProfile& profile, std::span<const double> points,
                                   const QuadratureSpec& spec) {
  const GammaParam& g = profile.gamma();
  const std::vector<double> br = profile.breakpoints();
  const ProfileFn f = [&](double s) { return profile.phi(s); };
  ProfileResiduals res;
  for (double s : points) {
    const double i_s = abel_apply(f, s, spec, br);
    const double i_h = abel_apply(f, h(s, g), spec, br);
    res.abel = std::max(res.abel, std::abs(kPi * i_s - psi(s, g)));
    res.functional = std::max(res.functional, std::abs(i_s - i_h - s / kPi));
  }
  return res;
}

ProfileTable build_profile(const GammaParam& gamma, const QuadratureSpec& spec, const ProfileLayout& layout) {
  spec.validate();
  if (!gamma.in_pipeline_range()) throw ValidationError("build_profile: Gamma must lie in [1 - 2^-12, 1]");
  ProfileTable t(gamma, layout, true);
  t.build_spec_ = spec;
  const std::vector<double> pts = residual_check_points(gamma);
  t.residuals_ = profile_residuals(t, pts, spec);
  constexpr double kLimit = 1e-6;
  if (t.residuals_.abel > kLimit || t.residuals_.functional > kLimit) {
    std::vector<double> res;
    const ProfileFn f = [&](double s) { return t.phi(s); };
    for (double s : pts) {
      res.push_back(std::abs(kPi * abel_apply_estimated(f, s, spec.u_nodes, t.breakpoints()).value -
                             psi(s, gamma)));
    }
    throw BuildError("build_profile: residual above 1e-6", pts, res);
  }
  return t;
}

Bracket phi_prime_brackets(const ProfileTable& table, double s) {
  const GammaParam& g = table.gamma();
  const double delta = g.one_minus_gamma();
  const double G = g.gamma();
  if (!(s > 0.0 && s <= 1.0) || s == delta) throw DomainError("phi_prime_brackets: s must lie inside a branch");
  Bracket b;
  b.value = table.phi_prime(s);
  if (s < delta) {
    b.lower = 1.0 / (2.0 * G * kPi2 * std::sqrt(s));
    b.upper = 1.0 / (kPi2 * G * std::sqrt(s)) + 128.0 / (kPi2 * std::cbrt(delta)) * std::sqrt(s);
  } else {
    const double jump = delta / (G * G * kPi2 * std::sqrt(s - delta));
    b.lower = jump;
    b.upper = (2.0 + 128.0 * std::pow(delta, 2.0 / 3.0)) / (kPi2 * std::sqrt(s)) + jump;
  }
  return b;
}

double w11_norm(const ProfileTable& table, int nodes) {
  const GammaParam& g = table.gamma();
  auto f = [&](double s) { return std::abs(table.phi_prime(s)); };
  if (g.is_kurth()) return integrate_singular(f, 0.0, 1.0, nodes);
  const double delta = g.one_minus_gamma();
  double sum = integrate_singular(f, 0.0, delta, nodes);
  // outer panels follow the w grading: s = delta + w^2
  double w = std::sqrt(delta);
  double lo = delta;
  while (lo < 1.0) {
    const double hi = std::min(1.0, delta + w * w);
    sum += integrate_singular(f, lo, hi, nodes);
    lo = hi;
    w *= 2.0;
  }
  return sum;
}

Deviation pointwise_deviation(const ProfileTable& table, double s) {
  const double delta = table.gamma().one_minus_gamma();
  if (!(s > 0.0 && s < 1.0) || (s == delta && delta > 0.0)) {
    throw DomainError("pointwise_deviation: s must lie in (0, 1) away from the split");
  }
  Deviation d;
  d.deviation = std::abs(table.phi_prime(s) - 1.0 / (kPi2 * std::sqrt(s)));
  d.envelope = std::pow(delta, 1.0 / 6.0);
  if (delta > 0.0) d.envelope += s < delta ? delta / std::sqrt(s) : delta / std::sqrt(s - delta);
  return d;
}

double ConstantQProfile::phi(double s) const {
  if (s <= 0.0) return 0.0;
  if (s > 1.0) throw DomainError("phi: s must not exceed 1");
  return slope_ * s;
}

double ConstantQProfile::phi_prime(double s) const {
  if (s <= 0.0) return 0.0;
  if (s > 1.0) throw DomainError("phi_prime: s must not exceed 1");
  return slope_;
}

}  // namespace kurthbif
