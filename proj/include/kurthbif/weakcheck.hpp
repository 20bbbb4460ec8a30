#pragma once

// Monte Carlo residuals of the weak (distributional) Vlasov equation for the
// steady states and their time-periodic transports.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kurthbif/kurth.hpp"
#include "kurthbif/orbit.hpp"
#include "kurthbif/steady.hpp"

namespace kurthbif {

/// Smooth bump in time, supported in (center - half_width, center + half_width).
struct TimeWindow {
  double center = 0.0;
  double half_width = 1.0;
  double begin() const { return center - half_width; }
  double end() const { return center + half_width; }
};

/// Value and first derivatives of a test function at (t, x, v).
struct TestEval {
  double value = 0.0;
  double dt = 0.0;
  Vec3<double> dx = Vec3<double>::Zero();
  Vec3<double> dv = Vec3<double>::Zero();
};

/// Compactly supported smooth test function
///   P(x, v) * B(x) * B(v) * T(t)
/// with P a polynomial of degree <= 4 and bumps exp(-1/(1 - |y - c|^2/R^2)), |c| + R = 2.
/// The invariant kind replaces P * B * B by P(a, b) exp(-1/(1 - a/4)) with
/// a = |x|^2 + |v|^2 and b = |x ^ v|^2.
class TestFunction {
 public:
  struct Monomial {
    double coeff = 0.0;
    std::array<int, 6> exps{};  // powers of x1 x2 x3 v1 v2 v3, or of (a, b) in the first two slots
  };
  enum class Kind { Polynomial, Invariant };

  /// Random polynomial times bumps: constant + all x_i v_j + six monomials of degree 1..4.
  static TestFunction random(std::uint64_t seed, std::optional<TimeWindow> window = std::nullopt);
  /// Random polynomial in (a, b) of degree <= 2 times a bump in a.
  static TestFunction random_invariant(std::uint64_t seed);

  TestEval eval(double t, const PhasePoint& p) const;
  TestEval eval(const PhasePoint& p) const { return eval(window_ ? window_->center : 0.0, p); }
  const std::optional<TimeWindow>& window() const { return window_; }
  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Kind kind_ = Kind::Polynomial;
  std::uint64_t seed_ = 0;
  std::vector<Monomial> terms_;
  Vec3<double> cx_ = Vec3<double>::Zero();
  Vec3<double> cv_ = Vec3<double>::Zero();
  double rx_ = 2.0;
  double rv_ = 2.0;
  std::optional<TimeWindow> window_;
};

struct ResidualReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  /// |estimate| <= z * std_error.
  bool passes(double z) const { return std::abs(estimate) <= z * std_error; }
};

/// Two-sided normal quantile for a family of n tests at family-wise level alpha.
double bonferroni_z(int n, double alpha = 0.0027);

/// Lambda_t(x, v) = (x cos t + v sin t, -x sin t + v cos t).
PhasePoint flow_map(double t, const PhasePoint& p);

/// Point drawn from a steady state together with its importance weight:
/// E[weight * g] = int f g dx dv.
struct WeightedSample {
  PhasePoint z;
  double weight = 0.0;
};

/// Draws from f: x uniform in the unit ball, then (p_r, u) given |x| from the
/// conditional law of f, angle uniform, and a uniform random rotation.
/// The weight is (4pi/3) rho(|x|).
class SteadySampler {
 public:
  explicit SteadySampler(const SteadyState& state);

  std::vector<WeightedSample> draw(std::int64_t n, std::uint64_t seed) const;
  /// Spatial density of the state (tabulated).
  double density(double r) const;
  /// Potential generated by that density.
  const ShellPotential& potential() const { return *potential_; }
  const SteadyState& state() const { return state_; }
  /// Density of the law the samples are drawn from: sum_i w_i (3/4pi) f_i / rho_i(|x|).
  double proposal_density(const PhasePoint& p) const;

 private:
  struct Part {
    double weight;
    std::shared_ptr<const EnergyProfile> profile;
    PiecewiseChebyshev rho;
  };
  WeightedSample draw_one(const Part& part, std::mt19937_64& rng) const;

  SteadyState state_;
  std::vector<Part> parts_;
  std::vector<double> cumulative_;
  std::shared_ptr<ShellPotential> potential_;
};

/// Radial density of one profile from the conditional (p_r, u) law:
/// (3/4pi) pi / (1 - r^2) int [Phi(u_upper) - Phi(u_lower)] dp_r.
double rho_from_profile(double r, const EnergyProfile& profile, int nodes = 24);

/// A = int f (v . grad_x tf - grad U_f . grad_v tf) with U_f the potential of f itself.
std::vector<ResidualReport> static_residuals(const SteadySampler& sampler, const std::vector<TestFunction>& tfs,
                                             const QuadratureSpec& spec);
ResidualReport static_residual(const SteadyState& f, const TestFunction& tf, const QuadratureSpec& spec);

/// f_phi(t, x, v) = f(x/phi, phi v - phi_dot x).
double transported_value(const SteadyState& f, const Trajectory& orbit, double t, const PhasePoint& p);
/// (y, w) -> (phi y, w/phi + phi_dot y), the inverse of the transport change of variables.
PhasePoint transport_forward(const Trajectory& orbit, double t, const PhasePoint& yw);
/// Jacobian of transport_forward in (y, w), block form [[phi I, 0], [phi_dot I, I/phi]].
Eigen::Matrix<double, 6, 6> transport_jacobian(const Trajectory& orbit, double t);

/// int dt int f_phi (d_t tf + v . grad_x tf - grad U . grad_v tf) with
/// grad U(t, x) = grad U_f(x/phi) / phi^2. Throws ValidationError if the test
/// function window is not inside the trajectory.
std::vector<ResidualReport> dynamic_residuals(const SteadySampler& sampler, const Trajectory& orbit,
                                              const std::vector<TestFunction>& tfs, const QuadratureSpec& spec);
ResidualReport dynamic_residual(const SteadyState& f, const Trajectory& orbit, const TestFunction& tf,
                                const QuadratureSpec& spec);

/// || f_phi(t0 + dt) - f_phi(t0) ||_{L^1} as 2 int f_phi(t0) (1 - min(1, ratio)).
ResidualReport transport_l1_continuity(const SteadySampler& sampler, const Trajectory& orbit, double t0, double dt,
                                       const QuadratureSpec& spec);

/// Mass of f_phi(t) against a defensive mixture of f_phi(t_ref) and the uniform law on
/// {|x| <= phi_max, |v| <= 1/phi_min + |phi_dot|max}. Independent of the transport map at t.
ResidualReport transport_mass(const SteadySampler& sampler, const Trajectory& orbit, double t, double t_ref,
                              const QuadratureSpec& spec);

/// {"kind", "gamma_or_eps", "tf_seed", "estimate", "std_error", "samples", "pass"}.
std::string residual_json(const std::string& kind, double gamma_or_eps, std::uint64_t tf_seed,
                          const ResidualReport& rep, double z);

}  // namespace kurthbif
