#pragma once

// Half-order Abel operators and the profile phi solving pi I^{1/2} phi = psi.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kurthbif/funceq.hpp"
#include "kurthbif/gamma_param.hpp"
#include "kurthbif/numerics.hpp"
#include "kurthbif/reduction.hpp"

namespace kurthbif {

using ProfileFn = std::function<double(double)>;

/// (I^{1/2} g)(s) = int_0^s g(sigma) / sqrt(s - sigma) dsigma, computed as 2 int_0^sqrt(s) g(s - tau^2) dtau.
/// breaks are sigma values where g is not smooth. Throws AccuracyError if the
/// half-order estimate exceeds spec.tol * max(1, |value|).
double abel_apply(const ProfileFn& g, double s, const QuadratureSpec& spec, std::span<const double> breaks = {});
EstimatedValue abel_apply_estimated(const ProfileFn& g, double s, int nodes, std::span<const double> breaks = {});

/// (K_Gamma g)(s) = (I^{1/2} g)(s - chi(s)) = (I^{1/2} g)(h(s)).
double k_gamma_apply(const ProfileFn& g, double s, const GammaParam& gamma, const QuadratureSpec& spec,
                     std::span<const double> breaks = {});

/// A radial energy profile phi on [0, 1] with phi(0) = 0; Phi(u) = phi(u + 1).
class EnergyProfile {
 public:
  virtual ~EnergyProfile() = default;
  virtual const GammaParam& gamma() const = 0;
  /// 0 for s <= 0; throws DomainError for s > 1.
  virtual double phi(double s) const = 0;
  /// 0 for s <= 0; at a jump the value from below (s smaller) is returned.
  virtual double phi_prime(double s) const = 0;
  /// Interior points of (0, 1) where phi' is singular or jumps.
  virtual std::vector<double> singular_points() const = 0;
  /// Singular points plus points where phi changes scale; quadrature panels should end there.
  virtual std::vector<double> breakpoints() const { return singular_points(); }
};

/// Chebyshev node layout of a ProfileTable.
struct ProfileLayout {
  int inner_degree = 24;
  int outer_degree = 24;
  /// Gauss order of the closed-branch integrals.
  int quad_nodes = 32;
};

struct ProfileResiduals {
  /// max |pi I^{1/2} phi - psi| over the check points.
  double abel = 0.0;
  /// max |I^{1/2} phi(s) - I^{1/2} phi(h(s)) - s/pi| over the check points.
  double functional = 0.0;
};

/// phi_Gamma and phi'_Gamma tabulated on both branches.
///
/// Inner branch [0, 1-Gamma]: interpolants of phi/sqrt(s) and phi' sqrt(s) in s.
/// Outer branch: interpolants of phi and phi' w in w = sqrt(s - (1-Gamma)), on panels
/// graded geometrically from w = 0. Gamma = 1 uses the closed forms.
class ProfileTable : public EnergyProfile {
 public:
  /// Tabulates without verification; see build_profile.
  ProfileTable(const GammaParam& gamma, const ProfileLayout& layout = {});

  const GammaParam& gamma() const override { return gamma_; }
  double phi(double s) const override;
  double phi_prime(double s) const override;
  std::vector<double> singular_points() const override;
  /// 1-Gamma and the outer panel ends 1-Gamma + w_j^2.
  std::vector<double> breakpoints() const override;

  /// Closed-branch integrals evaluated directly, bypassing the tables.
  double phi_direct(double s) const;
  double phi_prime_direct(double s) const;
  /// d/ds of int_0^s psi(s - sigma)/sqrt(sigma) dsigma by central differences; verification only.
  double phi_by_differentiation(double s, double step) const;

  /// lim phi'(s) as s increases to 1-Gamma.
  double l_gamma() const;

  const ProfileLayout& layout() const { return layout_; }
  const ProfileResiduals& residuals() const { return residuals_; }
  const QuadratureSpec& build_spec() const { return build_spec_; }

  /// Tabulation points (s values) of each branch.
  std::vector<double> inner_nodes() const;
  std::vector<double> outer_nodes() const;

  std::string to_json() const;
  /// Rebuilds the interpolants from stored values; reproduces evaluations bit for bit.
  static ProfileTable from_json(const std::string& text);

 private:
  friend ProfileTable build_profile(const GammaParam&, const QuadratureSpec&, const ProfileLayout&);
  ProfileTable(const GammaParam& gamma, const ProfileLayout& layout, bool tabulate);
  static std::vector<double> outer_w_breaks(double delta);
  void install(const std::vector<double>& inner_phi, const std::vector<double>& inner_dphi,
               const std::vector<double>& outer_phi, const std::vector<double>& outer_dphi);

  // closed branch integrals in the table variables
  double inner_a(double s) const;  // phi / sqrt(s)
  double inner_b(double s) const;  // phi' sqrt(s)
  double outer_c(double w) const;  // phi
  double outer_d(double w) const;  // phi' w

  GammaParam gamma_;
  ProfileLayout layout_;
  QuadratureSpec build_spec_;
  ProfileResiduals residuals_;
  std::vector<double> inner_s_;
  std::vector<double> outer_w_;
  std::vector<double> inner_phi_, inner_dphi_, outer_phi_, outer_dphi_;
  PiecewiseChebyshev a_, b_, c_, d_;
};

/// Tabulate phi_Gamma and verify the Abel and target-equation residuals on 256 points.
/// Throws ValidationError outside the pipeline range, BuildError if a residual exceeds 1e-6.
ProfileTable build_profile(const GammaParam& gamma, const QuadratureSpec& spec, const ProfileLayout& layout = {});

/// Residuals of a table at the given points.
ProfileResiduals profile_residuals(const EnergyProfile& profile, std::span<const double> points,
                                   const QuadratureSpec& spec);
/// The 256 default check points: half uniform on (0, 1], half uniform on (0, 2(1-Gamma)].
std::vector<double> residual_check_points(const GammaParam& gamma);

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;
  bool holds() const { return lower <= value && value <= upper; }
};

/// Two-sided envelope of phi'(s) on the branch containing s. Throws DomainError at s = 0, s = 1-Gamma.
Bracket phi_prime_brackets(const ProfileTable& table, double s);

/// int_0^1 |phi'| by branch-wise singular quadrature.
double w11_norm(const ProfileTable& table, int nodes = 24);

struct Deviation {
  double deviation = 0.0;
  /// Envelope (1-Gamma)^{1/6} + (1-Gamma)/sqrt(s) or (1-Gamma)/sqrt(s-(1-Gamma)), with unit constant.
  double envelope = 0.0;
  /// deviation / envelope, the constant this point requires.
  double ratio() const { return envelope > 0.0 ? deviation / envelope : 0.0; }
};

/// |phi'(s) - 1/(pi^2 sqrt(s))| and its envelope. Throws DomainError at s = 1-Gamma or outside (0, 1).
Deviation pointwise_deviation(const ProfileTable& table, double s);

/// Profile with constant phi' = c on [0, 1]; not a solution, used as a negative control.
class ConstantQProfile : public EnergyProfile {
 public:
  ConstantQProfile(const GammaParam& gamma, double slope) : gamma_(gamma), slope_(slope) {}
  const GammaParam& gamma() const override { return gamma_; }
  double phi(double s) const override;
  double phi_prime(double s) const override;
  std::vector<double> singular_points() const override { return {}; }

 private:
  GammaParam gamma_;
  double slope_;
};

}  // namespace kurthbif
