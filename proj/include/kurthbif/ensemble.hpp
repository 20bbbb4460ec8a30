#pragma once

// Convex combinations of the f_Gamma family and a finite witness of their
// linear independence.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "kurthbif/abel.hpp"
#include "kurthbif/steady.hpp"

namespace kurthbif {

struct MixEntry {
  GammaParam gamma = GammaParam::kurth();
  double weight = 1.0;
};

/// Builds every profile (Gamma = 1 uses the closed Kurth state) and returns the mixture.
/// Throws ValidationError for bad weights or repeated Gamma.
SteadyState mix(const std::vector<MixEntry>& entries, const QuadratureSpec& spec);

/// {"components": [{"gamma_exp": K, "weight": w}, ...]}; "gamma_exp": 0 denotes Gamma = 1.
std::vector<MixEntry> parse_mix_spec(const std::string& json_text);

/// Probe below the singular set of Gamma at distance d: l^2 = 0, x = v = (a, 0, 0) with
/// 2 a^2 = Gamma - d, so |x|^2 + |v|^2 - l^2 = Gamma - d.
PhasePoint witness_probe(const GammaParam& gamma, double d);

struct WitnessRow {
  double distance = 0.0;
  /// matrix(i, j) = f_{Gamma_j}(probe_i).
  Eigen::MatrixXd matrix;
  Eigen::VectorXd singular_values;
  double condition = 0.0;
  /// min_i M_ii / max_{j != i} M_ij (infinite for N = 1).
  double diagonal_dominance = 0.0;
};

struct WitnessReport {
  std::vector<GammaParam> gammas;
  std::vector<WitnessRow> rows;

  /// Every row has sigma_min > rel_tol * sigma_max.
  bool full_rank(double rel_tol = 1e-12) const;
  /// sigma_min strictly increases along the rows (distances are processed in decreasing order).
  bool sigma_min_increasing() const;
  /// distance,sigma_1,...,sigma_N,condition,diagonal_dominance
  std::string to_csv() const;
};

/// Evaluation matrices for shrinking probe distances. Distances are sorted in decreasing order.
/// Throws ValidationError for repeated Gamma, DomainError if a probe cannot be placed.
WitnessReport independence_witness(const std::vector<std::shared_ptr<const ProfileTable>>& profiles,
                                   std::vector<double> distances);

}  // namespace kurthbif
