#include "kurthbif/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace kurthbif {

namespace {

void check_distinct(std::vector<double> gs) {
  std::sort(gs.begin(), gs.end());
  if (std::adjacent_find(gs.begin(), gs.end()) != gs.end()) {
    throw ValidationError("ensemble: Gamma values must be distinct");
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

SteadyState mix(const std::vector<MixEntry>& entries, const QuadratureSpec& spec) {
  if (entries.empty()) throw ValidationError("mix: no components");
  std::vector<double> gs;
  for (const MixEntry& e : entries) {
    if (!e.gamma.in_pipeline_range()) throw ValidationError("mix: Gamma outside the pipeline range");
    gs.push_back(e.gamma.gamma());
  }
  check_distinct(gs);
  std::vector<std::pair<double, SteadyState>> parts;
  for (const MixEntry& e : entries) {
    if (e.gamma.is_kurth()) {
      parts.emplace_back(e.weight, SteadyState::kurth());
    } else {
      parts.emplace_back(e.weight,
                         SteadyState::from_profile(std::make_shared<ProfileTable>(build_profile(e.gamma, spec))));
    }
  }
  return SteadyState::mixture(parts);
}

std::vector<MixEntry> parse_mix_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("mix spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("components") || !j["components"].is_array()) {
    throw ValidationError("mix spec: expected {\"components\": [...]}");
  }
  std::vector<MixEntry> out;
  try {
    for (const auto& c : j["components"]) {
      MixEntry e;
      const int k = c.at("gamma_exp").get<int>();
      e.gamma = k == 0 ? GammaParam::kurth() : GammaParam::from_exponent(k);
      e.weight = c.at("weight").get<double>();
      out.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mix spec: bad component: ") + e.what());
  }
  return out;
}

PhasePoint witness_probe(const GammaParam& gamma, double d) {
  if (!(d > 0.0) || !(d < gamma.gamma())) throw DomainError("witness_probe: distance must lie in (0, Gamma)");
  const double a = std::sqrt(0.5 * (gamma.gamma() - d));
  PhasePoint p;
  p.x = Vec3<double>(a, 0.0, 0.0);
  p.v = Vec3<double>(a, 0.0, 0.0);
  return p;
}

bool WitnessReport::full_rank(double rel_tol) const {
  for (const WitnessRow& r : rows) {
    const Eigen::Index n = r.singular_values.size();
    if (n == 0 || !(r.singular_values[n - 1] > rel_tol * r.singular_values[0])) return false;
  }
  return !rows.empty();
}

bool WitnessReport::sigma_min_increasing() const {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& a = rows[k - 1].singular_values;
    const auto& b = rows[k].singular_values;
    if (!(b[b.size() - 1] > a[a.size() - 1])) return false;
  }
  return true;
}

std::string WitnessReport::to_csv() const {
  std::ostringstream os;
  os << "distance";
  for (std::size_t i = 1; i <= gammas.size(); ++i) os << ",sigma_" << i;
  os << ",condition,diagonal_dominance\n";
  for (const WitnessRow& r : rows) {
    os << fmt(r.distance);
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) os << ',' << fmt(r.singular_values[i]);
    os << ',' << fmt(r.condition) << ',' << fmt(r.diagonal_dominance) << '\n';
  }
  return os.str();
}

WitnessReport independence_witness(const std::vector<std::shared_ptr<const ProfileTable>>& profiles,
                                   std::vector<double> distances) {
  if (profiles.empty()) throw ValidationError("independence_witness: no profiles");
  if (distances.empty()) throw ValidationError("independence_witness: no probe distances");
  WitnessReport rep;
  std::vector<double> gs;
  for (const auto& p : profiles) {
    if (!p) throw ValidationError("independence_witness: null profile");
    if (p->gamma().is_kurth()) throw ValidationError("independence_witness: Gamma = 1 has no singular set N");
    rep.gammas.push_back(p->gamma());
    gs.push_back(p->gamma().gamma());
  }
  check_distinct(gs);
  std::sort(distances.begin(), distances.end(), std::greater<>());
  const std::size_t n = profiles.size();
  for (double d : distances) {
    WitnessRow row;
    row.distance = d;
    row.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const PhasePoint probe = witness_probe(profiles[i]->gamma(), d);
      for (std::size_t j = 0; j < n; ++j) {
        row.matrix(Eigen::Index(i), Eigen::Index(j)) = f_gamma(probe, *profiles[j]);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(row.matrix);
    row.singular_values = svd.singularValues();
    const double smin = row.singular_values[row.singular_values.size() - 1];
    row.condition = smin > 0.0 ? row.singular_values[0] / smin : std::numeric_limits<double>::infinity();
    double dom = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double off = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) off = std::max(off, row.matrix(Eigen::Index(i), Eigen::Index(j)));
      }
      if (off > 0.0) dom = std::min(dom, row.matrix(Eigen::Index(i), Eigen::Index(i)) / off);
    }
    row.diagonal_dominance = dom;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace kurthbif
