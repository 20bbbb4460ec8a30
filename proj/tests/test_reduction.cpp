#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kurthbif/reduction.hpp"

using namespace kurthbif;

namespace {

PhasePoint random_point(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PhasePoint p;
  p.x = Vec3<double>(u(rng), u(rng), u(rng));
  p.v = Vec3<double>(u(rng), u(rng), u(rng));
  return p;
}

}  // namespace

TEST_CASE("chart round trip") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const PhasePoint p = random_point(rng, 0.55);
    const ReducedCoords c = to_reduced(p);
    CHECK(std::abs(c.u - u_of(p)) < 1e-14);
    CHECK(std::abs(ell2_from(c.r, c.p_r, c.u) - c.ell2) < 1e-12);
    const PhasePoint q = from_reduced(c.r, c.p_r, c.ell2);
    const ReducedCoords d = to_reduced(q);
    CHECK(std::abs(d.r - c.r) < 1e-14);
    CHECK(std::abs(d.p_r - c.p_r) < 1e-14);
    CHECK(std::abs(d.ell2 - c.ell2) < 1e-13);
  }
  PhasePoint origin;
  CHECK_THROWS_AS(to_reduced(origin), DomainError);
  CHECK_THROWS_AS(ell2_from(1.0, 0.0, -0.5), DomainError);
}

TEST_CASE("chart is templated on the scalar") {
  PhasePointT<long double> p;
  p.x = Vec3<long double>(0.1L, 0.2L, 0.3L);
  p.v = Vec3<long double>(0.3L, -0.1L, 0.2L);
  const auto c = to_reduced(p);
  CHECK(std::abs(double(c.u - u_of(p))) < 1e-17);
}

TEST_CASE("support region agrees with the direct inequalities") {
  const GammaParam g = GammaParam::from_exponent(12);
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    const PhasePoint p = random_point(rng, 1.0);
    const double r = p.x.norm();
    const double l2 = ell2_of(p);
    const double u = l2 - p.x.squaredNorm() - p.v.squaredNorm();
    const bool direct = u >= -1.0 && u <= 0.0 && l2 <= g.gamma();
    const ReducedCoords c = to_reduced(p);
    const SupportRegion reg = support_region(r, g);
    if (std::abs(u + 1.0) < 1e-12 || std::abs(u) < 1e-12 || std::abs(l2 - g.gamma()) < 1e-12) continue;
    CHECK(reg.contains(c.p_r, c.u) == direct);
    CHECK(in_support(p, g) == direct);
    if (direct) {
      CHECK(p.x.norm() <= 1.0);
      CHECK(p.v.norm() <= 1.0);
      ++checked;
    }
  }
  CHECK(checked > 100);
  CHECK(support_region(1.5, g).kind == RegionCase::Empty);
  CHECK(support_region(0.5, g).kind == RegionCase::Inner);
  CHECK(support_region(std::sqrt(g.gamma()) + 1e-6, g).kind == RegionCase::Outer);
}

TEST_CASE("gamma_bar") {
  const GammaParam g = GammaParam::from_exponent(12);
  CHECK(std::abs(gamma_bar(std::sqrt(g.gamma()), g) - 1.0) < 1e-15);
  CHECK(gamma_bar(0.5, g) > 1.0);
  CHECK(gamma_bar(0.99999, g) < 1.0);
}

TEST_CASE("QuadratureSpec JSON") {
  QuadratureSpec s;
  s.radial_nodes = 30;
  s.tol = 1e-7;
  s.seed = 99;
  const QuadratureSpec t = QuadratureSpec::from_json(s.to_json());
  CHECK(t.radial_nodes == 30);
  CHECK(t.tol == 1e-7);
  CHECK(t.seed == 99);
  CHECK(t.u_nodes == 24);
  const QuadratureSpec partial = QuadratureSpec::from_json(R"({"mc_samples": 500})");
  CHECK(partial.mc_samples == 500);
  CHECK(partial.euler_nodes == 12);
  CHECK_THROWS_AS(QuadratureSpec::from_json("{"), ValidationError);
  CHECK_THROWS_AS(QuadratureSpec::from_json(R"({"u_nodes": 0})"), ValidationError);
  CHECK_THROWS_AS(QuadratureSpec::from_json(R"({"tol": "x"})"), ValidationError);
}

TEST_CASE("SO(3) rule") {
  const SO3Rule rule = so3_rule(6);
  double total = 0.0;
  for (double w : rule.weights) total += w;
  CHECK(std::abs(total - 8.0 * std::numbers::pi * std::numbers::pi) < 1e-11);
  for (const auto& R : rule.rotations) CHECK((R * R.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  // average of (R e3)_3^2 over SO(3) is 1/3
  double m = 0.0;
  for (std::size_t k = 0; k < rule.rotations.size(); ++k) {
    const double z = (rule.rotations[k] * Eigen::Vector3d::UnitZ())[2];
    m += rule.weights[k] * z * z;
  }
  CHECK(std::abs(m / total - 1.0 / 3.0) < 1e-13);
}

TEST_CASE("Kurth mass through the reduced integral") {
  // Q_1(u) = (3/4pi) / (pi^2 sqrt(u + 1))
  const double pi = std::numbers::pi;
  const ReducedWeight q1 = [&](double, double, double u) {
    return u > -1.0 ? 0.75 / pi / (pi * pi * std::sqrt(u + 1.0)) : 0.0;
  };
  QuadratureSpec spec;
  const double mass = reduced_integral(q1, std::nullopt, spec, ReducedDomain::for_gamma(GammaParam::kurth()));
  CHECK(std::abs(mass - 1.0) < 1e-10);
  // the explicit rotation average of a constant gives the same number
  QuadratureSpec small = spec;
  small.radial_nodes = small.pr_nodes = small.u_nodes = 12;
  small.euler_nodes = 3;
  small.tol = 1e-6;
  const RotationFactor one = [](const PhasePoint&) { return 1.0; };
  const IntegralReport rep = reduced_integral_report(q1, one, small, ReducedDomain::for_gamma(GammaParam::kurth()));
  CHECK(std::abs(rep.value - 1.0) < 1e-6);
}

TEST_CASE("reduced integral error estimate fires") {
  QuadratureSpec spec;
  spec.radial_nodes = spec.pr_nodes = spec.u_nodes = 3;
  spec.tol = 1e-14;
  const ReducedWeight w = [](double r, double p, double u) { return std::cos(40.0 * (r + p + u)); };
  CHECK_THROWS_AS(reduced_integral(w, std::nullopt, spec, ReducedDomain::for_gamma(GammaParam::kurth())),
                  AccuracyError);
}

TEST_CASE("velocity integral of the unit ball") {
  QuadratureSpec spec;
  const double vol = velocity_integral([](const Vec3<double>&) { return 1.0; }, 0.4, spec);
  CHECK(std::abs(vol - 4.0 * std::numbers::pi / 3.0) < 1e-12);
  const double m2 = velocity_integral([](const Vec3<double>& v) { return v.squaredNorm(); }, 0.7, spec);
  CHECK(std::abs(m2 - 4.0 * std::numbers::pi / 5.0) < 1e-12);
}

TEST_CASE("domain breaks for several cutoffs") {
  const ReducedDomain d =
      ReducedDomain::for_gammas({GammaParam::from_exponent(12), GammaParam::from_exponent(14), GammaParam::kurth()});
  CHECK(d.gamma.is_kurth());
  CHECK(d.u_breaks.size() == 2);
  CHECK(d.r_breaks.size() == 2);
  CHECK_FALSE(d.p_breaks(0.9999).empty());
}
