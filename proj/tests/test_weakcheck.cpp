#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "kurthbif/weakcheck.hpp"
#include "oracles.hpp"

using namespace kurthbif;

namespace {

constexpr double kPi = std::numbers::pi;

PhasePoint random_point(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PhasePoint p;
  p.x = Vec3<double>(u(rng), u(rng), u(rng));
  p.v = Vec3<double>(u(rng), u(rng), u(rng));
  return p;
}

std::shared_ptr<const ProfileTable> table12() {
  static auto t = std::make_shared<const ProfileTable>(build_profile(GammaParam::from_exponent(12), QuadratureSpec{}));
  return t;
}

std::vector<TestFunction> family(int n, std::uint64_t base) {
  std::vector<TestFunction> tfs;
  for (int i = 0; i < n; ++i) tfs.push_back(TestFunction::random(base + i));
  return tfs;
}

int failures(const std::vector<ResidualReport>& reps) {
  const double z = bonferroni_z(int(reps.size()));
  int f = 0;
  for (const auto& r : reps) f += r.passes(z) ? 0 : 1;
  return f;
}

}  // namespace

TEST_CASE("flow map") {
  PhasePoint e1;
  e1.x = Vec3<double>(1.0, 0.0, 0.0);
  const PhasePoint q = flow_map(kPi / 2, e1);
  CHECK(q.x.norm() < 1e-16);
  CHECK((q.v + Vec3<double>(1.0, 0.0, 0.0)).norm() < 1e-15);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const PhasePoint p = random_point(rng, 0.5);
    const double t = 10.0 * (double(rng() >> 11) * 0x1.0p-53);
    const PhasePoint r = flow_map(t, p);
    const double a0 = p.x.squaredNorm() + p.v.squaredNorm();
    const double a1 = r.x.squaredNorm() + r.v.squaredNorm();
    CHECK(std::abs(a1 - a0) < 1e-14);
    CHECK(std::abs(ell2_of(r) - ell2_of(p)) < 1e-14);
    const PhasePoint full = flow_map(2.0 * kPi, p);
    CHECK((full.x - p.x).norm() < 1e-14);
    CHECK((full.v - p.v).norm() < 1e-14);
    if (in_support(p, GammaParam::kurth()) && in_support(r, GammaParam::kurth())) {
      const double f0 = oracle::f_kurth(p.x.data(), p.v.data());
      CHECK(std::abs(f_kurth(r) - f0) < 1e-12 * f0);
    }
  }
}

TEST_CASE("test function derivatives and support") {
  std::mt19937_64 rng(2);
  const double h = 1e-6;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const TestFunction tf = TestFunction::random(seed, TimeWindow{0.5, 1.0});
    const TestFunction inv = TestFunction::random_invariant(seed);
    for (int i = 0; i < 20; ++i) {
      const PhasePoint p = random_point(rng, 0.8);
      const double t = 0.3;
      for (const TestFunction* f : {&tf, &inv}) {
        const TestEval e = f->eval(t, p);
        for (int c = 0; c < 3; ++c) {
          PhasePoint a = p, b = p;
          a.x[c] += h;
          b.x[c] -= h;
          CHECK(std::abs((f->eval(t, a).value - f->eval(t, b).value) / (2 * h) - e.dx[c]) <
                1e-6 * std::max(1.0, std::abs(e.dx[c])));
          a = p;
          b = p;
          a.v[c] += h;
          b.v[c] -= h;
          CHECK(std::abs((f->eval(t, a).value - f->eval(t, b).value) / (2 * h) - e.dv[c]) <
                1e-6 * std::max(1.0, std::abs(e.dv[c])));
        }
        const double dtf = (f->eval(t + h, p).value - f->eval(t - h, p).value) / (2 * h);
        CHECK(std::abs(dtf - e.dt) < 1e-6 * std::max(1.0, std::abs(e.dt)));
      }
    }
    PhasePoint far;
    far.x = Vec3<double>(2.5, 0.0, 0.0);
    CHECK(tf.eval(0.5, far).value == 0.0);
    CHECK(tf.eval(1.6, PhasePoint{}).value == 0.0);
    CHECK(inv.eval(far).value == 0.0);
  }
}

TEST_CASE("Bonferroni quantile") {
  CHECK(std::abs(bonferroni_z(1) - 3.0) < 1e-3);
  CHECK(std::abs(bonferroni_z(20) - 3.817) < 2e-3);
  CHECK(bonferroni_z(100) > bonferroni_z(20));
}

TEST_CASE("sampler density matches the profile") {
  const SteadySampler s(SteadyState::from_profile(table12()));
  QuadratureSpec spec;
  for (double r : {0.1, 0.6, 0.9999}) {
    CHECK(std::abs(s.density(r) - rho_f_gamma(r, *table12(), spec)) < 1e-7);
    CHECK(std::abs(rho_from_profile(r, *table12()) - rho_f_gamma(r, *table12(), spec)) < 1e-7);
  }
  // weights integrate f: mass 1
  const auto smp = s.draw(20000, 9);
  double m = 0.0;
  for (const auto& w : smp) {
    CHECK(in_support(w.z, GammaParam::from_exponent(12)));
    m += w.weight;
  }
  CHECK(std::abs(m / smp.size() - 1.0) < 1e-6);
  // and the potential is the Kurth one
  CHECK(std::abs(s.potential().potential(0.5) - u_kurth(Vec3<double>(0.5, 0.0, 0.0))) < 1e-6);
}

TEST_CASE("static residuals: solutions pass, the control fails") {
  QuadratureSpec spec;
  const auto tfs = family(20, 100);
  CHECK(failures(static_residuals(SteadySampler(SteadyState::kurth()), tfs, spec)) == 0);
  CHECK(failures(static_residuals(SteadySampler(SteadyState::from_profile(table12())), tfs, spec)) == 0);
  const SteadyState control =
      SteadyState::from_profile(std::make_shared<ConstantQProfile>(GammaParam::from_exponent(12), 4.0 / (kPi * kPi)));
  CHECK(failures(static_residuals(SteadySampler(control), tfs, spec)) > 0);
}

TEST_CASE("invariant test functions give zero") {
  QuadratureSpec spec;
  spec.mc_samples = 5000;
  const SteadySampler s(SteadyState::kurth());
  for (std::uint64_t seed : {5u, 6u}) {
    const auto rep = static_residuals(s, {TestFunction::random_invariant(seed)}, spec);
    CHECK(std::abs(rep[0].estimate) < 1e-12);
  }
}

TEST_CASE("dynamic residuals") {
  QuadratureSpec spec;
  spec.mc_samples = 10000;
  // eps = 0: stationary transport, same as the static residual up to the time integral
  const Trajectory still = integrate(OrbitState{0.0, 1.0, 0.0}, 4.0);
  const TestFunction tf = TestFunction::random(7, TimeWindow{2.0, 1.0});
  const SteadySampler kurth(SteadyState::kurth());
  const auto rep = dynamic_residuals(kurth, still, {tf}, spec);
  CHECK(rep[0].passes(3.0));

  const double T = period_closed_form(0.5);
  const Trajectory tr = integrate(OrbitState{0.0, 1.0, 0.5}, 2.0 * T);
  std::vector<TestFunction> tfs;
  for (int i = 0; i < 10; ++i) tfs.push_back(TestFunction::random(200 + i, TimeWindow{0.3 * T + 0.1 * i * T, 0.25 * T}));
  CHECK(failures(dynamic_residuals(kurth, tr, tfs, spec)) == 0);

  const Trajectory tr3 = integrate(OrbitState{0.0, 1.0, 0.3}, 2.0 * period_closed_form(0.3));
  CHECK(failures(dynamic_residuals(SteadySampler(SteadyState::from_profile(table12())), tr3, tfs, spec)) == 0);

  const TestFunction late = TestFunction::random(1, TimeWindow{100.0, 1.0});
  CHECK_THROWS_AS(dynamic_residuals(kurth, tr, {late}, spec), ValidationError);
}

TEST_CASE("transport map") {
  const Trajectory tr = integrate(OrbitState{0.0, 1.0, 0.5}, 5.0);
  for (double t : {0.0, 1.1, 4.0}) CHECK(std::abs(transport_jacobian(tr, t).determinant() - 1.0) < 1e-13);
  std::mt19937_64 rng(4);
  const SteadyState k = SteadyState::kurth();
  for (int i = 0; i < 200; ++i) {
    const PhasePoint yw = random_point(rng, 0.5);
    const double t = 2.3;
    const PhasePoint xv = transport_forward(tr, t, yw);
    CHECK(std::abs(transported_value(k, tr, t, xv) - k(yw)) < 1e-12 * std::max(1.0, k(yw)));
  }
}

TEST_CASE("L1 continuity and mass of the transport") {
  QuadratureSpec spec;
  const SteadySampler s(SteadyState::kurth());
  const double T = period_closed_form(0.5);
  const Trajectory tr = integrate(OrbitState{0.0, 1.0, 0.5}, 2.0 * T);
  CHECK(transport_l1_continuity(s, tr, 0.0, 0.0, spec).estimate == 0.0);
  double prev = 10.0;
  for (int k = 1; k <= 4; ++k) {
    const double v = transport_l1_continuity(s, tr, 0.0, std::pow(10.0, -k), spec).estimate;
    CHECK(v < prev);
    prev = v;
  }
  const ResidualReport period = transport_l1_continuity(s, tr, 0.0, T, spec);
  CHECK(period.estimate < 1e-6);
  for (double t : {0.0, 0.3 * T, 0.7 * T}) {
    const ResidualReport m = transport_mass(s, tr, t, 0.0, spec);
    CHECK(std::abs(m.estimate - 1.0) <= 4.0 * m.std_error + 1e-12);
  }
}

TEST_CASE("residual JSON") {
  ResidualReport r{0.01, 0.02, 100};
  const std::string j = residual_json("static:kurth", 1.0, 42, r, 3.0);
  for (const char* key : {"\"kind\"", "\"gamma_or_eps\"", "\"tf_seed\"", "\"estimate\"", "\"std_error\"",
                          "\"samples\"", "\"pass\""}) {
    CHECK(j.find(key) != std::string::npos);
  }
  CHECK(j.find("true") != std::string::npos);
}
