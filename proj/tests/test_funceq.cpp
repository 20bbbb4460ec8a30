#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kurthbif/errors.hpp"
#include "kurthbif/funceq.hpp"
#include "oracles.hpp"

using namespace kurthbif;

TEST_CASE("GammaParam validation and exact complement") {
  CHECK_THROWS_AS(GammaParam::from_exponent(11), ValidationError);
  CHECK_THROWS_AS(GammaParam::from_exponent(53), ValidationError);
  CHECK_THROWS_AS(GammaParam::from_exponent(99), ValidationError);
  const GammaParam g = GammaParam::from_exponent(20);
  CHECK(g.one_minus_gamma() == std::ldexp(1.0, -20));
  CHECK(g.exponent() == 20);
  CHECK(GammaParam::kurth().is_kurth());
  CHECK(GammaParam::from_value(1.0 - std::ldexp(1.0, -15)).exponent() == 15);
  CHECK_THROWS_AS(GammaParam::from_value(0.99), ValidationError);
  CHECK_THROWS_AS(GammaParam::series_only(0.99), ValidationError);
  CHECK_FALSE(GammaParam::series_only(1727.0 / 1728.0).in_pipeline_range());
}

TEST_CASE("chi and h") {
  const GammaParam g = GammaParam::from_exponent(12);
  const double d = g.one_minus_gamma();
  CHECK(h(0.0, g) == 0.0);
  CHECK(h(d, g) == 0.0);
  CHECK(h(0.5, g) == 0.0);
  CHECK(chi(0.5, g) == 0.5);
  const double s = 0.3 * d;
  CHECK(std::abs(h(s, g) - double(oracle::h_map(s, d))) < 1e-22);
  // jet against central differences
  const Jet j = h_jet(s, g);
  const double e = 1e-9 * d;
  CHECK(std::abs(j.d1 - (h(s + e, g) - h(s - e, g)) / (2 * e)) < 1e-6);
  CHECK(std::abs(j.d2 - (h_jet(s + e, g).d1 - h_jet(s - e, g).d1) / (2 * e)) < 1e-3 * std::abs(j.d2));
}

TEST_CASE("psi matches the long double series") {
  for (int k : {12, 16, 30}) {
    const GammaParam g = GammaParam::from_exponent(k);
    const double d = g.one_minus_gamma();
    for (int i = 0; i <= 50; ++i) {
      const double s = d * i / 50.0;
      const double ref = double(oracle::psi(s, d));
      CHECK(std::abs(psi(s, g) - ref) <= 1e-15 * std::max(ref, 1e-300) + 1e-300);
    }
  }
}

TEST_CASE("functional equation psi(s) - psi(h(s)) = s") {
  for (int k : {12, 16}) {
    const GammaParam g = GammaParam::from_exponent(k);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double s = (i + 0.5) / 2000.0 * (i % 2 ? 1.0 : g.one_minus_gamma());
      worst = std::max(worst, std::abs(psi(s, g) - psi(h(s, g), g) - s));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("boundary data") {
  for (int k : {12, 16, 24}) {
    const GammaParam g = GammaParam::from_exponent(k);
    const double d = g.one_minus_gamma();
    const double G = g.gamma();
    CHECK(psi(0.0, g) == 0.0);
    CHECK(std::abs(psi(d, g) - d) <= 1e-12);
    CHECK(std::abs(psi_prime(0.0, g) - 1.0 / G) <= 1e-8);
    CHECK(std::abs(psi_tilde_jet(d, g).d1 - (1.0 - d / (G * G))) <= 1e-8);
    CHECK(std::abs(psi_second(0.0, g) + 2.0 / (1.0 - d * d)) <= 1e-6);
  }
}

TEST_CASE("derivatives of psi against long double differences") {
  const GammaParam g = GammaParam::from_exponent(14);
  const double d = g.one_minus_gamma();
  for (double f : {0.1, 0.4, 0.8}) {
    const double s = f * d;
    const double ref = double(oracle::psi_prime_fd(s, d, 1e-6L * d));
    CHECK(std::abs(psi_prime(s, g) - ref) < 1e-8);
  }
}

TEST_CASE("bounds on the series part") {
  const GammaParam g = GammaParam::from_exponent(12);
  const double d = g.one_minus_gamma();
  const double c = std::cbrt(d);
  for (int i = 0; i <= 200; ++i) {
    const Jet j = psi_tilde_jet(d * i / 200.0, g);
    CHECK(std::abs(j.value) <= 4.0 * c);
    CHECK(std::abs(j.d1) <= 16.0);
    CHECK(std::abs(j.d2) <= 64.0 / c);
  }
  CHECK(iterate_ratio(0.5 * d, g) < 0.5);
}

TEST_CASE("outer branch is the identity") {
  const GammaParam g = GammaParam::from_exponent(12);
  const Jet j = psi_jet(0.7, g);
  CHECK(j.value == 0.7);
  CHECK(j.d1 == 1.0);
  CHECK(j.d2 == 0.0);
}
