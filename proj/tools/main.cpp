// kurthbif command line: build, verify, sweep, orbit, residual, mix, witness.
//
// Exit codes: 0 pass, 1 check failure, 2 usage or parameter error, 3 accuracy failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kurthbif/abel.hpp"
#include "kurthbif/ensemble.hpp"
#include "kurthbif/errors.hpp"
#include "kurthbif/funceq.hpp"
#include "kurthbif/gamma_param.hpp"
#include "kurthbif/orbit.hpp"
#include "kurthbif/steady.hpp"
#include "kurthbif/weakcheck.hpp"

using namespace kurthbif;

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int samples = 0;

  QuadratureSpec spec() const {
    QuadratureSpec s = config.empty() ? QuadratureSpec{} : QuadratureSpec::from_json(read_file(config));
    if (seed_set) s.seed = seed;
    if (samples > 0) s.mc_samples = samples;
    s.validate();
    return s;
  }
};

ProfileTable load_or_build(int k, const std::string& table, const QuadratureSpec& spec) {
  if (!table.empty()) {
    ProfileTable t = ProfileTable::from_json(read_file(table));
    if (t.gamma().exponent() != k) throw ValidationError("cached table does not match --gamma-exp");
    return t;
  }
  return build_profile(GammaParam::from_exponent(k), spec);
}

int check(bool ok, const std::string& what) {
  std::printf("%s: %s\n", what.c_str(), ok ? "pass" : "FAIL");
  return ok ? 0 : 1;
}

// --- build ---------------------------------------------------------------

int run_build(int k, const std::string& out, const Common& c) {
  const QuadratureSpec spec = c.spec();
  const GammaParam g = GammaParam::from_exponent(k);
  try {
    const ProfileTable t = build_profile(g, spec);
    std::printf("gamma_exp %d one_minus_gamma %s\n", k, num(g.one_minus_gamma()).c_str());
    std::printf("abel_residual %s\nfunctional_residual %s\nl_gamma %s\n", num(t.residuals().abel).c_str(),
                num(t.residuals().functional).c_str(), num(t.l_gamma()).c_str());
    if (!out.empty()) write_out(out, t.to_json());
    return 0;
  } catch (const BuildError& e) {
    std::printf("build failed: %s\n", e.what());
    for (std::size_t i = 0; i < e.nodes().size() && i < 8; ++i) {
      std::printf("  s %s residual %s\n", num(e.nodes()[i]).c_str(), num(e.residuals()[i]).c_str());
    }
    return 1;
  }
}

// --- verify --------------------------------------------------------------

int verify_funceq(const GammaParam& g, double tol) {
  const double d = g.one_minus_gamma();
  double worst = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    // half the points on the inner branch, half over [0, 1]
    const double s = i % 2 == 0 ? d * (i / 2 + 0.5) / (n / 2) : (i / 2 + 0.5) / (n / 2);
    worst = std::max(worst, std::abs(psi(s, g) - psi(h(s, g), g) - s));
  }
  std::printf("funceq max residual %s over %d points\n", num(worst).c_str(), n);
  return check(worst <= tol, "funceq");
}

int verify_abel(const ProfileTable& t, double tol, const QuadratureSpec& spec) {
  const std::vector<double> pts = residual_check_points(t.gamma());
  const ProfileResiduals r = profile_residuals(t, pts, spec);
  std::printf("abel max residual %s functional %s over %zu points\n", num(r.abel).c_str(), num(r.functional).c_str(),
              pts.size());
  return check(r.abel <= tol && r.functional <= tol, "abel");
}

int verify_density(const ProfileTable& t, double tol, const QuadratureSpec& spec) {
  const double seam = std::sqrt(t.gamma().gamma());
  std::vector<double> radii;
  for (int i = 0; i < 61; ++i) radii.push_back(i / 61.0);
  radii.push_back(seam);
  radii.push_back(std::nextafter(seam, 0.0));
  radii.push_back(0.5 * (seam + 1.0));
  double worst = 0.0;
  for (double r : radii) worst = std::max(worst, std::abs(4.0 * kPi / 3.0 * rho_f_gamma(r, t, spec) - 1.0));
  const double outside = rho_f_gamma(1.1, t, spec);
  double cross = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double r = seam + (i - 7.5) * (1.0 - seam) / 8.0;
    const double a = rho_f_gamma(r, t, spec);
    const double b = rho_by_velocity(r, t, spec);
    cross = std::max(cross, std::abs(a - b) / a);
  }
  std::printf("density max |4pi/3 rho - 1| %s over %zu radii\n", num(worst).c_str(), radii.size());
  std::printf("density rho(1.1) %s\n", num(outside).c_str());
  std::printf("density velocity cross-check max rel %s over 16 radii\n", num(cross).c_str());
  return check(worst <= tol && outside == 0.0 && cross <= tol, "density");
}

int verify_bounds(const ProfileTable& t) {
  const GammaParam& g = t.gamma();
  const double d = g.one_minus_gamma();
  const double c3 = std::cbrt(d);
  int psi_viol = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = d * i / 999.0;
    const Jet j = psi_tilde_jet(s, g);
    if (std::abs(j.value) > 4.0 * c3 || std::abs(j.d1) > 16.0 || std::abs(j.d2) > 64.0 / c3) ++psi_viol;
  }
  int br_viol = 0;
  for (int i = 0; i < 1000; ++i) {
    const double si = d * (i + 0.5) / 1000.0;
    const double so = d + (1.0 - d) * (i + 0.5) / 1000.0;
    if (!phi_prime_brackets(t, si).holds()) ++br_viol;
    if (!phi_prime_brackets(t, so).holds()) ++br_viol;
  }
  std::printf("bounds psi violations %d / 1000, phi' bracket violations %d / 2000\n", psi_viol, br_viol);
  return check(psi_viol == 0 && br_viol == 0, "bounds");
}

// --- sweep ---------------------------------------------------------------

int run_sweep_l1(int kmin, int kmax, const std::string& out, const Common& c) {
  if (kmin > kmax) throw ValidationError("--kmin must not exceed --kmax");
  const QuadratureSpec spec = c.spec();
  std::ostringstream csv;
  csv << "gamma,one_minus_gamma,l1_distance,ratio_to_rate\n";
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  double cmax = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const GammaParam g = GammaParam::from_exponent(k);
    const ProfileTable t = build_profile(g, spec);
    const double l1 = l1_distance_to_kurth(t, spec);
    const double ratio = l1 / std::pow(g.one_minus_gamma(), 1.0 / 6.0);
    csv << num(g.gamma()) << ',' << num(g.one_minus_gamma()) << ',' << num(l1) << ',' << num(ratio) << '\n';
    decreasing = decreasing && l1 < prev;
    prev = l1;
    cmax = std::max(cmax, ratio);
  }
  write_out(out, csv.str());
  std::printf("l1 sweep k=%d..%d max ratio %s\n", kmin, kmax, num(cmax).c_str());
  return check(decreasing, "l1 decreasing");
}

// --- orbit ---------------------------------------------------------------

int run_orbit(double eps, int periods, int rows, const std::string& out, double tol) {
  if (periods < 1) throw ValidationError("--periods must be >= 1");
  const PeriodicOrbit po = PeriodicOrbit::from_eps(eps);
  const Trajectory tr = integrate(OrbitState{0.0, 1.0, eps}, periods * po.period, tol);
  const double quad = period_quadrature(eps);
  const OrbitState end = tr.state(po.period);
  const double ret = std::hypot(end.phi - 1.0, end.phi_dot - eps);
  std::printf("eps %s\n", num(eps).c_str());
  std::printf("period closed_form %s quadrature %s\n", num(po.period).c_str(), num(quad).c_str());
  std::printf("phi_min %s (closed %s)\nphi_max %s (closed %s)\n", num(tr.phi_min()).c_str(), num(po.phi_min).c_str(),
              num(tr.phi_max()).c_str(), num(po.phi_max).c_str());
  std::printf("return_error %s\nenergy_drift %s\n", num(ret).c_str(), num(tr.max_energy_drift()).c_str());
  if (!out.empty()) write_out(out, tr.to_csv(rows));
  const bool ok = std::abs(tr.phi_min() - po.phi_min) <= 1e-8 && std::abs(tr.phi_max() - po.phi_max) <= 1e-8 &&
                  std::abs(quad - po.period) <= 1e-10 && ret <= 1e-8 && tr.max_energy_drift() <= 1e-9;
  return check(ok, "orbit");
}

// --- residual ------------------------------------------------------------

SteadyState state_for(const std::string& which, int k, const std::string& table, const QuadratureSpec& spec) {
  if (which == "kurth") return SteadyState::kurth();
  if (which == "control") {
    // constant phi' with the Kurth mass; not a solution
    return SteadyState::from_profile(
        std::make_shared<ConstantQProfile>(GammaParam::from_exponent(k), 4.0 / (kPi * kPi)));
  }
  if (which != "gamma") throw ValidationError("--state must be gamma, kurth or control");
  return SteadyState::from_profile(std::make_shared<ProfileTable>(load_or_build(k, table, spec)));
}

int run_residual(const std::string& mode, int k, double eps, int tests, const std::string& which,
                 const std::string& table, const std::string& out, const Common& c) {
  if (tests < 1) throw ValidationError("--tests must be >= 1");
  const QuadratureSpec spec = c.spec();
  const SteadyState st = state_for(which, k, table, spec);
  const SteadySampler sampler(st);
  const double z = bonferroni_z(tests);
  std::vector<ResidualReport> reps;
  std::vector<std::uint64_t> seeds;
  double label = which == "kurth" ? 1.0 : GammaParam::from_exponent(k).gamma();
  if (mode == "static") {
    std::vector<TestFunction> tfs;
    for (int i = 0; i < tests; ++i) {
      seeds.push_back(spec.seed + 1 + std::uint64_t(i));
      tfs.push_back(TestFunction::random(seeds.back()));
    }
    reps = static_residuals(sampler, tfs, spec);
  } else {
    const PeriodicOrbit po = PeriodicOrbit::from_eps(eps);
    const Trajectory tr = integrate(OrbitState{0.0, 1.0, eps}, 2.0 * po.period);
    std::mt19937_64 rng(spec.seed);
    std::vector<TestFunction> tfs;
    for (int i = 0; i < tests; ++i) {
      seeds.push_back(spec.seed + 1 + std::uint64_t(i));
      const double half = 0.25 * po.period;
      const double center = half + (2.0 * po.period - 2.0 * half) * (double(rng() >> 11) * 0x1.0p-53);
      tfs.push_back(TestFunction::random(seeds.back(), TimeWindow{center, half}));
    }
    reps = dynamic_residuals(sampler, tr, tfs, spec);
    label = eps;
  }
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["mode"] = mode;
  j["state"] = which;
  j["z_gate"] = z;
  j["note"] = "Monte Carlo gate; family-wise level 0.0027 with Bonferroni correction";
  j["reports"] = nlohmann::json::array();
  int fails = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    j["reports"].push_back(nlohmann::ordered_json::parse(residual_json(mode + ":" + which, label, seeds[i], reps[i], z)));
    if (!reps[i].passes(z)) ++fails;
  }
  write_out(out, j.dump(2) + "\n");
  std::printf("residual %s %s: %d of %d outside the %s sigma gate\n", mode.c_str(), which.c_str(), fails, tests,
              num(z).c_str());
  return check(fails == 0, "residual");
}

// --- mix -----------------------------------------------------------------

int run_mix(const std::string& spec_path, const std::string& out, const Common& c) {
  const QuadratureSpec spec = c.spec();
  const std::vector<MixEntry> entries = parse_mix_spec(read_file(spec_path));
  const SteadyState st = mix(entries, spec);
  double dens = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double r = (i + 0.5) / 16.0;
    dens = std::max(dens, std::abs(4.0 * kPi / 3.0 * st.density(r, spec) - 1.0));
  }
  double mass = 0.0;
  for (const auto& comp : st.components()) mass += comp.weight * total_mass(*comp.profile, spec).reduced;
  std::vector<TestFunction> tfs;
  for (int i = 0; i < 20; ++i) tfs.push_back(TestFunction::random(spec.seed + 1 + std::uint64_t(i)));
  const SteadySampler sampler(st);
  const auto reps = static_residuals(sampler, tfs, spec);
  const double z = bonferroni_z(20);
  int fails = 0;
  for (const auto& r : reps) fails += r.passes(z) ? 0 : 1;
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["components"] = nlohmann::json::array();
  for (const MixEntry& e : entries) {
    j["components"].push_back({{"gamma", e.gamma.gamma()}, {"gamma_exp", e.gamma.exponent()}, {"weight", e.weight}});
  }
  j["density_max_error"] = dens;
  j["mass"] = mass;
  j["residual_failures"] = fails;
  j["residual_tests"] = 20;
  write_out(out, j.dump(2) + "\n");
  std::printf("mix density error %s mass %s residual failures %d / 20\n", num(dens).c_str(), num(mass).c_str(), fails);
  return check(dens <= 1e-5 && std::abs(mass - 1.0) <= 1e-5 && fails == 0, "mix");
}

// --- witness -------------------------------------------------------------

int run_witness(const std::vector<int>& ks, const std::string& out, const Common& c) {
  const QuadratureSpec spec = c.spec();
  std::vector<std::shared_ptr<const ProfileTable>> ps;
  for (int k : ks) ps.push_back(std::make_shared<ProfileTable>(build_profile(GammaParam::from_exponent(k), spec)));
  const WitnessReport rep = independence_witness(ps, {1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12});
  write_out(out, rep.to_csv());
  const auto& last = rep.rows.back().singular_values;
  std::printf("witness N=%zu sigma_min at d=1e-12: %s\n", ks.size(), num(last[last.size() - 1]).c_str());
  return check(rep.full_rank() && rep.sigma_min_increasing(), "witness");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady states bifurcating from the Kurth solution: construction and verification"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "JSON file with quadrature settings");
  app.add_option("--seed", common.seed, "Monte Carlo seed (overrides the config)")
      ->each([&](const std::string&) { common.seed_set = true; });
  app.add_option("--samples", common.samples, "Monte Carlo sample count (overrides the config)");

  int k = 12;
  std::string out;
  std::string table;

  auto* build = app.add_subcommand("build", "Tabulate the profile for Gamma = 1 - 2^-K");
  build->add_option("--gamma-exp", k, "K")->required();
  build->add_option("--out", out, "Write the table as JSON");

  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  std::string suite;
  double tol = -1.0;
  verify->add_option("suite", suite, "density | abel | funceq | bounds")
      ->required()
      ->check(CLI::IsMember({"density", "abel", "funceq", "bounds"}));
  verify->add_option("--gamma-exp", k, "K")->required();
  verify->add_option("--tol", tol, "Tolerance");
  verify->add_option("--table", table, "Cached table from build --out");

  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps");
  std::string sweep_kind;
  int kmin = 12;
  int kmax = 20;
  sweep->add_option("kind", sweep_kind, "l1")->required()->check(CLI::IsMember({"l1"}));
  sweep->add_option("--kmin", kmin, "Smallest K");
  sweep->add_option("--kmax", kmax, "Largest K");
  sweep->add_option("--out", out, "CSV output");

  auto* orbit = app.add_subcommand("orbit", "Periodic orbit through (1, eps)");
  double eps = 0.5;
  int periods = 1;
  int rows = 200;
  double otol = 1e-10;
  orbit->add_option("--eps", eps, "eps with |eps| < 1")->required();
  orbit->add_option("--periods", periods, "Number of periods");
  orbit->add_option("--rows", rows, "CSV rows");
  orbit->add_option("--tol", otol, "Energy drift tolerance");
  orbit->add_option("--out", out, "CSV output");

  auto* residual = app.add_subcommand("residual", "Weak-solution residuals");
  std::string mode;
  int tests = 20;
  std::string which = "gamma";
  residual->add_option("mode", mode, "static | dynamic")->required()->check(CLI::IsMember({"static", "dynamic"}));
  residual->add_option("--gamma-exp", k, "K");
  residual->add_option("--eps", eps, "Orbit parameter for dynamic");
  residual->add_option("--tests", tests, "Number of test functions");
  residual->add_option("--state", which, "gamma | kurth | control")
      ->check(CLI::IsMember({"gamma", "kurth", "control"}));
  residual->add_option("--table", table, "Cached table from build --out");
  residual->add_option("--seed", common.seed, "Seed")->each([&](const std::string&) { common.seed_set = true; });
  residual->add_option("--out", out, "JSON output");

  auto* mixc = app.add_subcommand("mix", "Convex combination of profiles");
  std::string mix_spec;
  mixc->add_option("--spec", mix_spec, "JSON file {\"components\": [{\"gamma_exp\", \"weight\"}]}")->required();
  mixc->add_option("--out", out, "JSON output");

  auto* witness = app.add_subcommand("witness", "Linear independence witness");
  std::vector<int> ks;
  witness->add_option("--gammas", ks, "K1,K2,...")->required()->delimiter(',');
  witness->add_option("--out", out, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*build) return run_build(k, out, common);
    if (*verify) {
      const QuadratureSpec spec = common.spec();
      const GammaParam g = GammaParam::from_exponent(k);
      if (suite == "funceq") return verify_funceq(g, tol > 0.0 ? tol : 1e-10);
      const ProfileTable t = load_or_build(k, table, spec);
      if (suite == "abel") return verify_abel(t, tol > 0.0 ? tol : 1e-6, spec);
      if (suite == "density") return verify_density(t, tol > 0.0 ? tol : 1e-5, spec);
      return verify_bounds(t);
    }
    if (*sweep) return run_sweep_l1(kmin, kmax, out, common);
    if (*orbit) return run_orbit(eps, periods, rows, out, otol);
    if (*residual) return run_residual(mode, k, eps, tests, which, table, out, common);
    if (*mixc) return run_mix(mix_spec, out, common);
    if (*witness) return run_witness(ks, out, common);
  } catch (const AccuracyError& e) {
    std::fprintf(stderr, "accuracy failure: %s (estimate %s)\n", e.what(), num(e.estimate()).c_str());
    return 3;
  } catch (const IterationError& e) {
    std::fprintf(stderr, "accuracy failure: %s\n", e.what());
    return 3;
  } catch (const BuildError& e) {
    std::fprintf(stderr, "check failure: %s\n", e.what());
    return 1;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ContractionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
