#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "fbsq/operator_probes.hpp"
#include "fbsq/wellposedness_gate.hpp"
#include "oracles.hpp"

using namespace fbsq;

namespace {

ConstantSet nominal() {
  ConstantSet c;
  c.C_L = 0.9;
  c.C_B = 0.6;
  c.C0 = 2.0;
  return c;
}

struct Case {
  double nu, eta;
  const char* label;
  double u, theta;  // bounds in units of C1 and C2
};

// One hand-picked point per case and subcase.
std::vector<Case> regime_table() {
  const double n = 0.5, N = 2.0;
  return {
      {1.0, 1.0, "a1", 1.0, 1.0},
      {1.0, 0.5, "a2", 0.5, 0.25},
      {1.0, 3.0, "a3", 1.0, 3.0},
      {n, 1.0, "b1", n * n, n * n},
      {n, 0.3, "b2", 0.3 * 0.3, 0.3 * 0.3 * 0.3},
      {n, 1.5, "b3", n * n, 1.5 * n * n},
      {n, 1 / n, "b3.i", n * n, n},
      {n, 1 / (n * n), "b3.ii", n * n, 1.0},
      {n, 1 / (n * n * n), "b3.iii", n * n, 1 / n},
      {N, 1.0, "c1", N, N},
      {N, 0.7, "c2", N * 0.7, N * 0.7 * 0.7},
      {N, 1 / N, "c2.i", 1.0, 1 / N},
      {4.0, 0.5, "c2.ii", 2.0, 1.0},
      {8.0, 0.5, "c2.iii", 4.0, 2.0},
      {N, 3.0, "c3", N, N * 3.0},
  };
}

}  // namespace

TEST_CASE("derived constants") {
  const ConstantSet c = nominal();
  CHECK(c.C() == doctest::Approx(0.9 / (16 * 0.6)));
  CHECK(c.C1() == doctest::Approx(c.C() / (4 * 2.0 * 0.9)));
  CHECK(c.C2() == doctest::Approx(c.C() / (8 * 2.0 * 0.81)));
  ConstantSet bad = c;
  bad.C_B = 0.0;
  CHECK_THROWS(bad.validate());
  ConstantSet flat = c;
  flat.g = 0.0;
  CHECK(std::isinf(flat.C2()));
  CHECK(std::isfinite(flat.C1()));
}

TEST_CASE("lambda0 and epsilon0") {
  ConstantSet c = nominal();
  c.C_L = 1.0;
  CHECK(lambda0(c, 2.0, 1.0) == 1.0);
  CHECK(lambda0(c, 4.0, 1.0) == 2.0 * lambda0(c, 2.0, 1.0));
  CHECK(lambda0(c, 2.0, -1.0) == 1.0);
  CHECK(std::isinf(lambda0(c, 2.0, 0.0)));
  CHECK_THROWS(lambda0(c, 0.0, 1.0));

  CHECK(epsilon0(c, 1.0, 1.0) == doctest::Approx(c.C()));
  CHECK(epsilon0(c, 1.0, 0.25) == doctest::Approx(0.25 * c.C()));
  CHECK(epsilon0(c, 2.0, 3.0) == doctest::Approx(c.C() / 2.0));

  // Evaluating the contraction-lemma expression at lambda0 gives exactly twice
  // C min(1, nu, eta) / nu; the gate uses the smaller, conservative value.
  SplitMix64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const double nu = std::exp(rng.uniform(-2.0, 2.0)), eta = std::exp(rng.uniform(-2.0, 2.0));
    CHECK(epsilon0_lemma_form(c, nu, eta) == doctest::Approx(2.0 * epsilon0(c, nu, eta)).epsilon(1e-12));
  }
}

TEST_CASE("gate_rescaled") {
  const ConstantSet c = nominal();
  CHECK(gate_rescaled(0.0, 0.0, 1.0, 1.0, c).admissible);
  const GateReport r = gate_rescaled(0.0, 0.0, 1.0, 1.0, c);
  CHECK(r.threshold == doctest::Approx(epsilon0(c, 1.0, 1.0) / c.C0));
  // lhs exactly at the threshold fails the strict inequality
  const double t = epsilon0(c, 1.0, 1.0) / c.C0;
  CHECK_FALSE(gate_rescaled(t, 0.0, 1.0, 1.0, c).admissible);
  CHECK(gate_rescaled(0.999 * t, 0.0, 1.0, 1.0, c).admissible);
  CHECK_FALSE(gate_rescaled(0.0, t, 1.0, 1.0, c).admissible);
}

TEST_CASE("gate_original") {
  const ConstantSet c = nominal();
  SplitMix64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const double nu = std::exp(rng.uniform(-2, 2)), eta = std::exp(rng.uniform(-2, 2));
    const double l0 = lambda0(c, nu, c.g);
    const double lambda = rng.uniform(0.01, 1.0) * l0;
    const double u = rng.uniform(0, 0.02), th = rng.uniform(0, 0.02);
    const GateReport o = gate_original(u, th, nu, eta, lambda, c);
    const GateReport s = gate_rescaled(u / lambda, th / (lambda * lambda), nu, eta, c);
    CHECK(o.admissible == s.admissible);
    CHECK(o.lhs == s.lhs);
    CHECK(o.threshold == s.threshold);
    CHECK_FALSE(o.lambda_exceeds_lambda0);

    // (u, th, lambda) -> (c u, c^2 th, c lambda) leaves the verdict alone
    const double k = rng.uniform(0.05, l0 / lambda);
    CHECK(gate_original(k * u, k * k * th, nu, eta, k * lambda, c).admissible == o.admissible);

    // more data never helps
    if (!o.admissible) CHECK_FALSE(gate_original(u * 1.5, th, nu, eta, lambda, c).admissible);
    if (!o.admissible) CHECK_FALSE(gate_original(u, th * 1.5, nu, eta, lambda, c).admissible);
  }

  const double l0 = lambda0(c, 1.0, 1.0);
  const GateReport over = gate_original(0.0, 0.0, 1.0, 1.0, 1.5 * l0, c);
  CHECK(over.lambda_exceeds_lambda0);
  CHECK_FALSE(over.admissible);
  CHECK_FALSE(over.warnings.empty());

  // at lambda0 with nu = eta = 1: velocity up to C1, temperature up to C2
  CHECK(gate_original(0.99 * c.C1(), 0.0, 1.0, 1.0, l0, c).admissible);
  CHECK(gate_original(0.0, 0.99 * c.C2(), 1.0, 1.0, l0, c).admissible);
  CHECK(gate_original(0.49 * c.C1(), 0.49 * c.C2(), 1.0, 1.0, l0, c).admissible);
  // temperature bound scales like nu eta min(1, nu, eta)
  for (const auto& [nu, eta] : std::vector<std::pair<double, double>>{{0.5, 2.0}, {3.0, 0.4}, {2.0, 5.0}}) {
    const double bound = c.C2() * nu * eta * std::min({1.0, nu, eta});
    const double l = lambda0(c, nu, 1.0);
    CHECK(gate_original(0.0, 0.99 * 2.0 * bound, nu, eta, l, c).admissible);
    CHECK_FALSE(gate_original(0.0, 1.01 * 2.0 * bound, nu, eta, l, c).admissible);
  }
}

TEST_CASE("rescale round trip") {
  const Grid g = make_grid(8, 1.0);
  SplitMix64 rng(7);
  const SpectralField u = leray_project(oracle::random_field(g, Rank::vector3, rng, 2));
  const SpectralField th = oracle::random_field(g, Rank::scalar, rng, 2);
  const StateX one = rescale(u, th, 1.0);
  CHECK(max_abs_diff(one.V, u) == 0.0);
  CHECK(max_abs_diff(one.D, th) == 0.0);
  for (double lambda : {0.1, 0.37, 2.5}) {
    const StateX X = rescale(u, th, lambda);
    CHECK(X.params.lambda == lambda);
    const auto [u2, th2] = unrescale(X);
    CHECK(max_abs_diff(u2, u) < 1e-15);
    CHECK(max_abs_diff(th2, th) < 1e-15);
  }
  CHECK_THROWS(rescale(u, th, 0.0));
  CHECK_THROWS(rescale(u, th, -1.0));
}

TEST_CASE("regime classification") {
  const ConstantSet c = nominal();
  const double C1 = c.C1(), C2 = c.C2();
  for (const Case& k : regime_table()) {
    CAPTURE(k.label);
    const RegimeReport r = classify_regime(k.nu, k.eta, c);
    CHECK(r.label == k.label);
    CHECK(r.u_bound == doctest::Approx(k.u * C1).epsilon(1e-12));
    CHECK(r.theta_bound == doctest::Approx(k.theta * C2).epsilon(1e-12));
    CHECK_FALSE(r.tag.empty());
  }
  CHECK(classify_regime(0.5, 8.0, c).top_level == "b3");

  SplitMix64 rng(9);
  std::map<std::string, int> seen;
  for (int i = 0; i < 10000; ++i) {
    const double nu = std::exp(rng.uniform(-3, 3)), eta = std::exp(rng.uniform(-3, 3));
    const RegimeReport r = classify_regime(nu, eta, c);
    // top-level cases are decided by the signs of log nu and log eta alone
    const int sn = nu < 1 ? 0 : (nu > 1 ? 2 : 1);
    const int se = eta < 1 ? 0 : (eta > 1 ? 2 : 1);
    const char* expect[3][3] = {{"b2", "b1", "b3"}, {"a2", "a1", "a3"}, {"c2", "c1", "c3"}};
    CHECK(r.top_level == expect[sn][se]);
    ++seen[r.top_level];

    // the emitted bounds pass the gate at lambda0
    const double l0 = lambda0(c, nu, c.g);
    CHECK(gate_original(0.99 * r.u_bound, 0.0, nu, eta, l0, c).admissible);
    CHECK(gate_original(0.0, 0.99 * r.theta_bound, nu, eta, l0, c).admissible);
  }
  CHECK(seen.size() == 4);  // equality cases have measure zero
  CHECK_THROWS(classify_regime(0.0, 1.0, c));
}

TEST_CASE("calibration") {
  const Grid g = make_grid(8, 1.0);
  CalibrationOptions opt;
  opt.steps = 8;
  ParamSweep sweep;
  CHECK_THROWS(calibrate_constants(g, 16, 1, sweep, opt));
  ParamSweep single;
  single.nu = {1.0};
  single.eta = {1.0};
  CHECK_THROWS(calibrate_constants(g, 32, 1, single, opt));

  const Calibration a = calibrate_constants(g, 32, 4, sweep, opt);
  const Calibration b = calibrate_constants(g, 32, 4, sweep, opt);
  CHECK(a.constants.C_L == b.constants.C_L);
  CHECK(a.constants.C_B == b.constants.C_B);
  CHECK(a.constants.C0 == b.constants.C0);
  CHECK(a.points.size() == 4);
  CHECK(a.constants.meta.sweep.size() == 4);

  SUBCASE("linear constant scales out lambda, g and nu") {
    // same probes everywhere, so only the operator changes
    const Grid g16 = make_grid(16, 1.0);
    const SolutionSpace space(g16, ZNormConfig{});
    const auto times = uniform_times(opt.T, opt.steps);
    ProbeOptions po;
    po.samples = 32;
    po.seed = 6;
    double lo = 1e300, hi = 0;
    for (double nu : {0.5, 2.0}) {
      ModelParams base;
      base.nu = nu;
      base.eta = 1.0;
      base.lambda = 1.0;
      base.g = 1.0;
      const double ref = estimate_L_norm(space, base, times, po);
      for (double lambda : {0.5, 1.0}) {
        for (double gg : {1.0, -2.0}) {
          ModelParams p = base;
          p.lambda = lambda;
          p.g = gg;
          const double L = estimate_L_norm(space, p, times, po);
          CHECK(L == doctest::Approx(ref * lambda * std::abs(gg)).epsilon(1e-12));
          lo = std::min(lo, L * nu / (lambda * std::abs(gg)));
          hi = std::max(hi, L * nu / (lambda * std::abs(gg)));
        }
      }
    }
    CHECK(hi / lo < 1.05);
  }
  SUBCASE("lambda0 keeps the probed |L| below one half") {
    SplitMix64 rng(8);
    const SolutionSpace space(g, ZNormConfig{});
    const auto times = uniform_times(opt.T, opt.steps);
    for (int i = 0; i < 10; ++i) {
      ModelParams p;
      p.nu = std::exp(rng.uniform(-1, 1));
      p.eta = std::exp(rng.uniform(-1, 1));
      p.g = rng.uniform(0.5, 2);
      p.omega = rng.uniform(-10, 10);
      p.lambda = lambda0(a.constants, p.nu, p.g);
      CHECK(estimate_L_norm(space, p, times, {32, rng.next()}) < 0.55);
    }
  }
}

TEST_CASE("constants cache") {
  ConstantSet c = nominal();
  c.meta.n = 16;
  c.meta.seed = 42;
  c.meta.sweep = {"0.5:0.5:1:1:0", "2:2:1:1:0"};
  const auto path = std::filesystem::temp_directory_path() / "fbsq_test_constants.cache";
  write_constants_cache(path, c);
  const ConstantSet r = read_constants_cache(path);
  std::filesystem::remove(path);
  CHECK(r.C_L == c.C_L);
  CHECK(r.C_B == c.C_B);
  CHECK(r.C0 == c.C0);
  CHECK(r.meta.seed == 42);
  CHECK(r.meta.sweep == c.meta.sweep);

  CHECK(cache_incompatibilities(r, make_grid(16, 1.0), ZNormConfig{}).empty());
  CHECK_FALSE(cache_incompatibilities(r, make_grid(8, 1.0), ZNormConfig{}).empty());
  CHECK_FALSE(cache_incompatibilities(r, make_grid(16, 2.0), ZNormConfig{}).empty());
  ZNormConfig other;
  other.p = 6.0;
  CHECK_FALSE(cache_incompatibilities(r, make_grid(16, 1.0), other).empty());
  other = ZNormConfig{};
  other.intersection = IntersectionNorm::sum;
  CHECK_FALSE(cache_incompatibilities(r, make_grid(16, 1.0), other).empty());

  CHECK_THROWS(read_constants_cache(std::filesystem::temp_directory_path() / "fbsq_no_such.cache"));
}
