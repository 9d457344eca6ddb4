#include <doctest.h>

#include <cmath>

#include "fbsq/mild_solver.hpp"
#include "fbsq/operator_probes.hpp"
#include "fbsq/semigroups.hpp"
#include "oracles.hpp"

using namespace fbsq;

namespace {

// Constant-in-time trajectory.
Trajectory constant(const SpectralField& V, const SpectralField& D, const ModelParams& p,
                    const std::vector<double>& times) {
  Trajectory t = Trajectory::zeros(V.grid(), p, times);
  for (std::size_t m = 0; m < times.size(); ++m) {
    t.V[m] = V;
    t.D[m] = D;
  }
  return t;
}

SpectralField project(const SpectralField& f) {
  // f - xi (xi . f) / |xi|^2, written out per mode
  const Grid& g = f.grid();
  SpectralField out = f;
  for (std::size_t m = 1; m < g.size(); ++m) {
    const Vec3 xi = g.xi(m);
    const double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if (r2 == 0.0) continue;
    Complex dot = 0.0;
    for (int c = 0; c < 3; ++c) dot += xi[c] * f(c, m);
    for (int c = 0; c < 3; ++c) out(c, m) -= xi[c] * dot / r2;
  }
  return out;
}

// Low-mode divergence-free velocity and temperature, scaled to `size` in Z.
StateX small_state(const SolutionSpace& space, const ModelParams& p, SplitMix64& rng, double size) {
  const Grid& g = space.grid();
  StateX X(leray_project(oracle::random_field(g, Rank::vector3, rng, 1)),
           oracle::random_field(g, Rank::scalar, rng, 1), p);
  const auto times = uniform_times(0.5, 16);
  const double z = space.z_norm(free_evolution(X, times));
  X.V *= size / z;
  X.D *= size / z;
  return X;
}

}  // namespace

TEST_CASE("free evolution") {
  const Grid g = make_grid(8, 1.0);
  const ModelParams p{0.7, 1.3, 1.0, 2.0, 1.0};
  const auto times = uniform_times(0.5, 8);
  const Trajectory zero = free_evolution(StateX(g, p), times);
  for (std::size_t m = 0; m < times.size(); ++m) {
    CHECK(zero.V[m].max_abs() == 0.0);
    CHECK(zero.D[m].max_abs() == 0.0);
  }
  SplitMix64 rng(1);
  const StateX X(leray_project(oracle::random_field(g, Rank::vector3, rng, 2)),
                 oracle::random_field(g, Rank::scalar, rng, 2), p);
  const Trajectory t = free_evolution(X, times);
  for (std::size_t m = 0; m < times.size(); ++m) {
    CHECK(max_abs_diff(t.D[m], heat_apply(X.D, p.eta, times[m])) == 0.0);
    CHECK(max_abs_diff(t.V[m], stokes_coriolis_apply(X.V, p.nu, p.omega, times[m])) < 1e-15);
  }
}

TEST_CASE("data constant is stable on fresh data") {
  const Grid g = make_grid(16, 1.0);
  const SolutionSpace space(g, ZNormConfig{});
  const ModelParams p{0.5, 2.0, 1.0, 0.0, 1.0};
  const auto times = uniform_times(0.5, 16);
  const double C0 = estimate_data_constant(space, p, times, {64, 5});
  SplitMix64 rng(99);
  for (int i = 0; i < 20; ++i) {
    const StateX X = random_initial_state(space, p, rng);
    const double w = space.velocity_data_norm(X.V) / p.nu + space.temperature_data_norm(X.D) / p.eta;
    CHECK(space.z_norm(free_evolution(X, times)) <= C0 * w * (1 + 1e-12));
  }
}

TEST_CASE("linear operator") {
  const Grid g = make_grid(8, 1.0);
  const auto times = uniform_times(0.5, 64);

  SUBCASE("no temperature, no forcing") {
    const ModelParams p{1.0, 1.0, 1.0, 1.0, 1.0};
    SplitMix64 rng(2);
    const SpectralField V = leray_project(oracle::random_field(g, Rank::vector3, rng, 2));
    for (const auto& v : linear_L1(constant(V, SpectralField(g, Rank::scalar), p, times))) CHECK(v.max_abs() == 0.0);
  }
  SUBCASE("single mode against the closed form") {
    const ModelParams p{0.8, 1.7, 1.5, 0.0, 0.6};
    const IntVec3 k{1, 0, 1};
    const Complex d0{0.4, -0.3};
    const StateX X(SpectralField(g, Rank::vector3), oracle::single_mode(g, k, {d0}), p);
    const auto L1 = linear_L1(free_evolution(X, times));
    const std::size_t m = g.flat_of_wavevector(k);
    const double r2 = 2.0;
    // P e3 at xi = (1, 0, 1): (-1/2, 0, 1/2)
    const Vec3 pe3{-0.5, 0.0, 0.5};
    double worst = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double t = times[i];
      const double shape = (std::exp(-p.eta * r2 * t) - std::exp(-p.nu * r2 * t)) / ((p.nu - p.eta) * r2);
      for (int c = 0; c < 3; ++c) {
        const Complex exact = p.lambda * p.g * pe3[c] * d0 * shape;
        if (std::abs(exact) > 0) worst = std::max(worst, std::abs(L1[i](c, m) - exact) / std::abs(exact));
      }
    }
    CHECK(worst < 0.02);
  }
  SUBCASE("L has no temperature part") {
    const ModelParams p{1.0, 1.0, 1.0, 0.0, 1.0};
    SplitMix64 rng(3);
    const Trajectory X = constant(leray_project(oracle::random_field(g, Rank::vector3, rng, 2)),
                                  oracle::random_field(g, Rank::scalar, rng, 2), p, times);
    const Trajectory LX = linear_L(X);
    for (const auto& d : LX.D) CHECK(d.max_abs() == 0.0);
    CHECK(max_divergence(LX) < 1e-12);
  }
  CHECK_THROWS(linear_L1(Trajectory{}));
}

TEST_CASE("bilinear operator") {
  const Grid g = make_grid(8, 1.0);
  const auto times = uniform_times(0.5, 16);
  const ModelParams p{0.9, 1.4, 1.0, 0.0, 0.7};
  // two divergence-free modes, so that V . grad V does not vanish
  const SpectralField V = project(oracle::single_mode(g, {1, 0, 0}, {{0.0, 0.0}, {0.3, 0.1}, {0.5, 0.0}}) +
                                  oracle::single_mode(g, {0, 1, 1}, {{0.4, -0.2}, {0.2, 0.0}, {-0.2, 0.0}}));
  const SpectralField D = oracle::single_mode(g, {1, 1, 0}, {{0.6, 0.2}});
  const SpectralField none_v(g, Rank::vector3);
  const SpectralField none_d(g, Rank::scalar);

  SUBCASE("zero arguments") {
    const Trajectory X = constant(V, D, p, times);
    const Trajectory Z = constant(none_v, none_d, p, times);
    for (const auto& f : bilinear_B1(X, Z)) CHECK(f.max_abs() == 0.0);
    for (const auto& f : bilinear_B1(Z, X)) CHECK(f.max_abs() == 0.0);
    for (const auto& f : bilinear_B2(Z, constant(none_v, D, p, times))) CHECK(f.max_abs() == 0.0);
  }
  SUBCASE("B1 on constant data equals the exact convolution integral") {
    const Trajectory X = constant(V, none_d, p, times);
    const auto B1 = bilinear_B1(X, X);
    const SpectralField forcing = project(oracle::dense_div_tensor(V, V));  // P div(V (x) V)
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::size_t m = 1; m < g.size(); ++m) {
        const double mu = p.nu * g.xi_norm(m) * g.xi_norm(m);
        const double w = (1.0 - std::exp(-mu * times[i])) / mu;
        for (int c = 0; c < 3; ++c) {
          const Complex exact = -p.lambda * w * forcing(c, m);
          worst = std::max(worst, std::abs(B1[i](c, m) - exact));
          scale = std::max(scale, std::abs(exact));
        }
      }
    }
    REQUIRE(scale > 0.0);
    CHECK(worst / scale < 1e-12);
  }
  SUBCASE("B2 with a decaying temperature mode") {
    const auto fine = uniform_times(0.5, 64);
    Trajectory X = constant(V, none_d, p, fine);
    Trajectory Y = free_evolution(StateX(none_v, D, p), fine);
    const auto B2 = bilinear_B2(X, Y);
    const SpectralField prod = oracle::dense_div_tensor(D, V);  // div(V D) at t = 0
    const double kappa = p.eta * 2.0;  // |xi_D|^2 = 2
    double worst = 0.0;
    for (std::size_t i = 1; i < fine.size(); ++i) {
      for (std::size_t m = 1; m < g.size(); ++m) {
        if (std::abs(prod(0, m)) == 0.0) continue;
        const double mu = p.eta * g.xi_norm(m) * g.xi_norm(m);
        const Complex exact = -0.5 * p.lambda * oracle::exp_convolution(mu, kappa, fine[i]) * prod(0, m);
        worst = std::max(worst, std::abs(B2[i](0, m) - exact) / std::abs(exact));
      }
    }
    CHECK(worst < 0.02);
  }
  SUBCASE("symmetry and polarization") {
    SplitMix64 rng(5);
    const SolutionSpace space(g, ZNormConfig{});
    const Trajectory X = random_probe(space, p, times, rng, ProbeContent::both);
    const Trajectory Y = random_probe(space, p, times, rng, ProbeContent::both);
    const Trajectory bxy = bilinear_B(X, Y), byx = bilinear_B(Y, X);
    CHECK(space.z_distance(bxy, byx) < 1e-14);
    const Trajectory s = X + Y;
    const Trajectory lhs = bilinear_B(s, s);
    const Trajectory rhs = bilinear_B(X, X) + 2.0 * bxy + bilinear_B(Y, Y);
    CHECK(space.z_distance(lhs, rhs) < 1e-12 * (1 + space.z_norm(lhs)));
    CHECK(max_divergence(bxy) < 1e-12);
  }
  SUBCASE("B scales with lambda") {
    SplitMix64 rng(6);
    const SolutionSpace space(g, ZNormConfig{});
    const Trajectory X = random_probe(space, p, times, rng, ProbeContent::both);
    Trajectory X2 = X;
    X2.params.lambda = 3.0 * p.lambda;
    CHECK(space.z_distance(bilinear_B(X2, X2), 3.0 * bilinear_B(X, X)) < 1e-13);
  }
}

TEST_CASE("fixed_point_check") {
  const FixedPointReport a = fixed_point_check(0.5, 1.0, 0.05);
  CHECK(a.admissible);
  CHECK(a.ball_radius == doctest::Approx(0.25));
  CHECK_FALSE(fixed_point_check(0.5, 1.0, 0.0625).admissible);
  CHECK_FALSE(fixed_point_check(1.0, 1.0, 0.0).admissible);
  const FixedPointReport free = fixed_point_check(0.3, 0.0, 100.0);
  CHECK(free.admissible);
  CHECK(std::isinf(free.ball_radius));
  CHECK_THROWS(fixed_point_check(-0.1, 1.0, 0.0));

  SplitMix64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const double l = rng.uniform(0.0, 0.95);
    const double b = rng.uniform(0.01, 10.0);
    const double x0 = rng.uniform(0.0, 0.999) * (1 - l) * (1 - l) / (4 * b);
    const FixedPointReport r = fixed_point_check(l, b, x0);
    REQUIRE(r.admissible);
    const double x = oracle::quadratic_fixed_point(x0, l, b);
    CHECK(std::abs(x - (x0 + l * x + b * x * x)) < 1e-12);
    CHECK(x <= r.ball_radius);
  }
}

TEST_CASE("Picard iteration") {
  const Grid g = make_grid(8, 1.0);
  const SolutionSpace space(g, ZNormConfig{});

  SUBCASE("zero data") {
    PicardOptions opt;
    opt.norms = OperatorNorms{0.5, 1.0};
    const PicardResult r = picard_solve(StateX(g, {1, 1, 5, 1, 1}), 0.5, 8, opt);
    CHECK(r.status == PicardStatus::converged);
    CHECK(r.iterations == 1);
    CHECK(space.z_norm(r.solution) == 0.0);
  }
  SUBCASE("linear part only: two iterations and the closed form") {
    const ModelParams p{1.2, 0.6, 2.0, 0.0, 0.3};
    const IntVec3 k{0, 1, 1};
    const Complex d0{0.0, 0.5};
    PicardOptions opt;
    opt.include_bilinear = false;
    opt.norms = OperatorNorms{0.1, 0.0};
    const auto M = 64;
    const PicardResult r = picard_solve(StateX(SpectralField(g, Rank::vector3), oracle::single_mode(g, k, {d0}), p), 0.5, M, opt);
    CHECK(r.status == PicardStatus::converged);
    CHECK(r.iterations == 2);
    const std::size_t m = g.flat_of_wavevector(k);
    const Vec3 pe3{0.0, -0.5, 0.5};
    const double t = 0.5, r2 = 2.0;
    const double shape = (std::exp(-p.eta * r2 * t) - std::exp(-p.nu * r2 * t)) / ((p.nu - p.eta) * r2);
    for (int c = 1; c < 3; ++c) {
      const Complex exact = p.lambda * p.g * pe3[c] * d0 * shape;
      CHECK(std::abs(r.solution.V.back()(c, m) - exact) < 0.02 * std::abs(exact));
    }
  }
  SUBCASE("small data: contraction, certificate, divergence") {
    const ModelParams p{1.0, 1.0, 1.0, 1.0, 0.3};
    const auto times = uniform_times(0.5, 16);
    const double L = estimate_L_norm(space, p, times, {32, 3});
    const double B = estimate_B_norms(space, p, times, {32, 4}).B;
    REQUIRE(L < 1.0);
    SplitMix64 rng(12);
    const StateX X0 = small_state(space, p, rng, 0.3 * (1 - L) * (1 - L) / (4 * B));
    PicardOptions opt;
    opt.norms = OperatorNorms{L, B};
    opt.tol = 1e-11;
    const PicardResult r = picard_solve(X0, 0.5, 16, opt);
    CHECK(r.status == PicardStatus::converged);
    CHECK(r.report.admissible);
    CHECK(r.stayed_in_ball);
    CHECK(r.iterations > 2);
    CHECK(r.residual < 10 * opt.tol);
    CHECK(max_divergence(r.solution) < 1e-10);
    for (std::size_t n = 0; n + 1 < r.distances.size(); ++n) {
      if (r.distances[n] < 1e-13) break;
      const double ceiling = L + 2 * B * std::max(r.iterate_norms[n + 1], r.iterate_norms[n]) + 0.05;
      CHECK(r.distances[n + 1] / r.distances[n] <= ceiling);
    }
  }
  SUBCASE("iteration count does not depend on the rotation") {
    std::vector<int> counts;
    for (double omega : {0.0, 1.0, 100.0}) {
      const ModelParams p{1.0, 1.0, 1.0, omega, 0.3};
      SplitMix64 rng(12);
      const StateX X0 = small_state(space, p, rng, 0.01);
      PicardOptions opt;
      opt.norms = OperatorNorms{0.4, 0.7};
      counts.push_back(picard_solve(X0, 0.5, 16, opt).iterations);
    }
    CHECK(std::abs(counts[0] - counts[1]) <= 1);
    CHECK(std::abs(counts[0] - counts[2]) <= 1);
  }
  SUBCASE("large data diverge and are reported, not thrown") {
    const ModelParams p{1.0, 1.0, 1.0, 0.0, 1.0};
    SplitMix64 rng(13);
    const StateX X0 = small_state(space, p, rng, 50.0);
    PicardOptions opt;
    opt.norms = OperatorNorms{0.4, 0.7};
    const PicardResult r = picard_solve(X0, 0.5, 16, opt);
    CHECK(r.status != PicardStatus::converged);
    CHECK_FALSE(r.report.admissible);
    CHECK_FALSE(r.distances.empty());
  }
}

TEST_CASE("ETD march") {
  const Grid g = make_grid(8, 1.0);
  const SolutionSpace space(g, ZNormConfig{});

  SUBCASE("zero data") {
    const Trajectory t = etd_march(StateX(g, {1, 1, 1, 1, 1}), 0.5, 8);
    CHECK(space.z_norm(t) == 0.0);
  }
  SUBCASE("pure diffusion is exact") {
    const ModelParams p{0.7, 1.3, 0.0, 3.0, 1.0};
    SplitMix64 rng(14);
    const StateX X0(leray_project(oracle::random_field(g, Rank::vector3, rng, 2)),
                    oracle::random_field(g, Rank::scalar, rng, 2), p);
    EtdOptions opt;
    opt.include_bilinear = false;
    const Trajectory t = etd_march(X0, 0.5, 8, opt);
    const Trajectory exact = free_evolution(X0, t.times);
    for (std::size_t m = 0; m < t.size(); ++m) {
      CHECK(max_abs_diff(t.V[m], exact.V[m]) < 1e-12);
      CHECK(max_abs_diff(t.D[m], exact.D[m]) < 1e-12);
    }
  }
  SUBCASE("agrees with Picard at first order") {
    const ModelParams p{1.0, 1.0, 1.0, 1.0, 0.3};
    SplitMix64 rng(15);
    const StateX X0 = small_state(space, p, rng, 0.05);
    std::vector<double> errs;
    for (int M : {16, 32, 64}) {
      PicardOptions opt;
      opt.norms = OperatorNorms{0.4, 0.7};
      opt.tol = 1e-12;
      const Trajectory pic = picard_solve(X0, 0.5, M, opt).solution;
      EtdOptions e;
      e.substeps = 16;  // fine reference
      const Trajectory ref = etd_march(X0, 0.5, M, e);
      errs.push_back(space.z_distance(pic, ref) / space.z_norm(ref));
    }
    CHECK(errs[2] < 0.05);
    CHECK(std::log2(errs[1] / errs[2]) >= 0.9);
  }
  SUBCASE("unstable steps are rejected") {
    const ModelParams p{0.01, 0.01, 1.0, 0.0, 1.0};
    SplitMix64 rng(16);
    const StateX X0 = small_state(space, p, rng, 1e6);
    EtdOptions opt;
    opt.safety = 1e-3;
    CHECK_THROWS_AS(etd_march(X0, 0.5, 2, opt), StepRejected);
  }
}
