#include "fbsq/operator_probes.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fbsq {
namespace {

// Retained modes grouped by their dominant shell; one representative per
// Hermitian pair.
struct ModeCatalog {
  int j_min = 0;
  std::vector<std::vector<IntVec3>> all;
  std::vector<std::vector<IntVec3>> horizontal;
  std::vector<int> usable;  // shell offsets holding at least two modes
};

bool representative(const IntVec3& k) {
  if (k[0] != 0) return k[0] > 0;
  if (k[1] != 0) return k[1] > 0;
  return k[2] > 0;
}

ModeCatalog build_catalog(const Grid& grid, const DyadicPartition& partition) {
  ModeCatalog cat;
  cat.j_min = partition.j_min();
  const int shells = partition.shell_count();
  cat.all.resize(shells);
  cat.horizontal.resize(shells);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (!grid.retained(m)) continue;
    const double r = grid.xi_norm(m);
    if (r == 0.0) continue;
    const IntVec3 k = grid.wavevector(m);
    if (!representative(k)) continue;
    int best = -1;
    double weight = 0.0;
    for (int j = partition.j_min(); j <= partition.j_max(); ++j) {
      const double w = partition.phi(j, r);
      if (w > weight) {
        weight = w;
        best = j - partition.j_min();
      }
    }
    if (best < 0) continue;
    cat.all[best].push_back(k);
    if (k[2] == 0) cat.horizontal[best].push_back(k);
  }
  for (int i = 0; i < shells; ++i) {
    if (cat.all[i].size() >= 2) cat.usable.push_back(i);
  }
  if (cat.usable.empty()) throw std::invalid_argument("probe: grid has no usable shells");
  return cat;
}

int usable_shell(const ModeCatalog& cat, int stratum) {
  return cat.usable[static_cast<std::size_t>(stratum) % cat.usable.size()];
}

Complex unit_phase(SplitMix64& rng) {
  const double a = 2.0 * std::acos(-1.0) * rng.uniform();
  return {std::cos(a), std::sin(a)};
}

// One to three modes of shell `i` with unit coefficient modulus and random
// phase/polarization. Half the draws use horizontal modes (xi_3 = 0).
SpectralField random_pattern(const Grid& grid, const ModeCatalog& cat, SplitMix64& rng, Rank rank,
                             int i) {
  const bool horizontal = rng.uniform() < 0.5 && cat.horizontal[i].size() >= 2;
  const auto& pool = horizontal ? cat.horizontal[i] : cat.all[i];
  for (int attempt = 0; attempt < 32; ++attempt) {
    SpectralField f(grid, rank);
    const int count = rng.uniform_int(1, 3);
    for (int n = 0; n < count; ++n) {
      const IntVec3& k = pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];
      if (rank == Rank::scalar) {
        f.set_hermitian_mode(k, 0, unit_phase(rng));
        continue;
      }
      // random polarization orthogonal to k, unit length
      SpectralField one(grid, Rank::vector3);
      for (int c = 0; c < 3; ++c) one.set_hermitian_mode(k, c, {rng.normal(), rng.normal()});
      one = leray_project(one);
      const double mod = one.modulus(grid.flat_of_wavevector(k));
      if (mod == 0.0) continue;
      f.add_scaled(one, 1.0 / mod);
    }
    if (f.max_abs() > 0.0) return f;
  }
  throw std::runtime_error("probe: failed to draw a nonzero pattern");
}

enum class Profile { constant, window, decay, semigroup, burst, ramp };
constexpr int kProfiles = 6;

std::vector<double> time_profile(std::span<const double> times, SplitMix64& rng, Profile kind,
                                 double rate) {
  const std::size_t count = times.size();
  const double T = times.back();
  const int M = static_cast<int>(count) - 1;
  std::vector<double> h(count, 0.0);
  switch (kind) {
    case Profile::constant:
      std::fill(h.begin(), h.end(), 1.0);
      break;
    case Profile::window: {
      const int last = rng.uniform_int(1, std::max(1, M - 1));
      for (int m = 0; m <= last; ++m) h[m] = 1.0;
      break;
    }
    case Profile::decay: {
      const double c = std::exp(rng.uniform(std::log(0.5), std::log(50.0)));
      for (std::size_t m = 0; m < count; ++m) h[m] = std::exp(-c * times[m] / T);
      break;
    }
    case Profile::semigroup: {
      const double mu = rate * std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
      for (std::size_t m = 0; m < count; ++m) h[m] = std::exp(-mu * times[m]);
      break;
    }
    case Profile::burst:
      h[M > 1 ? rng.uniform_int(1, M - 1) : 0] = 1.0;
      break;
    case Profile::ramp:
      for (std::size_t m = 0; m < count; ++m) h[m] = times[m] / T;
      break;
  }
  return h;
}

// diffusivity * |xi|^2 at the centre of shell offset i
double shell_rate(const ModeCatalog& cat, int i, double diffusivity) {
  const double r = 1.5 * std::ldexp(1.0, cat.j_min + i);
  return diffusivity * r * r;
}

struct ProbeDraw {
  ProbeContent content;
  int shell;
  Profile profile;
};

// Separable probe: V(t) = hv(t) v, D(t) = hd(t) d, rescaled to unit Z-norm on build.
struct ProbeShape {
  int shell;
  SpectralField v;
  SpectralField d;
  std::vector<double> hv;
  std::vector<double> hd;
};

ProbeShape draw_shape(const Grid& grid, const ModeCatalog& cat, const ModelParams& params,
                      std::span<const double> times, SplitMix64& rng, const ProbeDraw& draw) {
  ProbeShape shape{draw.shell, SpectralField(grid, Rank::vector3),
                   SpectralField(grid, Rank::scalar), std::vector<double>(times.size(), 0.0),
                   std::vector<double>(times.size(), 0.0)};
  if (draw.content != ProbeContent::temperature) {
    shape.v = random_pattern(grid, cat, rng, Rank::vector3, draw.shell);
    shape.hv = time_profile(times, rng, draw.profile, shell_rate(cat, draw.shell, params.nu));
  }
  if (draw.content != ProbeContent::velocity) {
    shape.d = random_pattern(grid, cat, rng, Rank::scalar, draw.shell);
    shape.hd = time_profile(times, rng, draw.profile, shell_rate(cat, draw.shell, params.eta));
    if (draw.content == ProbeContent::both) shape.d *= rng.uniform(0.1, 1.0);
  }
  return shape;
}

// Random coefficient noise of relative size `sigma` on the existing support;
// with probability 1/4 a fresh mode of the shell is mixed in as well.
SpectralField jitter(const SpectralField& f, const ModeCatalog& cat, SplitMix64& rng, int shell,
                     double sigma) {
  const Grid& grid = f.grid();
  const double scale = sigma * f.max_abs();
  SpectralField out = f;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (f.modulus(m) == 0.0) continue;
    const IntVec3 k = grid.wavevector(m);
    if (!representative(k)) continue;
    for (int c = 0; c < f.components(); ++c) {
      out.set_hermitian_mode(k, c, out(c, m) + scale * Complex(rng.normal(), rng.normal()));
    }
  }
  if (rng.uniform() < 0.25) out.add_scaled(random_pattern(grid, cat, rng, f.rank(), shell), scale);
  if (out.rank() == Rank::vector3) out = leray_project(out);
  return out;
}

ProbeShape perturb(const ProbeShape& s, const ModeCatalog& cat, SplitMix64& rng, double sigma) {
  ProbeShape out = s;
  if (s.v.max_abs() > 0.0) out.v = jitter(s.v, cat, rng, s.shell, sigma);
  if (s.d.max_abs() > 0.0) out.d = jitter(s.d, cat, rng, s.shell, sigma);
  return out;
}

Trajectory build_probe(const SolutionSpace& space, const ModelParams& params,
                       std::span<const double> times, const ProbeShape& shape) {
  Trajectory x = Trajectory::zeros(space.grid(), params, {times.begin(), times.end()});
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (shape.hv[m] != 0.0) x.V[m] = shape.hv[m] * shape.v;
    if (shape.hd[m] != 0.0) x.D[m] = shape.hd[m] * shape.d;
  }
  const double norm = space.z_norm(x);
  if (!(norm > 0.0)) throw std::runtime_error("probe: zero trajectory");
  x *= 1.0 / norm;
  return x;
}

Trajectory draw_probe(const SolutionSpace& space, const ModeCatalog& cat, const ModelParams& params,
                      std::span<const double> times, SplitMix64& rng, const ProbeDraw& draw) {
  return build_probe(space, params, times, draw_shape(space.grid(), cat, params, times, rng, draw));
}

void require_probe_inputs(std::span<const double> times, const ProbeOptions& options) {
  if (times.size() < 2) throw std::invalid_argument("probe: need at least two sample times");
  if (options.samples < 1) throw std::invalid_argument("probe: samples must be >= 1");
}

}  // namespace

Trajectory random_probe(const SolutionSpace& space, const ModelParams& params,
                        std::span<const double> times, SplitMix64& rng, ProbeContent content) {
  const ModeCatalog cat = build_catalog(space.grid(), space.partition());
  const ProbeDraw draw{content, usable_shell(cat, rng.uniform_int(0, 1 << 20)),
                       static_cast<Profile>(rng.uniform_int(0, kProfiles - 1))};
  return draw_probe(space, cat, params, times, rng, draw);
}

StateX random_initial_state(const SolutionSpace& space, const ModelParams& params,
                            SplitMix64& rng) {
  const ModeCatalog cat = build_catalog(space.grid(), space.partition());
  const Grid& grid = space.grid();
  StateX x(grid, params);
  const int kind = rng.uniform_int(0, 2);  // velocity only, temperature only, both
  const int shell = usable_shell(cat, rng.uniform_int(0, 1 << 20));
  if (kind != 1) {
    x.V = random_pattern(grid, cat, rng, Rank::vector3, shell);
    x.V *= 1.0 / space.velocity_data_norm(x.V);
  }
  if (kind != 0) {
    x.D = random_pattern(grid, cat, rng, Rank::scalar, shell);
    x.D *= rng.uniform(0.1, 1.0) / space.temperature_data_norm(x.D);
  }
  return x;
}

// Probe i is stratified over (shell, time profile); only modes, phases and
// profile parameters are random, which keeps the maxima stable in the sample count.
double estimate_L_norm(const SolutionSpace& space, const ModelParams& params,
                       std::span<const double> times, const ProbeOptions& options) {
  require_probe_inputs(times, options);
  params.validate();
  const ModeCatalog cat = build_catalog(space.grid(), space.partition());
  const int shells = static_cast<int>(cat.usable.size());
  SplitMix64 rng(options.seed);
  double best = 0.0;
  for (int i = 0; i < options.samples; ++i) {
    const ProbeDraw draw{ProbeContent::temperature, usable_shell(cat, i),
                         static_cast<Profile>((i / shells) % kProfiles)};
    const Trajectory x = draw_probe(space, cat, params, times, rng, draw);
    best = std::max(best, space.x_norm(linear_L1(x), x.times));
  }
  return best;
}

BilinearNorms estimate_B_norms(const SolutionSpace& space, const ModelParams& params,
                               std::span<const double> times, const ProbeOptions& options) {
  require_probe_inputs(times, options);
  params.validate();
  const ModeCatalog cat = build_catalog(space.grid(), space.partition());
  const int shells = static_cast<int>(cat.usable.size());
  SplitMix64 rng(options.seed);
  BilinearNorms best;

  struct Pair {
    ProbeShape x, y;
    double score = -1.0;
  };
  std::optional<Pair> lead[2];  // best pairs for B_1 and for B_2
  auto evaluate = [&](const ProbeShape& xs, const ProbeShape& ys) {
    const Trajectory x = build_probe(space, params, times, xs);
    const Trajectory y = build_probe(space, params, times, ys);
    const ZNormParts parts = space.z_parts(bilinear_B(x, y));
    best.B = std::max(best.B, parts.z);
    best.B1 = std::max(best.B1, parts.x);
    best.B2 = std::max(best.B2, parts.y);
    const double scores[2] = {parts.x, parts.y};
    bool improved[2] = {false, false};
    for (int t = 0; t < 2; ++t) {
      if (!lead[t] || scores[t] > lead[t]->score) {
        lead[t] = Pair{xs, ys, scores[t]};
        improved[t] = true;
      }
    }
    return std::pair{improved[0], improved[1]};
  };

  // Exploration: both factors share a shell and a profile type, since
  // overlapping supports in frequency and time interact most strongly.
  constexpr Profile kinds[] = {Profile::constant, Profile::window, Profile::decay,
                               Profile::semigroup};
  const int explore = std::max(1, options.samples / 3);
  for (int i = 0; i < explore; ++i) {
    ProbeContent a = ProbeContent::velocity;
    ProbeContent b = ProbeContent::velocity;
    if (i % 3 == 1) b = ProbeContent::temperature;
    if (i % 3 == 2) a = b = ProbeContent::both;
    const int shell = usable_shell(cat, i / 3);
    const Profile kind = kinds[(i / (3 * shells)) % 4];
    const ProbeShape xs = draw_shape(space.grid(), cat, params, times, rng, {a, shell, kind});
    const ProbeShape ys = draw_shape(space.grid(), cat, params, times, rng, {b, shell, kind});
    evaluate(xs, ys);
  }

  // Refinement: (1+1) evolution strategy on each leading pair, alternating
  // between the components; the step grows on success and shrinks otherwise.
  double sigma[2] = {0.3, 0.3};
  for (int k = explore; k < options.samples; ++k) {
    const int t = k % 2;
    if (!lead[t] || lead[t]->score <= 0.0) continue;
    const Pair target = *lead[t];
    const auto improved = evaluate(perturb(target.x, cat, rng, sigma[t]),
                                   perturb(target.y, cat, rng, sigma[t]));
    const bool success = t == 0 ? improved.first : improved.second;
    sigma[t] = std::clamp(sigma[t] * (success ? 1.5 : 0.85), 0.01, 1.0);
  }
  return best;
}

double estimate_data_constant(const SolutionSpace& space, const ModelParams& params,
                              std::span<const double> times, const ProbeOptions& options) {
  require_probe_inputs(times, options);
  params.validate();
  SplitMix64 rng(options.seed);
  double best = 0.0;
  for (int i = 0; i < options.samples; ++i) {
    const StateX x0 = random_initial_state(space, params, rng);
    const double weighted = space.velocity_data_norm(x0.V) / params.nu +
                            space.temperature_data_norm(x0.D) / params.eta;
    best = std::max(best, space.z_norm(free_evolution(x0, times)) / weighted);
  }
  return best;
}

}  // namespace fbsq
