#include "fbsq/initial_data.hpp"

#include <cmath>
#include <stdexcept>

#include "fbsq/snapshot_io.hpp"

namespace fbsq {
namespace {

bool representative(const IntVec3& k) {
  if (k[0] != 0) return k[0] > 0;
  if (k[1] != 0) return k[1] > 0;
  return k[2] > 0;
}

Vec3 unit_orthogonal(const Vec3& xi) {
  // xi x e3, or xi x e1 when xi is vertical
  Vec3 e = {xi[1], -xi[0], 0.0};
  if (std::hypot(e[0], e[1]) == 0.0) e = {0.0, xi[2], -xi[1]};
  const double r = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  for (double& c : e) c /= r;
  return e;
}

int dominant_shell(const DyadicPartition& partition, double r) {
  int best = partition.j_min() - 1;
  double weight = 0.0;
  for (int j = partition.j_min(); j <= partition.j_max(); ++j) {
    const double w = partition.phi(j, r);
    if (w > weight) {
      weight = w;
      best = j;
    }
  }
  return best;
}

// Gaussian Hermitian field on the retained modes whose dominant shell is j.
SpectralField gaussian_shell(const Grid& grid, const DyadicPartition& partition, int j, Rank rank,
                             SplitMix64& rng) {
  SpectralField f(grid, rank);
  bool any = false;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (!grid.retained(m) || grid.xi_norm(m) == 0.0) continue;
    const IntVec3 k = grid.wavevector(m);
    if (!representative(k) || dominant_shell(partition, grid.xi_norm(m)) != j) continue;
    for (int c = 0; c < f.components(); ++c) {
      const double re = rng.normal();
      const double im = rng.normal();
      f.set_hermitian_mode(k, c, {re, im});
    }
    any = true;
  }
  if (!any) throw std::invalid_argument("initial.shells: shell " + std::to_string(j) + " holds no retained modes");
  return rank == Rank::vector3 ? leray_project(f) : f;
}

}  // namespace

const char* to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::zero: return "zero";
    case InitialKind::single_mode: return "single_mode";
    case InitialKind::random_shells: return "random_shells";
    case InitialKind::file: return "file";
  }
  return "?";
}

InitialKind parse_initial_kind(const std::string& name) {
  for (InitialKind k : {InitialKind::zero, InitialKind::single_mode, InitialKind::random_shells,
                        InitialKind::file}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("initial.kind: unknown generator '" + name + "'");
}

void validate(const InitialSpec& spec) {
  switch (spec.kind) {
    case InitialKind::zero:
      break;
    case InitialKind::single_mode:
      if (spec.mode == IntVec3{0, 0, 0}) throw std::invalid_argument("initial.mode: must be nonzero");
      if (!std::isfinite(spec.velocity_amplitude) || !std::isfinite(spec.temperature_amplitude)) {
        throw std::invalid_argument("initial amplitudes must be finite");
      }
      break;
    case InitialKind::random_shells:
      if (spec.shells.empty()) throw std::invalid_argument("initial.shells: empty list");
      if (spec.velocity_amplitudes.size() != spec.shells.size() ||
          spec.temperature_amplitudes.size() != spec.shells.size()) {
        throw std::invalid_argument("initial: one velocity and one temperature amplitude per shell");
      }
      for (double a : spec.velocity_amplitudes)
        if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("initial amplitudes must be >= 0");
      for (double a : spec.temperature_amplitudes)
        if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("initial amplitudes must be >= 0");
      break;
    case InitialKind::file:
      for (const auto& p : {spec.velocity_file, spec.temperature_file}) {
        if (p.empty()) throw std::invalid_argument("initial: file generator needs both snapshot paths");
        if (!std::filesystem::exists(p)) throw std::invalid_argument("initial: no such file " + p.string());
      }
      break;
  }
}

std::pair<SpectralField, SpectralField> make_initial_data(const SolutionSpace& space,
                                                          const InitialSpec& spec,
                                                          SplitMix64& rng) {
  validate(spec);
  const Grid& grid = space.grid();
  SpectralField u(grid, Rank::vector3);
  SpectralField theta(grid, Rank::scalar);

  switch (spec.kind) {
    case InitialKind::zero:
      break;
    case InitialKind::single_mode: {
      const std::size_t m = grid.flat_of_wavevector(spec.mode);
      if (grid.wavevector(m) != spec.mode || !grid.retained(m)) {
        throw std::invalid_argument("initial.mode: outside the dealiased lattice");
      }
      const Vec3 e = unit_orthogonal(grid.xi(m));
      for (int c = 0; c < 3; ++c) u.set_hermitian_mode(spec.mode, c, spec.velocity_amplitude * e[c]);
      theta.set_hermitian_mode(spec.mode, 0, spec.temperature_amplitude);
      break;
    }
    case InitialKind::random_shells: {
      const DyadicPartition& partition = space.partition();
      for (std::size_t i = 0; i < spec.shells.size(); ++i) {
        const int j = spec.shells[i];
        if (!partition.contains(j)) {
          throw std::invalid_argument("initial.shells: shell " + std::to_string(j) + " outside the partition");
        }
        SpectralField v = gaussian_shell(grid, partition, j, Rank::vector3, rng);
        SpectralField d = gaussian_shell(grid, partition, j, Rank::scalar, rng);
        u.add_scaled(v, spec.velocity_amplitudes[i] / space.velocity_data_norm(v));
        theta.add_scaled(d, spec.temperature_amplitudes[i] / space.temperature_data_norm(d));
      }
      break;
    }
    case InitialKind::file: {
      u = read_snapshot_file(spec.velocity_file);
      theta = read_snapshot_file(spec.temperature_file);
      if (u.grid() != grid || theta.grid() != grid) {
        throw std::invalid_argument("initial: snapshot grid differs from grid.n / grid.L");
      }
      if (u.rank() != Rank::vector3 || theta.rank() != Rank::scalar) {
        throw std::invalid_argument("initial: expected a vector velocity and a scalar temperature");
      }
      u = leray_project(u);
      break;
    }
  }
  return {std::move(u), std::move(theta)};
}

}  // namespace fbsq
