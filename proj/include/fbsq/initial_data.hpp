#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fbsq/mild_solver.hpp"
#include "fbsq/prng.hpp"

namespace fbsq {

enum class InitialKind { zero, single_mode, random_shells, file };

const char* to_string(InitialKind kind);
InitialKind parse_initial_kind(const std::string& name);

/// Generator for the physical data (u0, theta0).
struct InitialSpec {
  InitialKind kind = InitialKind::zero;

  // single_mode: u0 = A_u e exp(i xi.x) + c.c. with e a unit vector orthogonal
  // to xi, theta0 = A_th exp(i xi.x) + c.c.
  IntVec3 mode{1, 0, 0};
  double velocity_amplitude = 0.0;
  double temperature_amplitude = 0.0;

  // random_shells: Gaussian coefficients on the retained modes of each listed
  // shell, scaled so that the shell's piece has the requested data norm
  // (FB^{2-3/p} for u0, FB^{-3/p} for theta0).
  std::vector<int> shells;
  std::vector<double> velocity_amplitudes;
  std::vector<double> temperature_amplitudes;

  // file: FBSQ snapshots (rank 3 and rank 1) on the same grid.
  std::filesystem::path velocity_file;
  std::filesystem::path temperature_file;
};

/// Throws std::invalid_argument on inconsistent fields (list lengths, zero
/// wavevector, missing files).
void validate(const InitialSpec& spec);

/// (u0, theta0); u0 is divergence-free and both are Hermitian.
std::pair<SpectralField, SpectralField> make_initial_data(const SolutionSpace& space,
                                                          const InitialSpec& spec,
                                                          SplitMix64& rng);

}  // namespace fbsq
