#pragma once

#include <cstdint>
#include <span>

#include "fbsq/mild_solver.hpp"
#include "fbsq/prng.hpp"

namespace fbsq {

struct ProbeOptions {
  int samples = 64;
  std::uint64_t seed = 1;
};

enum class ProbeContent { velocity, temperature, both };

/// Random trajectory with unit Z-norm: one to three Fourier modes of a random
/// shell times a random time profile. Roughly half the probes use horizontal
/// modes only (xi_3 = 0), on which the rotation acts trivially.
Trajectory random_probe(const SolutionSpace& space, const ModelParams& params,
                        std::span<const double> times, SplitMix64& rng, ProbeContent content);

/// Random initial state with the same spatial structure, V divergence-free.
StateX random_initial_state(const SolutionSpace& space, const ModelParams& params,
                            SplitMix64& rng);

/// max |L x|_Z / |x|_Z over random probes.
double estimate_L_norm(const SolutionSpace& space, const ModelParams& params,
                       std::span<const double> times, const ProbeOptions& options);

struct BilinearNorms {
  double B = 0.0;   // |B(x, y)|_Z / (|x|_Z |y|_Z)
  double B1 = 0.0;  // |B_1(x, y)|_X / (|x|_Z |y|_Z)
  double B2 = 0.0;  // |B_2(x, y)|_Y / (|x|_Z |y|_Z)
};

/// Maxima over random probe pairs.
BilinearNorms estimate_B_norms(const SolutionSpace& space, const ModelParams& params,
                               std::span<const double> times, const ProbeOptions& options);

/// max |X_0 trajectory|_Z / (|V_0|/nu + |D_0|/eta) over random initial states.
double estimate_data_constant(const SolutionSpace& space, const ModelParams& params,
                              std::span<const double> times, const ProbeOptions& options);

}  // namespace fbsq
