#pragma once

#include "fbsq/spectral_field.hpp"

namespace fbsq {

/// Smooth radial cutoff: 1 on [0, 3/4], 0 on [4/3, inf), C-infinity in between.
double smooth_cutoff(double r);

/// Dyadic profile phi(r) = smooth_cutoff(r/2) - smooth_cutoff(r).
/// Supported in [3/4, 8/3]; the dilates phi(2^-j r) telescope to 1.
double dyadic_profile(double r);

/// Littlewood-Paley partition {phi_j} restricted to j_min <= j <= j_max.
///
/// phi_j(xi) = phi(2^-j |xi|); psi_j = sum_{j_min <= k <= j-1} phi_k;
/// phi_tilde_j = phi_{j-1} + phi_j + phi_{j+1}. Shells outside the range are
/// treated as zero. The telescoped sum is exactly 1 on the covered radii
/// [4/3 * 2^j_min, 3/2 * 2^j_max].
class DyadicPartition {
 public:
  DyadicPartition(int j_min, int j_max);

  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  int shell_count() const { return j_max_ - j_min_ + 1; }
  bool contains(int j) const { return j >= j_min_ && j <= j_max_; }

  double phi(int j, double r) const;
  double psi(int j, double r) const;
  double phi_tilde(int j, double r) const;
  /// sum_{j in range} phi_j(r)
  double partition_sum(double r) const;

  double covered_lower() const;
  double covered_upper() const;
  bool covers(double r) const;

 private:
  int j_min_;
  int j_max_;
};

/// Throws std::invalid_argument unless j_min < j_max.
DyadicPartition build_partition(int j_min, int j_max);

/// Smallest range whose covered radii contain every nonzero lattice frequency.
DyadicPartition partition_for(const Grid& grid);

/// phi_j(D) f. Throws if j is outside the partition range.
SpectralField delta_j(const SpectralField& f, const DyadicPartition& partition, int j);
/// psi_j(D) f, for j_min <= j <= j_max + 1.
SpectralField s_j(const SpectralField& f, const DyadicPartition& partition, int j);
/// phi_tilde_j(D) f.
SpectralField delta_tilde_j(const SpectralField& f, const DyadicPartition& partition, int j);

/// Bony paraproduct T_f(g) = sum_j S_{j-1} f * Delta_j g (f scalar).
SpectralField paraproduct_T(const SpectralField& f, const SpectralField& g,
                            const DyadicPartition& partition);
/// Remainder R(f, g) = sum_j Delta_j f * Delta_tilde_j g (f scalar).
SpectralField remainder_R(const SpectralField& f, const SpectralField& g,
                          const DyadicPartition& partition);

}  // namespace fbsq
