#pragma once

#include <array>
#include <cstddef>

namespace fbsq {

using Vec3 = std::array<double, 3>;
using IntVec3 = std::array<int, 3>;

/// Periodic lattice used as a stand-in for R^3.
///
/// The physical domain is the cube of side 2*pi*L sampled at n points per
/// axis. Fourier modes are indexed by integer triples k with
/// -n/2 <= k_i < n/2 (FFT storage order) and carry the frequency xi = k / L.
/// Modes with |k_i| = n/2 (Nyquist) are kept at zero by every field
/// operation so that Hermitian symmetry is unambiguous.
class Grid {
 public:
  Grid(int n, double box_scale);

  int n() const { return n_; }
  double box_scale() const { return box_scale_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  /// Storage index in [0, n) -> signed wavenumber in [-n/2, n/2).
  int wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }
  /// Signed wavenumber -> storage index (periodic).
  int index_of(int k) const { return ((k % n_) + n_) % n_; }

  std::size_t flat(int i0, int i1, int i2) const {
    return (static_cast<std::size_t>(i0) * n_ + i1) * n_ + i2;
  }
  std::size_t flat_of_wavevector(const IntVec3& k) const {
    return flat(index_of(k[0]), index_of(k[1]), index_of(k[2]));
  }
  IntVec3 indices(std::size_t flat) const;
  IntVec3 wavevector(std::size_t flat) const;
  Vec3 xi(std::size_t flat) const;
  double xi_norm(std::size_t flat) const;

  /// Flat index of the mode -k.
  std::size_t mirror(std::size_t flat) const;

  bool is_nyquist(std::size_t flat) const;
  /// Largest |k_i| kept by the 2/3 dealiasing rule (largest integer < n/3).
  int dealias_cutoff() const { return (n_ - 1) / 3; }
  bool retained(std::size_t flat) const;

  /// Smallest and largest nonzero |xi| on the non-Nyquist lattice.
  double xi_min() const { return 1.0 / box_scale_; }
  double xi_max() const;
  /// Largest |xi_i| over all addressable lattice indices (the Nyquist index n/2 included).
  double xi_axis_extent() const { return (n_ / 2) / box_scale_; }
  /// Lattice cell volume in frequency space, (1/L)^3.
  double cell_volume() const;

  /// Physical sample coordinate along one axis.
  double coordinate(int index) const;

  bool operator==(const Grid&) const = default;

 private:
  int n_;
  double box_scale_;
};

/// Validating factory: n must be even and >= 8, L > 0.
Grid make_grid(int n, double box_scale);

}  // namespace fbsq
