#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fbsq/grid.hpp"

namespace fbsq {

using Complex = std::complex<double>;

enum class Rank { scalar = 1, vector3 = 3 };

/// Dense truncated Fourier representation of a scalar or 3-vector field.
///
/// Coefficients are stored component-major, each component in the grid's
/// row-major FFT order. A field is real-valued in physical space iff its
/// coefficients are Hermitian: c(-k) = conj(c(k)) per component.
class SpectralField {
 public:
  SpectralField(const Grid& grid, Rank rank);

  const Grid& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  int components() const { return static_cast<int>(rank_); }
  bool is_scalar() const { return rank_ == Rank::scalar; }

  Complex& operator()(int c, std::size_t k) { return data_[c * grid_.size() + k]; }
  const Complex& operator()(int c, std::size_t k) const { return data_[c * grid_.size() + k]; }

  std::span<Complex> component(int c) { return {data_.data() + c * grid_.size(), grid_.size()}; }
  std::span<const Complex> component(int c) const {
    return {data_.data() + c * grid_.size(), grid_.size()};
  }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  /// Sets c(k) = value and c(-k) = conj(value) for one component.
  void set_hermitian_mode(const IntVec3& k, int c, Complex value);

  /// Euclidean modulus of the coefficient vector at mode k.
  double modulus(std::size_t k) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double factor);
  SpectralField& operator*=(Complex factor);
  /// this += factor * other
  SpectralField& add_scaled(const SpectralField& other, double factor);

  double max_abs() const;
  bool all_finite() const;

  void zero_nyquist();
  void truncate_dealias();
  void set_zero();

 private:
  Grid grid_;
  Rank rank_;
  std::vector<Complex> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double factor, SpectralField a);

void require_compatible(const SpectralField& a, const SpectralField& b, const char* what);
double max_abs_diff(const SpectralField& a, const SpectralField& b);
/// max_k |c(-k) - conj(c(k))| over all components.
double hermitian_asymmetry(const SpectralField& f);

/// Physical-space samples, component-major, row-major in (x0, x1, x2).
struct PhysicalField {
  Grid grid;
  int components;
  std::vector<double> values;

  std::span<double> component(int c) { return {values.data() + c * grid.size(), grid.size()}; }
  std::span<const double> component(int c) const {
    return {values.data() + c * grid.size(), grid.size()};
  }
};

/// f(x) = sum_k c(k) exp(i xi.x); imaginary round-off is discarded.
PhysicalField to_physical(const SpectralField& f);
/// Inverse of to_physical; Nyquist modes are zeroed.
SpectralField from_physical(const PhysicalField& f);

/// i xi . f(xi)
SpectralField divergence(const SpectralField& f);
/// i xi q(xi)
SpectralField gradient(const SpectralField& q);
/// f - xi (xi . f) / |xi|^2 per mode; the xi = 0 mode is left unchanged.
SpectralField leray_project(const SpectralField& f);

/// Pointwise product a*b with the 2/3 rule applied to both inputs and the output.
/// `a` must be scalar; `b` may be scalar or vector.
SpectralField dealiased_product(const SpectralField& a, const SpectralField& b);

/// div(b (x) a): component i is sum_k d_k (b_k a_i), computed pseudo-spectrally
/// with 2/3 dealiasing. `b` is the transporting vector field; `a` is scalar or vector.
SpectralField nonlinear_tensor(const SpectralField& a, const SpectralField& b);

}  // namespace fbsq
