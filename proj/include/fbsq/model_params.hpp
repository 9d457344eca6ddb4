#pragma once

namespace fbsq {

/// Coefficients of the rescaled Boussinesq-Coriolis system
///
///     dv/dt - nu lap v + Omega e3 x v + lambda (v.grad) v + grad q = lambda g rho e3
///     drho/dt - eta lap rho + lambda (v.grad) rho = 0,   div v = 0.
///
/// g defaults to 1 and Omega to 0 (plain Boussinesq).
struct ModelParams {
  double nu = 1.0;
  double eta = 1.0;
  double g = 1.0;
  double omega = 0.0;
  double lambda = 1.0;

  /// Throws std::invalid_argument unless nu, eta, lambda > 0 and all finite.
  void validate() const;
};

}  // namespace fbsq
