#pragma once

#include <array>

#include "fbsq/spectral_field.hpp"

namespace fbsq {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rotation generator of the Stokes-Coriolis semigroup at xi != 0:
///
///     R(xi) = 1/|xi| [  0    xi3  -xi2 ]
///                    [ -xi3   0    xi1 ]
///                    [  xi2  -xi1   0  ]
///
/// Equivalently R(xi) v = -(xi/|xi|) x v. Throws for xi = 0.
Mat3 r_matrix(const Vec3& xi);

/// Largest singular value of a 3x3 matrix.
double spectral_norm(const Mat3& m);

/// (S(t) f)^(xi) = exp(-eta |xi|^2 t) f^(xi).
SpectralField heat_apply(const SpectralField& f, double eta, double t);

struct StokesCoriolisOptions {
  /// Reject input whose divergence exceeds `strict_tol` instead of projecting it.
  bool strict = false;
  double strict_tol = 1e-10;
};

/// (S_Omega(t) v)^(xi) = exp(-nu |xi|^2 t) [cos(w t) I + sin(w t) R(xi)] v^(xi),
/// w = Omega xi3/|xi|. Input is Leray-projected first unless `strict` is set;
/// the xi = 0 mode evolves by the identity.
SpectralField stokes_coriolis_apply(const SpectralField& f, double nu, double omega, double t,
                                    const StokesCoriolisOptions& options = {});

/// Exact integral of exp(-mu s) over [0, dt]; equals dt for mu = 0.
double heat_step_weight(double mu, double dt);

/// Exact integral of exp((-mu + i w) s) over [0, dt]. The real part weights
/// the identity and the imaginary part weights R(xi).
Complex rotating_step_weight(double mu, double w, double dt);

namespace testing {
/// Flips the sign of the (0,1) entry of R(xi), breaking skew-symmetry.
/// Used by the verify command to confirm the semigroup checks can fail.
void set_r_matrix_sign_fault(bool enabled);
bool r_matrix_sign_fault();
}  // namespace testing

}  // namespace fbsq
