#include "fbsq/semigroups.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace fbsq {
namespace {

std::atomic<bool> sign_fault{false};

void require_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument(std::string(what) + ": time must be finite and >= 0");
  }
}

}  // namespace

namespace testing {
void set_r_matrix_sign_fault(bool enabled) { sign_fault.store(enabled); }
bool r_matrix_sign_fault() { return sign_fault.load(); }
}  // namespace testing

Mat3 r_matrix(const Vec3& xi) {
  const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  if (r == 0.0) throw std::invalid_argument("r_matrix: undefined at xi = 0");
  const double a = xi[0] / r;
  const double b = xi[1] / r;
  const double c = xi[2] / r;
  Mat3 m{{{0.0, c, -b}, {-c, 0.0, a}, {b, -a, 0.0}}};
  if (sign_fault.load(std::memory_order_relaxed)) m[0][1] = -m[0][1];
  return m;
}

double spectral_norm(const Mat3& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = m[i][j];
  return Eigen::JacobiSVD<Eigen::Matrix3d>(e).singularValues()(0);
}

SpectralField heat_apply(const SpectralField& f, double eta, double t) {
  require_time(t, "heat_apply");
  if (!(eta > 0.0)) throw std::invalid_argument("heat_apply: diffusivity must be positive");
  const Grid& g = f.grid();
  SpectralField out = f;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.xi_norm(k);
    const double decay = std::exp(-eta * r * r * t);
    for (int c = 0; c < f.components(); ++c) out(c, k) *= decay;
  }
  return out;
}

SpectralField stokes_coriolis_apply(const SpectralField& f, double nu, double omega, double t,
                                    const StokesCoriolisOptions& options) {
  require_time(t, "stokes_coriolis_apply");
  if (!(nu > 0.0)) throw std::invalid_argument("stokes_coriolis_apply: viscosity must be positive");
  if (f.rank() != Rank::vector3) {
    throw std::invalid_argument("stokes_coriolis_apply: vector field required");
  }
  if (options.strict && divergence(f).max_abs() > options.strict_tol) {
    throw std::invalid_argument("stokes_coriolis_apply: input is not divergence-free");
  }
  const SpectralField v = options.strict ? f : leray_project(f);
  const Grid& g = f.grid();
  SpectralField out(g, Rank::vector3);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3 xi = g.xi(k);
    const double r = g.xi_norm(k);
    if (r == 0.0) {
      for (int c = 0; c < 3; ++c) out(c, k) = v(c, k);
      continue;
    }
    const double decay = std::exp(-nu * r * r * t);
    const double angle = omega * t * xi[2] / r;
    const double cs = decay * std::cos(angle);
    const double sn = decay * std::sin(angle);
    const Mat3 R = r_matrix(xi);
    for (int i = 0; i < 3; ++i) {
      Complex rv = R[i][0] * v(0, k) + R[i][1] * v(1, k) + R[i][2] * v(2, k);
      out(i, k) = cs * v(i, k) + sn * rv;
    }
  }
  return out;
}

double heat_step_weight(double mu, double dt) {
  if (mu == 0.0) return dt;
  return -std::expm1(-mu * dt) / mu;
}

Complex rotating_step_weight(double mu, double w, double dt) {
  const Complex a(-mu, w);
  const Complex x = a * dt;
  if (std::abs(x) < 1e-4) {
    // dt (e^x - 1)/x by its Taylor series
    return dt * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
  }
  return (std::exp(x) - 1.0) / a;
}

}  // namespace fbsq
