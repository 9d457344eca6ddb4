#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbsq/fourier_besov.hpp"
#include "fbsq/model_params.hpp"
#include "fbsq/spectral_field.hpp"

namespace fbsq {

/// X = (V, D): rescaled velocity and temperature.
struct StateX {
  SpectralField V;
  SpectralField D;
  ModelParams params;

  StateX(const Grid& grid, const ModelParams& p)
      : V(grid, Rank::vector3), D(grid, Rank::scalar), params(p) {}
  StateX(SpectralField v, SpectralField d, const ModelParams& p);

  const Grid& grid() const { return V.grid(); }
  /// Throws unless ranks and grids match, params are valid and div V is below `div_tol`.
  void validate(double div_tol = 1e-10) const;
};

/// Samples X(t_m) on 0 = t_0 < ... < t_M = T.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> V;
  std::vector<SpectralField> D;
  ModelParams params;

  static Trajectory zeros(const Grid& grid, const ModelParams& params,
                          std::vector<double> times);

  const Grid& grid() const { return V.front().grid(); }
  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  StateX state(std::size_t m) const { return StateX(V[m], D[m], params); }

  Trajectory& operator+=(const Trajectory& other);
  Trajectory& operator-=(const Trajectory& other);
  Trajectory& operator*=(double factor);
};

Trajectory operator+(Trajectory a, const Trajectory& b);
Trajectory operator-(Trajectory a, const Trajectory& b);
Trajectory operator*(double factor, Trajectory a);

/// t_m = m T / M for m = 0..M.
std::vector<double> uniform_times(double T, int M);

/// Largest |div V(t_m)| over the samples.
double max_divergence(const Trajectory& traj);

enum class IntersectionNorm { max, sum };

struct ZNormConfig {
  double p = 4.0;
  double q = 2.0;
  IntersectionNorm intersection = IntersectionNorm::max;
};

/// The four Chemin-Lerner pieces of the Z = X x Y norm.
struct ZNormParts {
  double v_inf = 0.0;  // L^inf(I; FB^{2-3/p})
  double v_one = 0.0;  // L^1(I; FB^{4-3/p})
  double d_inf = 0.0;  // L^inf(I; FB^{-3/p})
  double d_one = 0.0;  // L^1(I; FB^{2-3/p})
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Norm bookkeeping for the spaces X (velocity), Y (temperature) and Z = X x Y.
class SolutionSpace {
 public:
  SolutionSpace(const Grid& grid, const ZNormConfig& config);
  SolutionSpace(const Grid& grid, const DyadicPartition& partition, const ZNormConfig& config);

  const Grid& grid() const { return shells_.grid(); }
  const DyadicPartition& partition() const { return shells_.partition(); }
  const ShellTable& shells() const { return shells_; }
  const ZNormConfig& config() const { return config_; }

  /// FB^{2-3/p}_{p,q} and FB^{-3/p}_{p,q}: the data spaces for V_0 and D_0.
  BesovSpec velocity_data_spec() const;
  BesovSpec temperature_data_spec() const;
  double velocity_data_norm(const SpectralField& v) const;
  double temperature_data_norm(const SpectralField& d) const;

  NormTrace velocity_trace(const Trajectory& traj) const;
  NormTrace temperature_trace(const Trajectory& traj) const;

  double x_norm(std::span<const SpectralField> V, std::span<const double> times) const;
  double y_norm(std::span<const SpectralField> D, std::span<const double> times) const;
  ZNormParts z_parts(const Trajectory& traj) const;
  double z_norm(const Trajectory& traj) const { return z_parts(traj).z; }
  double z_distance(const Trajectory& a, const Trajectory& b) const;

 private:
  double combine(double a, double b) const;

  ShellTable shells_;
  ZNormConfig config_;
};

/// (S_Omega(t_m) V_0, S(t_m) D_0).
Trajectory free_evolution(const StateX& X0, std::span<const double> times);

/// L(X) = (L_1 X, 0) with L_1(X)(t) = lambda g int_0^t S_Omega(t - s) P(D(s) e_3) ds.
Trajectory linear_L(const Trajectory& X);
std::vector<SpectralField> linear_L1(const Trajectory& X);

/// B(X, X') = (B_1, B_2):
///   B_1 = -lambda/2 int S_Omega P[div(V (x) V') + div(V' (x) V)]
///   B_2 = -lambda/2 int S      [div(V D') + div(V' D)]
Trajectory bilinear_B(const Trajectory& X, const Trajectory& Xp);
std::vector<SpectralField> bilinear_B1(const Trajectory& X, const Trajectory& Xp);
std::vector<SpectralField> bilinear_B2(const Trajectory& X, const Trajectory& Xp);

struct OperatorNorms {
  double L = 0.0;
  double B = 0.0;
};

struct FixedPointReport {
  double norm_L = 0.0;
  double norm_B = 0.0;
  double norm_X0 = 0.0;
  bool admissible = false;
  /// (1 - |L|) / (2 |B|) whenever |L| < 1 (nominal when the data test fails);
  /// +inf when |B| = 0 and |L| < 1; 0 when |L| >= 1.
  double ball_radius = 0.0;
  std::string note;
};

/// Contraction test x = x0 + Lx + B(x, x): admissible iff |L| < 1 and
/// |x0| < (1 - |L|)^2 / (4 |B|).
FixedPointReport fixed_point_check(double norm_L, double norm_B, double norm_X0);

enum class PicardStatus { converged, diverged, max_iterations };

const char* to_string(PicardStatus status);

struct PicardOptions {
  double tol = 1e-10;
  int max_iter = 100;
  bool include_linear = true;
  bool include_bilinear = true;
  ZNormConfig z;
  /// Operator norms for the report. When absent they are probed.
  std::optional<OperatorNorms> norms;
  int probe_samples = 64;
  std::uint64_t probe_seed = 1;
};

struct PicardResult {
  Trajectory solution;
  FixedPointReport report;
  PicardStatus status = PicardStatus::max_iterations;
  int iterations = 0;
  /// d_n = |X^(n+1) - X^(n)|_Z
  std::vector<double> distances;
  /// |X^(n)|_Z for n = 0, 1, ...
  std::vector<double> iterate_norms;
  /// |X - X_0 - L X - B(X, X)|_Z for the returned X.
  double residual = std::numeric_limits<double>::quiet_NaN();
  /// Every iterate stayed within the Lemma ball (always false when not admissible).
  bool stayed_in_ball = false;
};

/// X^(0) = X_0 trajectory, X^(n+1) = X_0 + L X^(n) + B(X^(n), X^(n)).
/// Divergence (|X^(n)|_Z > 10 ball radius) and max_iter exhaustion are
/// reported through `status`, with the full history attached.
PicardResult picard_solve(const StateX& X0, double T, int M, const PicardOptions& options = {});

struct EtdOptions {
  bool include_linear = true;
  bool include_bilinear = true;
  /// Internal steps per output interval.
  int substeps = 1;
  /// A step is rejected when the nonlinear increment exceeds this multiple
  /// of the current state's largest coefficient (plus one).
  double safety = 10.0;
};

struct StepRejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// First-order exponential time differencing: X_{k+1} = E(dt) X_k + W(dt) N(X_k),
/// with the exact per-mode weights of the linear part. Returns the M + 1 samples.
Trajectory etd_march(const StateX& X0, double T, int M, const EtdOptions& options = {});

}  // namespace fbsq
