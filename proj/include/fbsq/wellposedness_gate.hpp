#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fbsq/mild_solver.hpp"

namespace fbsq {

/// How the calibrated constants were obtained. Two caches are interchangeable
/// for gating only when the grid and the Z-norm indices agree.
struct CalibrationMeta {
  int n = 16;
  double box_scale = 1.0;
  int samples = 128;
  std::uint64_t seed = 1;
  double T = 0.5;
  int steps = 32;
  ZNormConfig z;
  std::string prng = "splitmix64";
  /// Parameter points of the sweep, rendered as "nu:eta:lambda:g:omega".
  std::vector<std::string> sweep;
};

/// Calibrated C_L, C_B, C_0 plus the buoyancy coefficient g the derived
/// constants are evaluated with. Only the primaries are stored.
struct ConstantSet {
  double C_L = 1.0;
  double C_B = 1.0;
  double C0 = 1.0;
  double g = 1.0;
  CalibrationMeta meta;

  /// C_L |g| / (16 C_B)
  double C() const;
  /// C / (4 C0 C_L |g|), written as 1 / (64 C_B C0) so that g = 0 stays finite.
  double C1() const;
  /// C / (8 C0 C_L^2 g^2); +inf for g = 0.
  double C2() const;

  /// Throws unless the primaries are finite and positive and g is finite.
  void validate() const;
};

/// Parameter grid for calibration: the Cartesian product of the lists.
struct ParamSweep {
  std::vector<double> nu{0.5, 2.0};
  std::vector<double> eta{0.5, 2.0};
  std::vector<double> lambda{1.0};
  std::vector<double> g{1.0};
  std::vector<double> omega{0.0};

  std::vector<ModelParams> points() const;
};

struct CalibrationOptions {
  double T = 0.5;
  int steps = 32;
  ZNormConfig z;
};

/// Per-point ratios behind the calibrated maxima.
struct CalibrationPoint {
  ModelParams params;
  double L = 0.0;          // probed |L|
  double B = 0.0;          // probed |B|
  double L_ratio = 0.0;    // |L| nu / (lambda |g|); 0 when g = 0
  double B_ratio = 0.0;    // |B| / (lambda max(1, 1/nu, 1/eta))
  double data_ratio = 0.0; // |X_0 trajectory|_Z / (|V_0|/nu + |D_0|/eta)
};

struct Calibration {
  ConstantSet constants;
  std::vector<CalibrationPoint> points;
};

/// Empirical maxima over randomized probes at every sweep point. Requires
/// samples >= 32 and at least two distinct parameter points; the stream for
/// point i is seeded from (seed, i), so results are reproducible.
Calibration calibrate_constants(const Grid& grid, int samples, std::uint64_t seed,
                                const ParamSweep& sweep, const CalibrationOptions& options = {});

/// nu / (2 C_L |g|). For g = 0 the linear operator vanishes and no rescaling
/// is needed; the sentinel +inf is returned.
double lambda0(const ConstantSet& consts, double nu, double g);

/// C min(1, nu, eta) / nu. For g = 0 the buoyancy-free smallness level at
/// lambda = 1 is used instead: 1 / (4 C_B max(1, 1/nu, 1/eta)).
double epsilon0(const ConstantSet& consts, double nu, double eta);

/// (1 - C_L lambda0 |g| / nu)^2 / (4 C_B lambda0 max(1, 1/nu, 1/eta)), the
/// contraction-lemma form evaluated at lambda = lambda0. Requires g != 0.
double epsilon0_lemma_form(const ConstantSet& consts, double nu, double eta);

enum class GateFormulation { rescaled, original };

const char* to_string(GateFormulation f);

struct GateReport {
  GateFormulation formulation = GateFormulation::rescaled;
  double lambda = 1.0;
  double lambda0 = 0.0;
  double epsilon0 = 0.0;
  double lhs = 0.0;
  double threshold = 0.0;  // epsilon0 / C0
  bool admissible = false;
  /// Set by gate_original when lambda > lambda0; the verdict is then
  /// not admissible regardless of the inequality.
  bool lambda_exceeds_lambda0 = false;
  std::vector<std::string> warnings;
};

/// |V0|/nu + |D0|/eta < epsilon0 / C0 (strict).
GateReport gate_rescaled(double V0norm, double D0norm, double nu, double eta,
                         const ConstantSet& consts);

/// |u0|/(nu lambda) + |th0|/(eta lambda^2) < epsilon0 / C0 with 0 < lambda <= lambda0.
GateReport gate_original(double u0norm, double th0norm, double nu, double eta, double lambda,
                         const ConstantSet& consts);

/// Structured-text rendering, one `key = value` per line.
void write_gate_report(std::ostream& out, const GateReport& report);

/// V = u / lambda, D = theta / lambda^2; params.lambda is set to lambda.
StateX rescale(const SpectralField& u, const SpectralField& theta, double lambda,
               ModelParams params = {});
/// (u, theta) = (lambda V, lambda^2 D) with lambda = X.params.lambda.
std::pair<SpectralField, SpectralField> unrescale(const StateX& X);

struct RegimeReport {
  std::string label;      // a1 ... c3, or a subcase such as b3.ii
  std::string top_level;  // a1 ... c3
  double u_bound = 0.0;
  double theta_bound = 0.0;
  std::string u_formula;      // e.g. "C1*k^2"
  std::string theta_formula;  // e.g. "C2/nu"
  std::string tag;
};

/// Regime of (nu, eta) relative to 1 and the data bounds at lambda = lambda0.
/// Equalities (nu = 1, eta = nu^-3, ...) are tested with relative tolerance 1e-9.
RegimeReport classify_regime(double nu, double eta, const ConstantSet& consts);

inline constexpr double kRegimeTolerance = 1e-9;

/// constants.cache: `key = value` lines, primaries and metadata.
void write_constants_cache(const std::filesystem::path& path, const ConstantSet& consts);
ConstantSet read_constants_cache(const std::filesystem::path& path);

/// Empty when `consts` may be used on `grid` with Z-norm `z`; otherwise the reasons.
std::vector<std::string> cache_incompatibilities(const ConstantSet& consts, const Grid& grid,
                                                 const ZNormConfig& z);

}  // namespace fbsq
