#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "fbsq/lp_decomp.hpp"
#include "fbsq/spectral_field.hpp"

namespace fbsq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Index triple of the homogeneous Fourier-Besov space FB^s_{p,q}.
/// p is the Lebesgue exponent on the Fourier side, q the shell summability.
struct BesovSpec {
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;

  void validate() const;
};

/// Discrete L^p norm on the frequency lattice:
/// (sum_xi |v(xi)|^p dxi^3)^(1/p), or max |v| for p = inf.
double lattice_lp_norm(std::span<const double> moduli, double p, double cell_volume);

/// Per-mode shell weights for one (grid, partition) pair, built once.
/// Each nonzero mode belongs to at most two consecutive shells.
class ShellTable {
 public:
  ShellTable(const Grid& grid, const DyadicPartition& partition);

  const Grid& grid() const { return grid_; }
  const DyadicPartition& partition() const { return partition_; }

  /// ||phi_j f^||_{L^p} for every shell, indexed by j - j_min.
  std::vector<double> shell_norms(const SpectralField& f, double p) const;

 private:
  struct Entry {
    std::size_t mode;
    int shell;  // j - j_min
    double weight;
  };
  Grid grid_;
  DyadicPartition partition_;
  std::vector<Entry> entries_;
};

double shell_lp_norm(const SpectralField& f, const DyadicPartition& partition, int j, double p);
std::vector<double> shell_lp_norms(const SpectralField& f, const DyadicPartition& partition,
                                   double p);

/// l^q over shells of 2^{js} * shell_norms[j - j_min]; q = inf is the sup.
double weighted_shell_sum(std::span<const double> shell_norms, int j_min, double s, double q);

/// Homogeneous FB^s_{p,q} norm; the xi = 0 mode never contributes.
double fb_norm(const SpectralField& f, const DyadicPartition& partition, const BesovSpec& spec);

/// Per-time, per-shell L^p norms of a trajectory on I = (0, T].
struct NormTrace {
  std::vector<double> times;
  int j_min = 0;
  double p = 2.0;
  std::vector<std::vector<double>> shells;  // [time][j - j_min]

  int shell_count() const { return shells.empty() ? 0 : static_cast<int>(shells.front().size()); }
  void validate() const;
};

NormTrace make_norm_trace(std::span<const SpectralField> states, std::span<const double> times,
                          const ShellTable& table, double p);

/// (integral |v|^r dt)^(1/r) by the trapezoidal rule on the sample times;
/// r = inf is the sample maximum.
double time_lr_norm(std::span<const double> times, std::span<const double> values, double r);

/// L^r(I; FB^s_{p,q}): time norm of the instantaneous FB norms.
double lr_time_norm(const NormTrace& trace, double r, const BesovSpec& spec);
/// Chemin-Lerner norm: time L^r per shell first, then the weighted l^q sum.
double cl_time_norm(const NormTrace& trace, double r, const BesovSpec& spec);

/// ||xi^beta f^||_{p2} / (2^{j|beta| + 3j(1/p2 - 1/p1)} ||f^||_{p1}).
/// Requires supp f^ within |xi| <= A 2^j and p2 <= p1.
double bernstein_ratio(const SpectralField& f, int j, const IntVec3& beta, double p1, double p2,
                       double A);

/// ||f||_{spec2} / ||f||_{spec1} under the critical-balance conditions
/// p2 <= p1, s2 + 3/p2 = s1 + 3/p1 and q1 <= q2.
double embedding_ratio(const SpectralField& f, const DyadicPartition& partition,
                       const BesovSpec& spec1, const BesovSpec& spec2);

/// CSV with header `t, j, shell_lp, fb_norm_total`, one row per (t, j).
/// A non-empty `comment` is written first as a `# ...` line.
void write_norm_trace_csv(std::ostream& out, const NormTrace& trace, const BesovSpec& spec,
                          std::string_view comment);

}  // namespace fbsq
