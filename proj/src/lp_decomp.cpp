#include "fbsq/lp_decomp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fbsq {
namespace {

constexpr double kInner = 3.0 / 4.0;
constexpr double kOuter = 4.0 / 3.0;

double bump_tail(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// Smooth step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = bump_tail(x);
  const double b = bump_tail(1.0 - x);
  return a / (a + b);
}

}  // namespace

double smooth_cutoff(double r) { return smooth_step((kOuter - r) / (kOuter - kInner)); }

double dyadic_profile(double r) { return smooth_cutoff(0.5 * r) - smooth_cutoff(r); }

DyadicPartition::DyadicPartition(int j_min, int j_max) : j_min_(j_min), j_max_(j_max) {
  if (j_min >= j_max) {
    throw std::invalid_argument("dyadic partition: empty range [" + std::to_string(j_min) + ", " +
                                std::to_string(j_max) + "]");
  }
}

DyadicPartition build_partition(int j_min, int j_max) { return DyadicPartition(j_min, j_max); }

double DyadicPartition::phi(int j, double r) const {
  if (!contains(j)) return 0.0;
  return dyadic_profile(std::ldexp(r, -j));
}

double DyadicPartition::psi(int j, double r) const {
  double sum = 0.0;
  for (int k = j_min_; k <= j - 1 && k <= j_max_; ++k) sum += phi(k, r);
  return sum;
}

double DyadicPartition::phi_tilde(int j, double r) const {
  return phi(j - 1, r) + phi(j, r) + phi(j + 1, r);
}

double DyadicPartition::partition_sum(double r) const {
  double sum = 0.0;
  for (int j = j_min_; j <= j_max_; ++j) sum += phi(j, r);
  return sum;
}

double DyadicPartition::covered_lower() const { return kOuter * std::ldexp(1.0, j_min_); }
double DyadicPartition::covered_upper() const { return 2.0 * kInner * std::ldexp(1.0, j_max_); }

bool DyadicPartition::covers(double r) const {
  return r >= covered_lower() && r <= covered_upper();
}

DyadicPartition partition_for(const Grid& grid) {
  // covered_lower <= xi_min and covered_upper >= xi_max
  constexpr double slack = 1e-12;
  const int j_min = static_cast<int>(std::floor(std::log2(grid.xi_min() / kOuter) + slack));
  const int j_max = static_cast<int>(std::ceil(std::log2(grid.xi_max() / (2.0 * kInner)) - slack));
  return DyadicPartition(j_min, std::max(j_max, j_min + 1));
}

namespace {

template <class Symbol>
SpectralField apply_radial(const SpectralField& f, Symbol&& symbol) {
  const Grid& g = f.grid();
  SpectralField out(g, f.rank());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.xi_norm(k);
    if (r == 0.0) continue;
    const double m = symbol(r);
    if (m == 0.0) continue;
    for (int c = 0; c < f.components(); ++c) out(c, k) = m * f(c, k);
  }
  return out;
}

}  // namespace

SpectralField delta_j(const SpectralField& f, const DyadicPartition& partition, int j) {
  if (!partition.contains(j)) {
    throw std::out_of_range("delta_j: shell " + std::to_string(j) + " outside partition range");
  }
  return apply_radial(f, [&](double r) { return partition.phi(j, r); });
}

SpectralField s_j(const SpectralField& f, const DyadicPartition& partition, int j) {
  if (j < partition.j_min() || j > partition.j_max() + 1) {
    throw std::out_of_range("s_j: index " + std::to_string(j) + " outside partition range");
  }
  return apply_radial(f, [&](double r) { return partition.psi(j, r); });
}

SpectralField delta_tilde_j(const SpectralField& f, const DyadicPartition& partition, int j) {
  if (!partition.contains(j)) {
    throw std::out_of_range("delta_tilde_j: shell " + std::to_string(j) +
                            " outside partition range");
  }
  return apply_radial(f, [&](double r) { return partition.phi_tilde(j, r); });
}

SpectralField paraproduct_T(const SpectralField& f, const SpectralField& g,
                            const DyadicPartition& partition) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("paraproduct_T: grid mismatch");
  SpectralField out(g.grid(), g.rank());
  // S_{j-1} vanishes for j - 1 <= j_min.
  for (int j = partition.j_min() + 2; j <= partition.j_max(); ++j) {
    const SpectralField low = s_j(f, partition, j - 1);
    if (low.max_abs() == 0.0) continue;
    const SpectralField high = delta_j(g, partition, j);
    if (high.max_abs() == 0.0) continue;
    out += dealiased_product(low, high);
  }
  return out;
}

SpectralField remainder_R(const SpectralField& f, const SpectralField& g,
                          const DyadicPartition& partition) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("remainder_R: grid mismatch");
  SpectralField out(g.grid(), g.rank());
  for (int j = partition.j_min(); j <= partition.j_max(); ++j) {
    const SpectralField fj = delta_j(f, partition, j);
    if (fj.max_abs() == 0.0) continue;
    const SpectralField gj = delta_tilde_j(g, partition, j);
    if (gj.max_abs() == 0.0) continue;
    out += dealiased_product(fj, gj);
  }
  return out;
}

}  // namespace fbsq
