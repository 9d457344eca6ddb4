#include "fbsq/fourier_besov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fbsq {
namespace {

void require_exponent(double p, const char* what) {
  if (!(p >= 1.0)) throw std::invalid_argument(std::string(what) + ": exponent must be >= 1");
}

// Accumulates sum |v|^p (finite p) or max |v| (p = inf).
struct LpAccumulator {
  double p;
  double acc = 0.0;

  void add(double v) {
    if (std::isinf(p)) {
      acc = std::max(acc, v);
    } else if (v > 0.0) {
      acc += std::pow(v, p);
    }
  }
  double finish(double cell_volume) const {
    if (std::isinf(p)) return acc;
    return std::pow(acc * cell_volume, 1.0 / p);
  }
};

}  // namespace

void BesovSpec::validate() const {
  require_exponent(p, "BesovSpec.p");
  require_exponent(q, "BesovSpec.q");
  if (!std::isfinite(s)) throw std::invalid_argument("BesovSpec.s must be finite");
}

double lattice_lp_norm(std::span<const double> moduli, double p, double cell_volume) {
  require_exponent(p, "lattice_lp_norm");
  LpAccumulator acc{p};
  for (double v : moduli) acc.add(v);
  return acc.finish(cell_volume);
}

ShellTable::ShellTable(const Grid& grid, const DyadicPartition& partition)
    : grid_(grid), partition_(partition) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid.xi_norm(k);
    if (r == 0.0 || grid.is_nyquist(k)) continue;
    for (int j = partition.j_min(); j <= partition.j_max(); ++j) {
      const double w = partition.phi(j, r);
      if (w > 0.0) entries_.push_back({k, j - partition.j_min(), w});
    }
  }
}

std::vector<double> ShellTable::shell_norms(const SpectralField& f, double p) const {
  require_exponent(p, "shell_norms");
  if (!(f.grid() == grid_)) throw std::invalid_argument("shell_norms: grid mismatch");
  std::vector<LpAccumulator> acc(partition_.shell_count(), LpAccumulator{p});
  for (const Entry& e : entries_) {
    const double m = f.modulus(e.mode);
    if (m != 0.0) acc[e.shell].add(e.weight * m);
  }
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].finish(grid_.cell_volume());
  return out;
}

double shell_lp_norm(const SpectralField& f, const DyadicPartition& partition, int j, double p) {
  require_exponent(p, "shell_lp_norm");
  if (!partition.contains(j)) {
    throw std::out_of_range("shell_lp_norm: shell " + std::to_string(j) + " outside range");
  }
  const Grid& g = f.grid();
  LpAccumulator acc{p};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.xi_norm(k);
    if (r == 0.0) continue;
    const double w = partition.phi(j, r);
    if (w > 0.0) acc.add(w * f.modulus(k));
  }
  return acc.finish(g.cell_volume());
}

std::vector<double> shell_lp_norms(const SpectralField& f, const DyadicPartition& partition,
                                   double p) {
  return ShellTable(f.grid(), partition).shell_norms(f, p);
}

double weighted_shell_sum(std::span<const double> shell_norms, int j_min, double s, double q) {
  require_exponent(q, "weighted_shell_sum");
  LpAccumulator acc{q};
  for (std::size_t i = 0; i < shell_norms.size(); ++i) {
    const int j = j_min + static_cast<int>(i);
    acc.add(std::exp2(j * s) * shell_norms[i]);
  }
  return acc.finish(1.0);
}

double fb_norm(const SpectralField& f, const DyadicPartition& partition, const BesovSpec& spec) {
  spec.validate();
  const auto shells = shell_lp_norms(f, partition, spec.p);
  return weighted_shell_sum(shells, partition.j_min(), spec.s, spec.q);
}

void NormTrace::validate() const {
  if (times.empty()) throw std::invalid_argument("NormTrace: empty trace");
  if (shells.size() != times.size()) {
    throw std::invalid_argument("NormTrace: shell rows do not match sample times");
  }
  for (std::size_t m = 1; m < times.size(); ++m) {
    if (!(times[m] > times[m - 1])) {
      throw std::invalid_argument("NormTrace: times must be strictly increasing");
    }
  }
  const std::size_t width = shells.front().size();
  for (const auto& row : shells) {
    if (row.size() != width) throw std::invalid_argument("NormTrace: ragged shell rows");
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("NormTrace: shell norms must be finite and nonnegative");
      }
    }
  }
}

NormTrace make_norm_trace(std::span<const SpectralField> states, std::span<const double> times,
                          const ShellTable& table, double p) {
  if (states.size() != times.size()) {
    throw std::invalid_argument("make_norm_trace: states and times differ in length");
  }
  NormTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.j_min = table.partition().j_min();
  trace.p = p;
  trace.shells.reserve(states.size());
  for (const auto& f : states) trace.shells.push_back(table.shell_norms(f, p));
  return trace;
}

double time_lr_norm(std::span<const double> times, std::span<const double> values, double r) {
  require_exponent(r, "time_lr_norm");
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("time_lr_norm: empty or mismatched samples");
  }
  if (std::isinf(r)) return *std::max_element(values.begin(), values.end());
  double integral = 0.0;
  for (std::size_t m = 0; m + 1 < times.size(); ++m) {
    const double dt = times[m + 1] - times[m];
    integral += 0.5 * dt * (std::pow(values[m], r) + std::pow(values[m + 1], r));
  }
  return std::pow(integral, 1.0 / r);
}

double lr_time_norm(const NormTrace& trace, double r, const BesovSpec& spec) {
  trace.validate();
  spec.validate();
  std::vector<double> instantaneous(trace.times.size());
  for (std::size_t m = 0; m < trace.times.size(); ++m) {
    instantaneous[m] = weighted_shell_sum(trace.shells[m], trace.j_min, spec.s, spec.q);
  }
  return time_lr_norm(trace.times, instantaneous, r);
}

double cl_time_norm(const NormTrace& trace, double r, const BesovSpec& spec) {
  trace.validate();
  spec.validate();
  const int width = trace.shell_count();
  std::vector<double> per_shell(width);
  std::vector<double> column(trace.times.size());
  for (int i = 0; i < width; ++i) {
    for (std::size_t m = 0; m < trace.times.size(); ++m) column[m] = trace.shells[m][i];
    per_shell[i] = time_lr_norm(trace.times, column, r);
  }
  return weighted_shell_sum(per_shell, trace.j_min, spec.s, spec.q);
}

double bernstein_ratio(const SpectralField& f, int j, const IntVec3& beta, double p1, double p2,
                       double A) {
  require_exponent(p1, "bernstein_ratio");
  require_exponent(p2, "bernstein_ratio");
  if (p2 > p1) throw std::invalid_argument("bernstein_ratio: requires p2 <= p1");
  if (!(A > 0.0)) throw std::invalid_argument("bernstein_ratio: A must be positive");
  const Grid& g = f.grid();
  const double radius = A * std::ldexp(1.0, j);
  LpAccumulator num{p2};
  LpAccumulator den{p1};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double m = f.modulus(k);
    if (m == 0.0) continue;
    if (g.xi_norm(k) > radius * (1.0 + 1e-12)) {
      throw std::invalid_argument("bernstein_ratio: support exceeds |xi| <= A 2^j");
    }
    const Vec3 xi = g.xi(k);
    double mono = 1.0;
    for (int c = 0; c < 3; ++c) mono *= std::pow(xi[c], beta[c]);
    num.add(std::abs(mono) * m);
    den.add(m);
  }
  const double denominator = den.finish(g.cell_volume());
  if (denominator == 0.0) throw std::invalid_argument("bernstein_ratio: zero field");
  const int order = beta[0] + beta[1] + beta[2];
  const double inv_p1 = std::isinf(p1) ? 0.0 : 1.0 / p1;
  const double inv_p2 = std::isinf(p2) ? 0.0 : 1.0 / p2;
  const double scale = std::exp2(j * order + 3.0 * j * (inv_p2 - inv_p1));
  return num.finish(g.cell_volume()) / (scale * denominator);
}

double embedding_ratio(const SpectralField& f, const DyadicPartition& partition,
                       const BesovSpec& spec1, const BesovSpec& spec2) {
  spec1.validate();
  spec2.validate();
  const double inv1 = std::isinf(spec1.p) ? 0.0 : 1.0 / spec1.p;
  const double inv2 = std::isinf(spec2.p) ? 0.0 : 1.0 / spec2.p;
  if (spec2.p > spec1.p) throw std::invalid_argument("embedding_ratio: requires p2 <= p1");
  if (std::abs((spec2.s + 3.0 * inv2) - (spec1.s + 3.0 * inv1)) > 1e-12) {
    throw std::invalid_argument("embedding_ratio: requires s2 + 3/p2 = s1 + 3/p1");
  }
  if (spec1.q > spec2.q) throw std::invalid_argument("embedding_ratio: requires q1 <= q2");
  const double n1 = fb_norm(f, partition, spec1);
  if (n1 == 0.0) throw std::invalid_argument("embedding_ratio: zero field");
  return fb_norm(f, partition, spec2) / n1;
}

void write_norm_trace_csv(std::ostream& out, const NormTrace& trace, const BesovSpec& spec,
                          std::string_view comment) {
  trace.validate();
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "t, j, shell_lp, fb_norm_total\n";
  char buf[128];
  for (std::size_t m = 0; m < trace.times.size(); ++m) {
    const double total = weighted_shell_sum(trace.shells[m], trace.j_min, spec.s, spec.q);
    for (std::size_t i = 0; i < trace.shells[m].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g, %d, %.17g, %.17g\n", trace.times[m],
                    trace.j_min + static_cast<int>(i), trace.shells[m][i], total);
      out << buf;
    }
  }
}

}  // namespace fbsq
