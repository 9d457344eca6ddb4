#include "fbsq/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "fbsq/operator_probes.hpp"
#include "fbsq/semigroups.hpp"

namespace fbsq {

StateX::StateX(SpectralField v, SpectralField d, const ModelParams& p)
    : V(std::move(v)), D(std::move(d)), params(p) {}

void StateX::validate(double div_tol) const {
  if (V.rank() != Rank::vector3) throw std::invalid_argument("StateX: V must be a vector field");
  if (D.rank() != Rank::scalar) throw std::invalid_argument("StateX: D must be a scalar field");
  if (!(V.grid() == D.grid())) throw std::invalid_argument("StateX: V and D grids differ");
  params.validate();
  if (!V.all_finite() || !D.all_finite()) throw std::invalid_argument("StateX: non-finite data");
  const double div = divergence(V).max_abs();
  if (div > div_tol) {
    throw std::invalid_argument("StateX: V is not divergence-free (max |div V| = " +
                                std::to_string(div) + ")");
  }
}

Trajectory Trajectory::zeros(const Grid& grid, const ModelParams& params,
                             std::vector<double> times) {
  Trajectory t;
  t.params = params;
  t.V.assign(times.size(), SpectralField(grid, Rank::vector3));
  t.D.assign(times.size(), SpectralField(grid, Rank::scalar));
  t.times = std::move(times);
  return t;
}

namespace {

void require_same_samples(const Trajectory& a, const Trajectory& b, const char* what) {
  if (a.empty() || b.empty()) throw std::invalid_argument(std::string(what) + ": empty trajectory");
  if (a.times != b.times) throw std::invalid_argument(std::string(what) + ": time grids differ");
  if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

void require_times(std::span<const double> times, const char* what) {
  if (times.empty()) throw std::invalid_argument(std::string(what) + ": empty time grid");
  if (times.front() != 0.0) throw std::invalid_argument(std::string(what) + ": t_0 must be 0");
  for (std::size_t m = 1; m < times.size(); ++m) {
    if (!(times[m] > times[m - 1])) {
      throw std::invalid_argument(std::string(what) + ": times must be strictly increasing");
    }
  }
}

}  // namespace

Trajectory& Trajectory::operator+=(const Trajectory& other) {
  require_same_samples(*this, other, "Trajectory +=");
  for (std::size_t m = 0; m < size(); ++m) {
    V[m] += other.V[m];
    D[m] += other.D[m];
  }
  return *this;
}

Trajectory& Trajectory::operator-=(const Trajectory& other) {
  require_same_samples(*this, other, "Trajectory -=");
  for (std::size_t m = 0; m < size(); ++m) {
    V[m] -= other.V[m];
    D[m] -= other.D[m];
  }
  return *this;
}

Trajectory& Trajectory::operator*=(double factor) {
  for (std::size_t m = 0; m < size(); ++m) {
    V[m] *= factor;
    D[m] *= factor;
  }
  return *this;
}

Trajectory operator+(Trajectory a, const Trajectory& b) { return a += b; }
Trajectory operator-(Trajectory a, const Trajectory& b) { return a -= b; }
Trajectory operator*(double factor, Trajectory a) { return a *= factor; }

std::vector<double> uniform_times(double T, int M) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("time horizon must be positive");
  if (M < 1) throw std::invalid_argument("step count must be >= 1");
  std::vector<double> t(M + 1);
  for (int m = 0; m <= M; ++m) t[m] = T * m / M;
  t[M] = T;
  return t;
}

double max_divergence(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& v : traj.V) worst = std::max(worst, divergence(v).max_abs());
  return worst;
}

// ---------------------------------------------------------------------------
// Norms

SolutionSpace::SolutionSpace(const Grid& grid, const ZNormConfig& config)
    : SolutionSpace(grid, partition_for(grid), config) {}

SolutionSpace::SolutionSpace(const Grid& grid, const DyadicPartition& partition,
                             const ZNormConfig& config)
    : shells_(grid, partition), config_(config) {
  BesovSpec{0.0, config.p, config.q}.validate();
}

BesovSpec SolutionSpace::velocity_data_spec() const {
  return {2.0 - 3.0 / config_.p, config_.p, config_.q};
}

BesovSpec SolutionSpace::temperature_data_spec() const {
  return {-3.0 / config_.p, config_.p, config_.q};
}

double SolutionSpace::velocity_data_norm(const SpectralField& v) const {
  const auto spec = velocity_data_spec();
  return weighted_shell_sum(shells_.shell_norms(v, spec.p), partition().j_min(), spec.s, spec.q);
}

double SolutionSpace::temperature_data_norm(const SpectralField& d) const {
  const auto spec = temperature_data_spec();
  return weighted_shell_sum(shells_.shell_norms(d, spec.p), partition().j_min(), spec.s, spec.q);
}

NormTrace SolutionSpace::velocity_trace(const Trajectory& traj) const {
  return make_norm_trace(traj.V, traj.times, shells_, config_.p);
}

NormTrace SolutionSpace::temperature_trace(const Trajectory& traj) const {
  return make_norm_trace(traj.D, traj.times, shells_, config_.p);
}

double SolutionSpace::combine(double a, double b) const {
  return config_.intersection == IntersectionNorm::max ? std::max(a, b) : a + b;
}

namespace {

NormTrace trace_of(std::size_t count, std::span<const double> times, const ShellTable& table,
                   double p, const std::function<std::vector<double>(std::size_t)>& shell_row) {
  NormTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.j_min = table.partition().j_min();
  trace.p = p;
  trace.shells.reserve(count);
  for (std::size_t m = 0; m < count; ++m) trace.shells.push_back(shell_row(m));
  return trace;
}

// Chemin-Lerner pieces of a trace whose regularity pair is (s_inf, s_inf + 2).
std::pair<double, double> cl_pair(const NormTrace& trace, double s_inf, double q) {
  return {cl_time_norm(trace, kInf, {s_inf, trace.p, q}),
          cl_time_norm(trace, 1.0, {s_inf + 2.0, trace.p, q})};
}

}  // namespace

double SolutionSpace::x_norm(std::span<const SpectralField> V, std::span<const double> times) const {
  if (V.size() != times.size()) throw std::invalid_argument("x_norm: length mismatch");
  const auto trace = make_norm_trace(V, times, shells_, config_.p);
  const auto [a, b] = cl_pair(trace, 2.0 - 3.0 / config_.p, config_.q);
  return combine(a, b);
}

double SolutionSpace::y_norm(std::span<const SpectralField> D, std::span<const double> times) const {
  if (D.size() != times.size()) throw std::invalid_argument("y_norm: length mismatch");
  const auto trace = make_norm_trace(D, times, shells_, config_.p);
  const auto [a, b] = cl_pair(trace, -3.0 / config_.p, config_.q);
  return combine(a, b);
}

ZNormParts SolutionSpace::z_parts(const Trajectory& traj) const {
  if (traj.empty()) throw std::invalid_argument("z_norm: empty trajectory");
  ZNormParts parts;
  std::tie(parts.v_inf, parts.v_one) =
      cl_pair(velocity_trace(traj), 2.0 - 3.0 / config_.p, config_.q);
  std::tie(parts.d_inf, parts.d_one) =
      cl_pair(temperature_trace(traj), -3.0 / config_.p, config_.q);
  parts.x = combine(parts.v_inf, parts.v_one);
  parts.y = combine(parts.d_inf, parts.d_one);
  parts.z = parts.x + parts.y;
  return parts;
}

double SolutionSpace::z_distance(const Trajectory& a, const Trajectory& b) const {
  require_same_samples(a, b, "z_distance");
  const double p = config_.p;
  const auto tv = trace_of(a.size(), a.times, shells_, p,
                           [&](std::size_t m) { return shells_.shell_norms(a.V[m] - b.V[m], p); });
  const auto td = trace_of(a.size(), a.times, shells_, p,
                           [&](std::size_t m) { return shells_.shell_norms(a.D[m] - b.D[m], p); });
  const auto [vi, v1] = cl_pair(tv, 2.0 - 3.0 / p, config_.q);
  const auto [di, d1] = cl_pair(td, -3.0 / p, config_.q);
  return combine(vi, v1) + combine(di, d1);
}

// ---------------------------------------------------------------------------
// Duhamel machinery

namespace {

// One-step exact propagator of the linear part on a fixed dt:
//   acc <- E(dt) acc + W(dt) f,
// E = exp(-mu dt)[cos(w dt) I + sin(w dt) R], W = Re(z) I + Im(z) R,
// z = int_0^dt exp((-mu + i w) s) ds, mu = diff |xi|^2, w = Omega xi_3/|xi|.
// The scalar (heat) case has w = 0 and no R.
class Propagator {
 public:
  Propagator(const Grid& grid, double diffusivity, double omega, bool vector)
      : grid_(grid), diff_(diffusivity), omega_(vector ? omega : 0.0), vector_(vector) {
    if (vector_ && omega_ != 0.0) {
      rot_.resize(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.xi_norm(k) > 0.0) rot_[k] = r_matrix(grid.xi(k));
      }
    }
  }

  void set_step(double dt) {
    if (dt == dt_) return;
    dt_ = dt;
    const std::size_t size = grid_.size();
    e_cos_.assign(size, 1.0);
    e_sin_.assign(size, 0.0);
    w_re_.assign(size, dt);
    w_im_.assign(size, 0.0);
    for (std::size_t k = 0; k < size; ++k) {
      const double r = grid_.xi_norm(k);
      if (r == 0.0) continue;
      const double mu = diff_ * r * r;
      const double w = rotating() ? omega_ * grid_.xi(k)[2] / r : 0.0;
      const double decay = std::exp(-mu * dt);
      if (w == 0.0) {
        e_cos_[k] = decay;
        w_re_[k] = heat_step_weight(mu, dt);
      } else {
        e_cos_[k] = decay * std::cos(w * dt);
        e_sin_[k] = decay * std::sin(w * dt);
        const Complex z = rotating_step_weight(mu, w, dt);
        w_re_[k] = z.real();
        w_im_[k] = z.imag();
      }
    }
  }

  // acc <- E acc + W f; a null `f` means no forcing.
  void advance(SpectralField& acc, const SpectralField* f) const {
    const int nc = acc.components();
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (!rotating() || (e_sin_[k] == 0.0 && w_im_[k] == 0.0)) {
        for (int c = 0; c < nc; ++c) {
          Complex v = e_cos_[k] * acc(c, k);
          if (f) v += w_re_[k] * (*f)(c, k);
          acc(c, k) = v;
        }
        continue;
      }
      const Mat3& R = rot_[k];
      Complex a[3], fa[3], ra[3], rf[3];
      for (int c = 0; c < 3; ++c) {
        a[c] = acc(c, k);
        fa[c] = f ? (*f)(c, k) : Complex{};
      }
      for (int i = 0; i < 3; ++i) {
        ra[i] = R[i][0] * a[0] + R[i][1] * a[1] + R[i][2] * a[2];
        rf[i] = R[i][0] * fa[0] + R[i][1] * fa[1] + R[i][2] * fa[2];
      }
      for (int i = 0; i < 3; ++i) {
        acc(i, k) = e_cos_[k] * a[i] + e_sin_[k] * ra[i] + w_re_[k] * fa[i] + w_im_[k] * rf[i];
      }
    }
  }

 private:
  bool rotating() const { return vector_ && omega_ != 0.0; }

  Grid grid_;
  double diff_;
  double omega_;
  bool vector_;
  double dt_ = -1.0;
  std::vector<Mat3> rot_;
  std::vector<double> e_cos_, e_sin_, w_re_, w_im_;
};

// Forcing fields are mean-free: the xi = 0 mode carries no dynamics in the
// homogeneous spaces and the projector is undefined there.
void drop_mean(SpectralField& f) {
  for (int c = 0; c < f.components(); ++c) f(c, 0) = 0.0;
}

// lambda g P(D e_3)
SpectralField buoyancy(const SpectralField& D, const ModelParams& p) {
  SpectralField f(D.grid(), Rank::vector3);
  const double a = p.lambda * p.g;
  if (a == 0.0) return f;
  auto dst = f.component(2);
  auto src = D.component(0);
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = a * src[k];
  f = leray_project(f);
  drop_mean(f);
  return f;
}

// -lambda/2 P[div(V (x) V') + div(V' (x) V)]; `same` short-cuts V = V'.
SpectralField convection_velocity(const SpectralField& V, const SpectralField& Vp, bool same,
                                  double lambda) {
  SpectralField f = same ? nonlinear_tensor(V, V) : nonlinear_tensor(Vp, V);
  if (same) {
    f *= -lambda;
  } else {
    f += nonlinear_tensor(V, Vp);
    f *= -0.5 * lambda;
  }
  f = leray_project(f);
  drop_mean(f);
  return f;
}

// -lambda/2 [div(V D') + div(V' D)]
SpectralField convection_temperature(const SpectralField& V, const SpectralField& D,
                                     const SpectralField& Vp, const SpectralField& Dp, bool same,
                                     double lambda) {
  SpectralField f = nonlinear_tensor(Dp, V);
  if (same) {
    f *= -lambda;
  } else {
    f += nonlinear_tensor(D, Vp);
    f *= -0.5 * lambda;
  }
  drop_mean(f);
  return f;
}

bool is_zero_sequence(const std::vector<SpectralField>& fs) {
  return std::all_of(fs.begin(), fs.end(), [](const SpectralField& f) { return f.max_abs() == 0.0; });
}

// out[0] = 0, out[m+1] = E(dt_m) out[m] + W(dt_m) forcing(m).
std::vector<SpectralField> duhamel(std::span<const double> times, Propagator& prop, Rank rank,
                                   const Grid& grid,
                                   const std::function<SpectralField(std::size_t)>& forcing) {
  std::vector<SpectralField> out;
  out.reserve(times.size());
  SpectralField acc(grid, rank);
  out.push_back(acc);
  for (std::size_t m = 0; m + 1 < times.size(); ++m) {
    prop.set_step(times[m + 1] - times[m]);
    const SpectralField f = forcing(m);
    prop.advance(acc, &f);
    out.push_back(acc);
  }
  return out;
}

Propagator velocity_propagator(const Grid& grid, const ModelParams& p) {
  return Propagator(grid, p.nu, p.omega, true);
}

Propagator temperature_propagator(const Grid& grid, const ModelParams& p) {
  return Propagator(grid, p.eta, 0.0, false);
}

}  // namespace

Trajectory free_evolution(const StateX& X0, std::span<const double> times) {
  require_times(times, "free_evolution");
  X0.params.validate();
  Trajectory traj;
  traj.params = X0.params;
  traj.times.assign(times.begin(), times.end());
  traj.V.reserve(times.size());
  traj.D.reserve(times.size());
  for (double t : times) {
    traj.V.push_back(stokes_coriolis_apply(X0.V, X0.params.nu, X0.params.omega, t));
    traj.D.push_back(heat_apply(X0.D, X0.params.eta, t));
  }
  return traj;
}

std::vector<SpectralField> linear_L1(const Trajectory& X) {
  if (X.empty()) throw std::invalid_argument("linear_L1: empty trajectory");
  require_times(X.times, "linear_L1");
  auto prop = velocity_propagator(X.grid(), X.params);
  return duhamel(X.times, prop, Rank::vector3, X.grid(),
                 [&](std::size_t m) { return buoyancy(X.D[m], X.params); });
}

Trajectory linear_L(const Trajectory& X) {
  Trajectory out;
  out.params = X.params;
  out.times = X.times;
  out.V = linear_L1(X);
  out.D.assign(X.size(), SpectralField(X.grid(), Rank::scalar));
  return out;
}

std::vector<SpectralField> bilinear_B1(const Trajectory& X, const Trajectory& Xp) {
  require_same_samples(X, Xp, "bilinear_B1");
  const bool same = &X == &Xp;
  auto prop = velocity_propagator(X.grid(), X.params);
  if (is_zero_sequence(X.V) || is_zero_sequence(Xp.V)) {
    return std::vector<SpectralField>(X.size(), SpectralField(X.grid(), Rank::vector3));
  }
  return duhamel(X.times, prop, Rank::vector3, X.grid(), [&](std::size_t m) {
    return convection_velocity(X.V[m], Xp.V[m], same, X.params.lambda);
  });
}

std::vector<SpectralField> bilinear_B2(const Trajectory& X, const Trajectory& Xp) {
  require_same_samples(X, Xp, "bilinear_B2");
  const bool same = &X == &Xp;
  auto prop = temperature_propagator(X.grid(), X.params);
  return duhamel(X.times, prop, Rank::scalar, X.grid(), [&](std::size_t m) {
    return convection_temperature(X.V[m], X.D[m], Xp.V[m], Xp.D[m], same, X.params.lambda);
  });
}

Trajectory bilinear_B(const Trajectory& X, const Trajectory& Xp) {
  Trajectory out;
  out.params = X.params;
  out.times = X.times;
  out.V = bilinear_B1(X, Xp);
  out.D = bilinear_B2(X, Xp);
  return out;
}

// ---------------------------------------------------------------------------
// Fixed point

FixedPointReport fixed_point_check(double norm_L, double norm_B, double norm_X0) {
  for (double v : {norm_L, norm_B, norm_X0}) {
    if (!(v >= 0.0)) throw std::invalid_argument("fixed_point_check: norms must be >= 0");
  }
  FixedPointReport r;
  r.norm_L = norm_L;
  r.norm_B = norm_B;
  r.norm_X0 = norm_X0;
  if (!(norm_L < 1.0)) {
    r.admissible = false;
    r.ball_radius = 0.0;
    r.note = "linear operator norm >= 1: contraction argument does not apply";
    return r;
  }
  if (norm_B == 0.0) {
    r.admissible = true;
    r.ball_radius = std::numeric_limits<double>::infinity();
    r.note = "bilinear norm is zero: unconditionally admissible when |L| < 1";
    return r;
  }
  const double bound = (1.0 - norm_L) * (1.0 - norm_L) / (4.0 * norm_B);
  r.ball_radius = (1.0 - norm_L) / (2.0 * norm_B);
  r.admissible = norm_X0 < bound;
  r.note = r.admissible ? "data inside the contraction regime"
                        : "data norm exceeds (1 - |L|)^2 / (4 |B|)";
  return r;
}

const char* to_string(PicardStatus status) {
  switch (status) {
    case PicardStatus::converged: return "converged";
    case PicardStatus::diverged: return "diverged";
    case PicardStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

// X0 + L X + B(X, X), marched in one pass.
Trajectory picard_map(const Trajectory& X0traj, const Trajectory& X, const PicardOptions& opt) {
  const Grid& grid = X.grid();
  const ModelParams& p = X.params;
  auto pv = velocity_propagator(grid, p);
  auto pd = temperature_propagator(grid, p);
  Trajectory out;
  out.params = p;
  out.times = X.times;
  out.V.reserve(X.size());
  out.D.reserve(X.size());
  SpectralField acc_v(grid, Rank::vector3);
  SpectralField acc_d(grid, Rank::scalar);
  out.V.push_back(X0traj.V[0]);
  out.D.push_back(X0traj.D[0]);
  for (std::size_t m = 0; m + 1 < X.size(); ++m) {
    const double dt = X.times[m + 1] - X.times[m];
    pv.set_step(dt);
    pd.set_step(dt);
    SpectralField fv(grid, Rank::vector3);
    SpectralField fd(grid, Rank::scalar);
    if (opt.include_linear) fv += buoyancy(X.D[m], p);
    if (opt.include_bilinear) {
      fv += convection_velocity(X.V[m], X.V[m], true, p.lambda);
      fd += convection_temperature(X.V[m], X.D[m], X.V[m], X.D[m], true, p.lambda);
    }
    pv.advance(acc_v, &fv);
    pd.advance(acc_d, &fd);
    out.V.push_back(X0traj.V[m + 1] + acc_v);
    out.D.push_back(X0traj.D[m + 1] + acc_d);
  }
  return out;
}

}  // namespace

PicardResult picard_solve(const StateX& X0, double T, int M, const PicardOptions& options) {
  X0.validate(1e-9);
  if (!(options.tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");
  const auto times = uniform_times(T, M);
  const SolutionSpace space(X0.grid(), options.z);

  PicardResult result;
  const Trajectory X0traj = free_evolution(X0, times);

  OperatorNorms norms;
  if (options.norms) {
    norms = *options.norms;
  } else {
    const ProbeOptions probe{options.probe_samples, options.probe_seed};
    norms.L = options.include_linear ? estimate_L_norm(space, X0.params, times, probe) : 0.0;
    norms.B = options.include_bilinear ? estimate_B_norms(space, X0.params, times, probe).B : 0.0;
  }
  const double x0_norm = space.z_norm(X0traj);
  result.report = fixed_point_check(norms.L, norms.B, x0_norm);
  const double radius = result.report.ball_radius;
  const bool radius_usable = radius > 0.0 && std::isfinite(radius);

  Trajectory current = X0traj;
  result.iterate_norms.push_back(x0_norm);
  bool in_ball = result.report.admissible && (!radius_usable || x0_norm <= radius);
  result.status = PicardStatus::max_iterations;
  for (int n = 0; n < options.max_iter; ++n) {
    Trajectory next = picard_map(X0traj, current, options);
    const double d = space.z_distance(next, current);
    const double norm = space.z_norm(next);
    result.distances.push_back(d);
    result.iterate_norms.push_back(norm);
    result.iterations = n + 1;
    current = std::move(next);
    if (radius_usable && norm > radius * (1.0 + 1e-12)) in_ball = false;
    if (!std::isfinite(norm) || (radius_usable && norm > 10.0 * radius)) {
      result.status = PicardStatus::diverged;
      in_ball = false;
      break;
    }
    if (d < options.tol) {
      result.status = PicardStatus::converged;
      break;
    }
  }
  result.stayed_in_ball = in_ball;
  if (result.status != PicardStatus::diverged) {
    result.residual = space.z_distance(current, picard_map(X0traj, current, options));
  }
  result.solution = std::move(current);
  return result;
}

// ---------------------------------------------------------------------------
// ETD

Trajectory etd_march(const StateX& X0, double T, int M, const EtdOptions& options) {
  X0.validate(1e-9);
  if (options.substeps < 1) throw std::invalid_argument("etd_march: substeps must be >= 1");
  const auto times = uniform_times(T, M);
  const Grid& grid = X0.grid();
  const ModelParams& p = X0.params;
  auto pv = velocity_propagator(grid, p);
  auto pd = temperature_propagator(grid, p);
  const double dt = T / (static_cast<double>(M) * options.substeps);
  pv.set_step(dt);
  pd.set_step(dt);

  Trajectory out;
  out.params = p;
  out.times = times;
  SpectralField v = leray_project(X0.V);
  SpectralField d = X0.D;
  out.V.push_back(v);
  out.D.push_back(d);
  for (int m = 0; m < M; ++m) {
    for (int s = 0; s < options.substeps; ++s) {
      SpectralField fv(grid, Rank::vector3);
      SpectralField fd(grid, Rank::scalar);
      if (options.include_linear) fv += buoyancy(d, p);
      if (options.include_bilinear) {
        SpectralField nv = convection_velocity(v, v, true, p.lambda);
        SpectralField nd = convection_temperature(v, d, v, d, true, p.lambda);
        const double scale = 1.0 + std::max(v.max_abs(), d.max_abs());
        const double increment = dt * std::max(nv.max_abs(), nd.max_abs());
        if (!(increment <= options.safety * scale)) {
          throw StepRejected("etd_march: nonlinear increment " + std::to_string(increment) +
                             " exceeds safety bound at step " +
                             std::to_string(m * options.substeps + s));
        }
        fv += nv;
        fd += nd;
      }
      pv.advance(v, &fv);
      pd.advance(d, &fd);
    }
    out.V.push_back(v);
    out.D.push_back(d);
  }
  return out;
}

}  // namespace fbsq
