#include "fbsq/wellposedness_gate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fbsq/keyvalue.hpp"
#include "fbsq/operator_probes.hpp"

namespace fbsq {
namespace {

double viscous_weight(double nu, double eta) { return std::max({1.0, 1.0 / nu, 1.0 / eta}); }

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

std::string point_label(const ModelParams& p) {
  return format_double(p.nu) + ":" + format_double(p.eta) + ":" + format_double(p.lambda) + ":" +
         format_double(p.g) + ":" + format_double(p.omega);
}

bool rel_equal(double a, double b) {
  return std::abs(a - b) <= kRegimeTolerance * std::max(std::abs(a), std::abs(b));
}

// -1, 0, +1 for x below, at, above 1
int side_of_one(double x) {
  if (rel_equal(x, 1.0)) return 0;
  return x < 1.0 ? -1 : 1;
}

const char* size_word(double multiplier) {
  if (rel_equal(multiplier, 1.0)) return "unit";
  return multiplier > 1.0 ? "large" : "small";
}

}  // namespace

double ConstantSet::C() const { return C_L * std::abs(g) / (16.0 * C_B); }

double ConstantSet::C1() const { return 1.0 / (64.0 * C_B * C0); }

double ConstantSet::C2() const {
  if (g == 0.0) return std::numeric_limits<double>::infinity();
  return C() / (8.0 * C0 * C_L * C_L * g * g);
}

void ConstantSet::validate() const {
  require_positive(C_L, "C_L");
  require_positive(C_B, "C_B");
  require_positive(C0, "C0");
  if (!std::isfinite(g)) throw std::invalid_argument("g must be finite");
}

std::vector<ModelParams> ParamSweep::points() const {
  std::vector<ModelParams> out;
  for (double nu : this->nu)
    for (double eta : this->eta)
      for (double lambda : this->lambda)
        for (double g : this->g)
          for (double omega : this->omega) {
            ModelParams p{nu, eta, g, omega, lambda};
            p.validate();
            const bool seen = std::any_of(out.begin(), out.end(), [&](const ModelParams& q) {
              return q.nu == p.nu && q.eta == p.eta && q.g == p.g && q.omega == p.omega &&
                     q.lambda == p.lambda;
            });
            if (!seen) out.push_back(p);
          }
  return out;
}

Calibration calibrate_constants(const Grid& grid, int samples, std::uint64_t seed,
                                const ParamSweep& sweep, const CalibrationOptions& options) {
  if (samples < 32) throw std::invalid_argument("calibrate_constants: samples must be >= 32");
  const auto points = sweep.points();
  if (points.size() < 2) {
    throw std::invalid_argument("calibrate_constants: sweep needs at least two parameter points");
  }
  if (std::none_of(points.begin(), points.end(), [](const ModelParams& p) { return p.g != 0.0; })) {
    throw std::invalid_argument("calibrate_constants: C_L needs a sweep point with g != 0");
  }

  const SolutionSpace space(grid, options.z);
  const auto times = uniform_times(options.T, options.steps);

  Calibration cal;
  ConstantSet& c = cal.constants;
  c.C_L = c.C_B = c.C0 = 0.0;
  c.meta.n = grid.n();
  c.meta.box_scale = grid.box_scale();
  c.meta.samples = samples;
  c.meta.seed = seed;
  c.meta.T = options.T;
  c.meta.steps = options.steps;
  c.meta.z = options.z;

  SplitMix64 seeds(seed);
  for (const ModelParams& p : points) {
    CalibrationPoint pt;
    pt.params = p;
    const ProbeOptions probe{samples, seeds.next()};
    if (p.g != 0.0) {
      pt.L = estimate_L_norm(space, p, times, probe);
      pt.L_ratio = pt.L * p.nu / (p.lambda * std::abs(p.g));
    }
    pt.B = estimate_B_norms(space, p, times, probe).B;
    pt.B_ratio = pt.B / (p.lambda * viscous_weight(p.nu, p.eta));
    pt.data_ratio = estimate_data_constant(space, p, times, probe);

    c.C_L = std::max(c.C_L, pt.L_ratio);
    c.C_B = std::max(c.C_B, pt.B_ratio);
    c.C0 = std::max(c.C0, pt.data_ratio);
    c.meta.sweep.push_back(point_label(p));
    cal.points.push_back(pt);
  }
  c.validate();
  return cal;
}

double lambda0(const ConstantSet& consts, double nu, double g) {
  require_positive(nu, "lambda0: nu");
  if (g == 0.0) return std::numeric_limits<double>::infinity();
  return nu / (2.0 * consts.C_L * std::abs(g));
}

double epsilon0(const ConstantSet& consts, double nu, double eta) {
  require_positive(nu, "epsilon0: nu");
  require_positive(eta, "epsilon0: eta");
  if (consts.g == 0.0) return 1.0 / (4.0 * consts.C_B * viscous_weight(nu, eta));
  return consts.C() * std::min({1.0, nu, eta}) / nu;
}

double epsilon0_lemma_form(const ConstantSet& consts, double nu, double eta) {
  require_positive(nu, "epsilon0_lemma_form: nu");
  require_positive(eta, "epsilon0_lemma_form: eta");
  if (consts.g == 0.0) throw std::invalid_argument("epsilon0_lemma_form: requires g != 0");
  const double l0 = lambda0(consts, nu, consts.g);
  const double gap = 1.0 - consts.C_L * l0 * std::abs(consts.g) / nu;
  return gap * gap / (4.0 * consts.C_B * l0 * viscous_weight(nu, eta));
}

const char* to_string(GateFormulation f) {
  return f == GateFormulation::rescaled ? "rescaled" : "original";
}

GateReport gate_rescaled(double V0norm, double D0norm, double nu, double eta,
                         const ConstantSet& consts) {
  if (!(V0norm >= 0.0) || !(D0norm >= 0.0)) {
    throw std::invalid_argument("gate_rescaled: data norms must be >= 0");
  }
  consts.validate();
  GateReport r;
  r.formulation = GateFormulation::rescaled;
  r.lambda0 = lambda0(consts, nu, consts.g);
  r.lambda = std::isfinite(r.lambda0) ? r.lambda0 : 1.0;
  r.epsilon0 = epsilon0(consts, nu, eta);
  r.threshold = r.epsilon0 / consts.C0;
  r.lhs = V0norm / nu + D0norm / eta;
  r.admissible = r.lhs < r.threshold;
  if (consts.g == 0.0) r.warnings.push_back("g = 0: buoyancy-free smallness level used");
  return r;
}

GateReport gate_original(double u0norm, double th0norm, double nu, double eta, double lambda,
                         const ConstantSet& consts) {
  require_positive(lambda, "gate_original: lambda");
  GateReport r = gate_rescaled(u0norm / lambda, th0norm / (lambda * lambda), nu, eta, consts);
  r.formulation = GateFormulation::original;
  r.lambda = lambda;
  if (lambda > r.lambda0) {
    r.lambda_exceeds_lambda0 = true;
    r.admissible = false;
    r.warnings.push_back("lambda exceeds lambda0: the linear term is not a contraction");
  }
  return r;
}

void write_gate_report(std::ostream& out, const GateReport& r) {
  KeyValues kv;
  kv["gate.formulation"] = to_string(r.formulation);
  kv["gate.lambda"] = format_double(r.lambda);
  kv["gate.lambda0"] = format_double(r.lambda0);
  kv["gate.epsilon0"] = format_double(r.epsilon0);
  kv["gate.lhs"] = format_double(r.lhs);
  kv["gate.threshold"] = format_double(r.threshold);
  kv["gate.admissible"] = r.admissible ? "true" : "false";
  kv["gate.lambda_exceeds_lambda0"] = r.lambda_exceeds_lambda0 ? "true" : "false";
  write_key_values(out, kv);
  for (const auto& w : r.warnings) out << "# warning: " << w << '\n';
}

StateX rescale(const SpectralField& u, const SpectralField& theta, double lambda,
               ModelParams params) {
  require_positive(lambda, "rescale: lambda");
  params.lambda = lambda;
  return StateX((1.0 / lambda) * u, (1.0 / (lambda * lambda)) * theta, params);
}

std::pair<SpectralField, SpectralField> unrescale(const StateX& X) {
  const double lambda = X.params.lambda;
  require_positive(lambda, "unrescale: lambda");
  return {lambda * X.V, (lambda * lambda) * X.D};
}

RegimeReport classify_regime(double nu, double eta, const ConstantSet& consts) {
  require_positive(nu, "classify_regime: nu");
  require_positive(eta, "classify_regime: eta");
  const int sn = side_of_one(nu);
  const int se = side_of_one(eta);

  // Bounds are C1 * mu and C2 * th with the multipliers below.
  RegimeReport r;
  double mu = 1.0;
  double th = 1.0;
  auto set = [&](const char* label, double m_u, const char* f_u, double m_th, const char* f_th) {
    r.label = label;
    mu = m_u;
    th = m_th;
    r.u_formula = f_u;
    r.theta_formula = f_th;
  };

  if (sn == 0) {
    if (se == 0) set("a1", 1.0, "C1", 1.0, "C2");
    else if (se < 0) set("a2", eta, "C1*eta", eta * eta, "C2*eta^2");
    else set("a3", 1.0, "C1", eta, "C2*eta");
  } else if (sn < 0) {
    if (se == 0) {
      set("b1", nu * nu, "C1*nu^2", nu * nu, "C2*nu^2");
    } else if (se < 0) {
      const double k = std::min(nu, eta);
      set("b2", k * k, "C1*k^2", k * k * k, "C2*k^3");
    } else {
      set("b3", nu * nu, "C1*nu^2", eta * nu * nu, "C2*eta*nu^2");
      r.top_level = "b3";
      if (rel_equal(eta, 1.0 / nu)) set("b3.i", nu * nu, "C1*nu^2", nu, "C2*nu");
      else if (rel_equal(eta, 1.0 / (nu * nu))) set("b3.ii", nu * nu, "C1*nu^2", 1.0, "C2");
      else if (rel_equal(eta, 1.0 / (nu * nu * nu))) set("b3.iii", nu * nu, "C1*nu^2", 1.0 / nu, "C2/nu");
    }
  } else {
    if (se == 0) {
      set("c1", nu, "C1*nu", nu, "C2*nu");
    } else if (se < 0) {
      set("c2", nu * eta, "C1*nu*eta", nu * eta * eta, "C2*nu*eta^2");
      r.top_level = "c2";
      if (rel_equal(nu, 1.0 / eta)) set("c2.i", 1.0, "C1", eta, "C2*eta");
      else if (rel_equal(nu, 1.0 / (eta * eta))) set("c2.ii", 1.0 / eta, "C1/eta", 1.0, "C2");
      else if (rel_equal(nu, 1.0 / (eta * eta * eta))) set("c2.iii", 1.0 / (eta * eta), "C1/eta^2", 1.0 / eta, "C2/eta");
    } else {
      set("c3", nu, "C1*nu", nu * eta, "C2*nu*eta");
    }
  }
  if (r.top_level.empty()) r.top_level = r.label;
  r.u_bound = consts.C1() * mu;
  r.theta_bound = consts.C2() * th;
  r.tag = std::string("velocity ") + size_word(mu) + ", temperature " + size_word(th);
  return r;
}

void write_constants_cache(const std::filesystem::path& path, const ConstantSet& c) {
  c.validate();
  KeyValues kv;
  kv["constants.C_L"] = format_double(c.C_L);
  kv["constants.C_B"] = format_double(c.C_B);
  kv["constants.C0"] = format_double(c.C0);
  kv["calibration.n"] = std::to_string(c.meta.n);
  kv["calibration.L"] = format_double(c.meta.box_scale);
  kv["calibration.samples"] = std::to_string(c.meta.samples);
  kv["calibration.seed"] = std::to_string(c.meta.seed);
  kv["calibration.T"] = format_double(c.meta.T);
  kv["calibration.steps"] = std::to_string(c.meta.steps);
  kv["calibration.p"] = format_double(c.meta.z.p);
  kv["calibration.q"] = format_double(c.meta.z.q);
  kv["calibration.intersection"] = c.meta.z.intersection == IntersectionNorm::max ? "max" : "sum";
  kv["calibration.prng"] = c.meta.prng;
  std::string sweep;
  for (const auto& s : c.meta.sweep) sweep += (sweep.empty() ? "" : " ") + s;
  kv["calibration.sweep"] = sweep;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# constants cache; sweep points are nu:eta:lambda:g:omega\n";
  write_key_values(out, kv);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ConstantSet read_constants_cache(const std::filesystem::path& path) {
  const KeyValues kv = read_key_values(path);
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(path.string() + ": missing key " + key);
    return it->second;
  };
  ConstantSet c;
  c.C_L = parse_double(get("constants.C_L"), "constants.C_L");
  c.C_B = parse_double(get("constants.C_B"), "constants.C_B");
  c.C0 = parse_double(get("constants.C0"), "constants.C0");
  c.meta.n = static_cast<int>(parse_integer(get("calibration.n"), "calibration.n"));
  c.meta.box_scale = parse_double(get("calibration.L"), "calibration.L");
  c.meta.samples = static_cast<int>(parse_integer(get("calibration.samples"), "calibration.samples"));
  c.meta.seed = parse_unsigned(get("calibration.seed"), "calibration.seed");
  c.meta.T = parse_double(get("calibration.T"), "calibration.T");
  c.meta.steps = static_cast<int>(parse_integer(get("calibration.steps"), "calibration.steps"));
  c.meta.z.p = parse_double(get("calibration.p"), "calibration.p");
  c.meta.z.q = parse_double(get("calibration.q"), "calibration.q");
  const std::string& inter = get("calibration.intersection");
  if (inter != "max" && inter != "sum") throw ConfigError("calibration.intersection: max or sum");
  c.meta.z.intersection = inter == "max" ? IntersectionNorm::max : IntersectionNorm::sum;
  c.meta.prng = get("calibration.prng");
  std::istringstream sweep(get("calibration.sweep"));
  for (std::string s; sweep >> s;) c.meta.sweep.push_back(s);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return c;
}

std::vector<std::string> cache_incompatibilities(const ConstantSet& consts, const Grid& grid,
                                                 const ZNormConfig& z) {
  std::vector<std::string> why;
  const auto& m = consts.meta;
  if (m.n != grid.n()) {
    why.push_back("grid n " + std::to_string(m.n) + " != " + std::to_string(grid.n()));
  }
  if (m.box_scale != grid.box_scale()) {
    why.push_back("box scale " + format_double(m.box_scale) + " != " +
                  format_double(grid.box_scale()));
  }
  if (m.z.p != z.p || m.z.q != z.q) {
    why.push_back("besov (p, q) = (" + format_double(m.z.p) + ", " + format_double(m.z.q) +
                  ") != (" + format_double(z.p) + ", " + format_double(z.q) + ")");
  }
  if (m.z.intersection != z.intersection) why.push_back("intersection norm differs");
  return why;
}

}  // namespace fbsq
