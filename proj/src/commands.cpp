#include "fbsq/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fbsq/initial_data.hpp"
#include "fbsq/snapshot_io.hpp"
#include "fbsq/verify.hpp"
#include "fbsq/wellposedness_gate.hpp"

namespace fbsq {
namespace fs = std::filesystem;
namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs `body`, mapping every exception to a message and exit code 1.
template <class F>
int guarded(const char* name, CommandIO io, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    io.err << "fbsq " << name << ": " << e.what() << '\n';
    return kExitUsage;
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure("cannot write " + path.string());
  return f;
}

void finish(std::ofstream& f, const fs::path& path) {
  f.flush();
  if (!f) throw Failure("write failed: " + path.string());
}

ConstantSet load_constants(const RunConfig& config, const Grid& grid, CommandIO io) {
  const fs::path path = config.cache_path();
  if (!fs::exists(path)) {
    throw Failure("no constants cache at " + path.string() +
                  "; run `fbsq calibrate` with the same grid and besov settings first");
  }
  ConstantSet consts = read_constants_cache(path);
  const auto problems = cache_incompatibilities(consts, grid, config.z);
  if (!problems.empty()) {
    std::string msg = "constants cache " + path.string() + " does not match this run:";
    for (const auto& p : problems) msg += "\n  " + p;
    if (!config.force) throw Failure(msg + "\n(set gate.force = true to use it anyway)");
    if (!io.quiet) io.err << "warning: " << msg << "\n(gate.force is set; continuing)\n";
  }
  consts.g = config.model.g;
  return consts;
}

nlohmann::json number(double x) {
  // JSON has no infinities; they are written as strings.
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

nlohmann::json numbers(const std::vector<double>& xs) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

std::vector<double> log_or_linear(double lo, double hi, int points, bool log_spacing,
                                  const char* name) {
  if (points < 1) throw ConfigError(std::string(name) + ": empty range (points < 1)");
  if (!(lo <= hi)) throw ConfigError(std::string(name) + ": empty range (min > max)");
  if (!(lo > 0.0)) throw ConfigError(std::string(name) + ": values must be positive");
  if (points == 1) {
    if (lo != hi) throw ConfigError(std::string(name) + ": a single point needs min = max");
    return {lo};
  }
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    xs[i] = log_spacing ? lo * std::pow(hi / lo, f)
                        : lo + f * (hi - lo);
  }
  xs.back() = hi;  // no round-off at the end point
  return xs;
}

void print_constants(std::ostream& out, const ConstantSet& c) {
  KeyValues kv;
  kv["constants.C_L"] = format_double(c.C_L);
  kv["constants.C_B"] = format_double(c.C_B);
  kv["constants.C0"] = format_double(c.C0);
  kv["constants.C"] = format_double(c.C());
  kv["constants.C1"] = format_double(c.C1());
  kv["constants.C2"] = format_double(c.C2());
  kv["constants.g"] = format_double(c.g);
  write_key_values(out, kv);
}

}  // namespace

std::string output_comment(const RunConfig& config) {
  return "config_hash=" + config_hash_hex(config) + " seed=" + std::to_string(config.seed) +
         " prng=" + std::string(SplitMix64::kAlgorithm);
}

int cmd_simulate(const RunConfig& config, CommandIO io) {
  return guarded("simulate", io, [&] {
    const Grid grid = make_grid(config.n, config.box_scale);
    const SolutionSpace space(grid, config.z);
    SplitMix64 rng(config.seed);
    auto [u0, th0] = make_initial_data(space, config.initial, rng);
    const StateX X0 = rescale(u0, th0, config.model.lambda, config.model);

    PicardOptions opt;
    opt.tol = config.tol;
    opt.max_iter = config.max_iter;
    opt.z = config.z;
    opt.probe_samples = config.probe_samples;
    opt.probe_seed = rng.next();
    if (!io.quiet) io.err << "simulate: n=" << config.n << " M=" << config.steps << " T=" << config.T << '\n';
    const PicardResult res = picard_solve(X0, config.T, config.steps, opt);
    const Trajectory& X = res.solution;

    fs::create_directories(config.out);
    const std::string comment = output_comment(config);
    const BesovSpec vspec = space.velocity_data_spec();
    const BesovSpec tspec = space.temperature_data_spec();
    {
      const fs::path p = config.out / "trajectory.fbsq";
      write_trajectory_file(p, X);
    }
    {
      const fs::path p = config.out / "norms.csv";
      std::ofstream f = open_output(p);
      write_norm_trace_csv(f, space.velocity_trace(X), vspec, comment);
      finish(f, p);
    }
    {
      const fs::path p = config.out / "norms_temperature.csv";
      std::ofstream f = open_output(p);
      write_norm_trace_csv(f, space.temperature_trace(X), tspec, comment);
      finish(f, p);
    }

    const bool inside = res.report.admissible;
    nlohmann::json j;
    j["status"] = to_string(res.status);
    j["iterations"] = res.iterations;
    j["regime"] = inside ? "inside fixed-point ball" : "outside theorem regime";
    j["distances"] = numbers(res.distances);
    j["iterate_norms"] = numbers(res.iterate_norms);
    j["residual"] = number(res.residual);
    j["stayed_in_ball"] = res.stayed_in_ball;
    j["fixed_point"] = {{"norm_L", number(res.report.norm_L)},
                        {"norm_B", number(res.report.norm_B)},
                        {"norm_X0", number(res.report.norm_X0)},
                        {"admissible", res.report.admissible},
                        {"ball_radius", number(res.report.ball_radius)},
                        {"note", res.report.note}};
    j["lambda"] = config.model.lambda;
    j["max_divergence"] = number(max_divergence(X));
    j["data_norms"] = {{"u0", number(space.velocity_data_norm(u0))},
                       {"theta0", number(space.temperature_data_norm(th0))}};
    nlohmann::json extra = nlohmann::json::array();
    for (double s : config.s_list) {
      const BesovSpec spec{s, config.z.p, config.z.q};
      extra.push_back({{"s", s},
                       {"velocity", number(fb_norm(X.V.back(), space.partition(), spec))},
                       {"temperature", number(fb_norm(X.D.back(), space.partition(), spec))}});
    }
    j["final_fb_norms"] = extra;
    j["config_hash"] = config_hash_hex(config);
    j["seed"] = config.seed;
    j["prng"] = SplitMix64::kAlgorithm;
    {
      const fs::path p = config.out / "report.json";
      std::ofstream f = open_output(p);
      f << j.dump(2) << '\n';
      finish(f, p);
    }

    if (!io.quiet) {
      io.err << "simulate: " << to_string(res.status) << " after " << res.iterations
             << " iterations; " << (inside ? "data inside the fixed-point ball" : "outside theorem regime")
             << "; results in " << config.out.string() << '\n';
    }
    return res.status == PicardStatus::converged ? kExitOk : kExitFailed;
  });
}

int cmd_gate(const RunConfig& config, CommandIO io) {
  return guarded("gate", io, [&] {
    const Grid grid = make_grid(config.n, config.box_scale);
    const ConstantSet consts = load_constants(config, grid, io);
    const SolutionSpace space(grid, config.z);
    SplitMix64 rng(config.seed);
    auto [u0, th0] = make_initial_data(space, config.initial, rng);
    const double un = space.velocity_data_norm(u0);
    const double tn = space.temperature_data_norm(th0);

    const ModelParams& m = config.model;
    const double l0 = lambda0(consts, m.nu, m.g);
    // With g = 0 there is no lambda0 to sit at; the configured lambda is used.
    const double lambda = config.gate_lambda ? *config.gate_lambda : (std::isfinite(l0) ? l0 : m.lambda);
    const GateReport r = gate_original(un, tn, m.nu, m.eta, lambda, consts);

    KeyValues kv;
    kv["data.u0_norm"] = format_double(un);
    kv["data.theta0_norm"] = format_double(tn);
    write_key_values(io.out, kv);
    print_constants(io.out, consts);
    write_gate_report(io.out, r);
    return r.admissible ? kExitOk : kExitNotAdmissible;
  });
}

int cmd_regimes(const RunConfig& config, CommandIO io) {
  return guarded("regimes", io, [&] {
    const auto nus = log_or_linear(config.nu_min, config.nu_max, config.nu_points, config.log_spacing, "regimes.nu");
    const auto etas = log_or_linear(config.eta_min, config.eta_max, config.eta_points, config.log_spacing, "regimes.eta");
    const Grid grid = make_grid(config.n, config.box_scale);
    const ConstantSet consts = load_constants(config, grid, io);

    std::ostringstream csv;
    csv << "# " << output_comment(config) << '\n' << "nu, eta, case, u_bound, theta_bound\n";
    for (double nu : nus) {
      for (double eta : etas) {
        const RegimeReport r = classify_regime(nu, eta, consts);
        csv << format_double(nu) << ", " << format_double(eta) << ", " << r.label << ", "
            << format_double(r.u_bound) << ", " << format_double(r.theta_bound) << '\n';
      }
    }
    const fs::path p = config.out / "regimes.csv";
    std::ofstream f = open_output(p);
    f << csv.str();
    finish(f, p);
    io.out << csv.str();
    return kExitOk;
  });
}

int cmd_calibrate(const RunConfig& config, CommandIO io) {
  return guarded("calibrate", io, [&] {
    const Grid grid = make_grid(config.n, config.box_scale);
    CalibrationOptions opt;
    opt.T = config.calibrate_T;
    opt.steps = config.calibrate_steps;
    opt.z = config.z;
    if (!io.quiet) {
      io.err << "calibrate: " << config.sweep.points().size() << " parameter points, "
             << config.calibrate_samples << " probes each\n";
    }
    Calibration cal = calibrate_constants(grid, config.calibrate_samples, config.seed, config.sweep, opt);
    cal.constants.g = config.model.g;

    const fs::path path = config.cache_path();
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_constants_cache(path, cal.constants);

    print_constants(io.out, cal.constants);
    if (!io.quiet) {
      io.err << "calibrate: per-point ratios (nu, eta, lambda, g, omega: |L|nu/(lambda|g|), |B|/(lambda max), data)\n";
      for (const auto& pt : cal.points) {
        const ModelParams& q = pt.params;
        io.err << "  " << q.nu << ' ' << q.eta << ' ' << q.lambda << ' ' << q.g << ' ' << q.omega
               << ": " << pt.L_ratio << ' ' << pt.B_ratio << ' ' << pt.data_ratio << '\n';
      }
      io.err << "calibrate: wrote " << path.string() << '\n';
    }
    return kExitOk;
  });
}

int cmd_verify(const RunConfig& config, CommandIO io, VerifyHooks hooks) {
  return guarded("verify", io, [&] {
    VerifyOptions opt;
    opt.n = config.verify_n;
    opt.box_scale = config.box_scale;
    opt.seed = config.seed;
    opt.j_min = config.verify_j_min;
    opt.j_max = config.verify_j_max;
    opt.inject_r_fault = hooks.inject_r_fault;
    if (!io.quiet) {
      opt.on_check = [&](const CheckResult& c) {
        io.err << (c.passed ? "pass " : "FAIL ") << c.module << '.' << c.name << '\n';
      };
    }
    const VerifyReport report = run_verify(opt);

    const fs::path p = config.out / "verify.json";
    std::ofstream f = open_output(p);
    write_verify_json(f, report);
    finish(f, p);

    const auto failures = report.failures();
    io.out << "verify: " << report.checks.size() - failures.size() << '/' << report.checks.size()
           << " checks passed in " << format_double(std::round(report.seconds * 10) / 10) << " s\n";
    for (const CheckResult* c : failures) {
      io.out << "failed: " << c->module << '.' << c->name << " value=" << c->value
             << " tolerance=" << c->tolerance;
      if (!c->detail.empty()) io.out << " (" << c->detail << ')';
      io.out << '\n';
    }
    return failures.empty() ? kExitOk : kExitFailed;
  });
}

}  // namespace fbsq
