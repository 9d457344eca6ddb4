#include "fbsq/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace fbsq {
namespace {

// Reads keys out of a KeyValues and remembers which ones were consumed.
class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  const std::string* find(const std::string& key) {
    used_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }

  void real(const std::string& key, double& x) {
    if (auto v = find(key)) x = parse_double(*v, key);
  }
  void integer(const std::string& key, int& x) {
    if (auto v = find(key)) {
      const long long y = parse_integer(*v, key);
      if (y < INT32_MIN || y > INT32_MAX) throw ConfigError(key + ": out of range");
      x = static_cast<int>(y);
    }
  }
  void optional_integer(const std::string& key, std::optional<int>& x) {
    if (find(key)) {
      int y = 0;
      integer(key, y);
      x = y;
    }
  }
  void boolean(const std::string& key, bool& x) {
    if (auto v = find(key)) x = parse_bool(*v, key);
  }
  void list(const std::string& key, std::vector<double>& x) {
    if (auto v = find(key)) x = parse_double_list(*v, key);
  }
  void int_list(const std::string& key, std::vector<int>& x) {
    if (auto v = find(key)) {
      x.clear();
      for (double d : parse_double_list(*v, key)) {
        if (d != std::floor(d) || std::abs(d) > 1e6) throw ConfigError(key + ": expected integers");
        x.push_back(static_cast<int>(d));
      }
    }
  }
  void path(const std::string& key, std::filesystem::path& x) {
    if (auto v = find(key)) x = *v;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : kv_) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  const KeyValues& kv_;
  std::set<std::string> used_;
};

std::string int_list_text(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
  return s;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::vector<std::string> besov_index_warnings(double p, double q) {
  const bool c1 = p > 3.0 && q >= 1.0;
  const bool c2 = p == 3.0 && q == 1.0;
  if (c1 || c2) return {};
  return {"besov indices (p, q) = (" + format_double(p) + ", " + format_double(q) +
          ") are outside the well-posedness range (3 < p <= inf, or p = 3 with q = 1); "
          "results are reported but not covered by the theorem"};
}

RunConfig parse_run_config(const KeyValues& kv, std::vector<std::string>* warnings) {
  RunConfig c;
  Reader r(kv);

  r.integer("grid.n", c.n);
  r.real("grid.L", c.box_scale);

  r.real("model.nu", c.model.nu);
  r.real("model.eta", c.model.eta);
  r.real("model.g", c.model.g);
  r.real("model.omega", c.model.omega);
  r.real("model.lambda", c.model.lambda);

  r.real("besov.p", c.z.p);
  r.real("besov.q", c.z.q);
  if (auto v = r.find("besov.intersection")) {
    require(*v == "max" || *v == "sum", "besov.intersection: expected max or sum");
    c.z.intersection = *v == "max" ? IntersectionNorm::max : IntersectionNorm::sum;
  }
  r.list("besov.s", c.s_list);

  r.real("time.T", c.T);
  r.integer("time.steps", c.steps);
  r.real("time.tol", c.tol);
  r.integer("time.max_iter", c.max_iter);

  if (auto v = r.find("initial.kind")) {
    try {
      c.initial.kind = parse_initial_kind(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  std::vector<int> mode;
  r.int_list("initial.mode", mode);
  if (!mode.empty()) {
    require(mode.size() == 3, "initial.mode: expected three integers");
    c.initial.mode = {mode[0], mode[1], mode[2]};
  }
  r.real("initial.velocity_amplitude", c.initial.velocity_amplitude);
  r.real("initial.temperature_amplitude", c.initial.temperature_amplitude);
  r.int_list("initial.shells", c.initial.shells);
  r.list("initial.velocity_amplitudes", c.initial.velocity_amplitudes);
  r.list("initial.temperature_amplitudes", c.initial.temperature_amplitudes);
  r.path("initial.velocity_file", c.initial.velocity_file);
  r.path("initial.temperature_file", c.initial.temperature_file);

  if (auto v = r.find("run.seed")) c.seed = parse_unsigned(*v, "run.seed");
  r.path("run.out", c.out);

  r.integer("probe.samples", c.probe_samples);

  r.list("calibrate.nu", c.sweep.nu);
  r.list("calibrate.eta", c.sweep.eta);
  r.list("calibrate.lambda", c.sweep.lambda);
  r.list("calibrate.g", c.sweep.g);
  r.list("calibrate.omega", c.sweep.omega);
  r.integer("calibrate.samples", c.calibrate_samples);
  r.real("calibrate.T", c.calibrate_T);
  r.integer("calibrate.steps", c.calibrate_steps);

  r.path("gate.cache", c.cache);
  r.boolean("gate.force", c.force);
  if (auto v = r.find("gate.lambda")) {
    if (*v != "auto") c.gate_lambda = parse_double(*v, "gate.lambda");
  }

  r.real("regimes.nu_min", c.nu_min);
  r.real("regimes.nu_max", c.nu_max);
  r.integer("regimes.nu_points", c.nu_points);
  r.real("regimes.eta_min", c.eta_min);
  r.real("regimes.eta_max", c.eta_max);
  r.integer("regimes.eta_points", c.eta_points);
  if (auto v = r.find("regimes.spacing")) {
    require(*v == "log" || *v == "linear", "regimes.spacing: expected log or linear");
    c.log_spacing = *v == "log";
  }

  r.integer("verify.n", c.verify_n);
  r.optional_integer("verify.j_min", c.verify_j_min);
  r.optional_integer("verify.j_max", c.verify_j_max);

  r.reject_unknown();

  // Semantic checks.
  try {
    make_grid(c.n, c.box_scale);
    make_grid(c.verify_n, c.box_scale);
    c.model.validate();
    BesovSpec{0.0, c.z.p, c.z.q}.validate();
    validate(c.initial);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (double s : c.s_list) require(std::isfinite(s), "besov.s: entries must be finite");
  require(c.T > 0.0 && std::isfinite(c.T), "time.T must be positive");
  require(c.steps >= 1, "time.steps must be >= 1");
  require(c.tol > 0.0, "time.tol must be positive");
  require(c.max_iter >= 1, "time.max_iter must be >= 1");
  require(c.probe_samples >= 1, "probe.samples must be >= 1");
  require(c.calibrate_samples >= 1, "calibrate.samples must be >= 1");
  require(c.calibrate_T > 0.0 && std::isfinite(c.calibrate_T), "calibrate.T must be positive");
  require(c.calibrate_steps >= 1, "calibrate.steps must be >= 1");
  for (const auto* xs : {&c.sweep.nu, &c.sweep.eta, &c.sweep.lambda, &c.sweep.g, &c.sweep.omega}) {
    require(!xs->empty(), "calibrate: sweep lists must be non-empty");
  }
  if (c.gate_lambda) require(*c.gate_lambda > 0.0, "gate.lambda must be positive or auto");
  require(c.nu_points >= 1 && c.eta_points >= 1, "regimes: point counts must be >= 1");
  require(c.nu_min > 0.0 && c.nu_min <= c.nu_max, "regimes: need 0 < nu_min <= nu_max");
  require(c.eta_min > 0.0 && c.eta_min <= c.eta_max, "regimes: need 0 < eta_min <= eta_max");
  require(c.verify_j_min.has_value() == c.verify_j_max.has_value(),
          "verify.j_min and verify.j_max go together");

  if (warnings) {
    for (auto& w : besov_index_warnings(c.z.p, c.z.q)) warnings->push_back(std::move(w));
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return parse_run_config(read_key_values(path), warnings);
}

KeyValues serialize(const RunConfig& c) {
  KeyValues kv;
  kv["grid.n"] = std::to_string(c.n);
  kv["grid.L"] = format_double(c.box_scale);
  kv["model.nu"] = format_double(c.model.nu);
  kv["model.eta"] = format_double(c.model.eta);
  kv["model.g"] = format_double(c.model.g);
  kv["model.omega"] = format_double(c.model.omega);
  kv["model.lambda"] = format_double(c.model.lambda);
  kv["besov.p"] = format_double(c.z.p);
  kv["besov.q"] = format_double(c.z.q);
  kv["besov.intersection"] = c.z.intersection == IntersectionNorm::max ? "max" : "sum";
  if (!c.s_list.empty()) kv["besov.s"] = format_double_list(c.s_list);
  kv["time.T"] = format_double(c.T);
  kv["time.steps"] = std::to_string(c.steps);
  kv["time.tol"] = format_double(c.tol);
  kv["time.max_iter"] = std::to_string(c.max_iter);
  kv["initial.kind"] = to_string(c.initial.kind);
  kv["initial.mode"] = int_list_text({c.initial.mode[0], c.initial.mode[1], c.initial.mode[2]});
  kv["initial.velocity_amplitude"] = format_double(c.initial.velocity_amplitude);
  kv["initial.temperature_amplitude"] = format_double(c.initial.temperature_amplitude);
  if (!c.initial.shells.empty()) kv["initial.shells"] = int_list_text(c.initial.shells);
  if (!c.initial.velocity_amplitudes.empty()) {
    kv["initial.velocity_amplitudes"] = format_double_list(c.initial.velocity_amplitudes);
  }
  if (!c.initial.temperature_amplitudes.empty()) {
    kv["initial.temperature_amplitudes"] = format_double_list(c.initial.temperature_amplitudes);
  }
  if (!c.initial.velocity_file.empty()) kv["initial.velocity_file"] = c.initial.velocity_file.string();
  if (!c.initial.temperature_file.empty()) {
    kv["initial.temperature_file"] = c.initial.temperature_file.string();
  }
  kv["run.seed"] = std::to_string(c.seed);
  kv["run.out"] = c.out.string();
  kv["probe.samples"] = std::to_string(c.probe_samples);
  kv["calibrate.nu"] = format_double_list(c.sweep.nu);
  kv["calibrate.eta"] = format_double_list(c.sweep.eta);
  kv["calibrate.lambda"] = format_double_list(c.sweep.lambda);
  kv["calibrate.g"] = format_double_list(c.sweep.g);
  kv["calibrate.omega"] = format_double_list(c.sweep.omega);
  kv["calibrate.samples"] = std::to_string(c.calibrate_samples);
  kv["calibrate.T"] = format_double(c.calibrate_T);
  kv["calibrate.steps"] = std::to_string(c.calibrate_steps);
  if (!c.cache.empty()) kv["gate.cache"] = c.cache.string();
  kv["gate.force"] = c.force ? "true" : "false";
  kv["gate.lambda"] = c.gate_lambda ? format_double(*c.gate_lambda) : "auto";
  kv["regimes.nu_min"] = format_double(c.nu_min);
  kv["regimes.nu_max"] = format_double(c.nu_max);
  kv["regimes.nu_points"] = std::to_string(c.nu_points);
  kv["regimes.eta_min"] = format_double(c.eta_min);
  kv["regimes.eta_max"] = format_double(c.eta_max);
  kv["regimes.eta_points"] = std::to_string(c.eta_points);
  kv["regimes.spacing"] = c.log_spacing ? "log" : "linear";
  kv["verify.n"] = std::to_string(c.verify_n);
  if (c.verify_j_min) kv["verify.j_min"] = std::to_string(*c.verify_j_min);
  if (c.verify_j_max) kv["verify.j_max"] = std::to_string(*c.verify_j_max);
  return kv;
}

std::uint64_t config_hash(const RunConfig& config) {
  // The output location does not affect any result.
  KeyValues kv = serialize(config);
  kv.erase("run.out");
  std::ostringstream os;
  write_key_values(os, kv);
  return fnv1a64(os.str());
}

std::string config_hash_hex(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return buf;
}

}  // namespace fbsq
