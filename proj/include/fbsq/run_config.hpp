#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fbsq/initial_data.hpp"
#include "fbsq/keyvalue.hpp"
#include "fbsq/wellposedness_gate.hpp"

namespace fbsq {

/// Every setting of a run. Keys are listed in README.md; absent keys keep
/// the defaults below.
struct RunConfig {
  // grid.*
  int n = 16;
  double box_scale = 1.0;
  // model.*
  ModelParams model;
  // besov.*: p, q, intersection; `s` lists extra regularities reported for the final state
  ZNormConfig z;
  std::vector<double> s_list;
  // time.*
  double T = 0.5;
  int steps = 32;
  double tol = 1e-10;
  int max_iter = 50;
  // initial.*
  InitialSpec initial;
  // run.*
  std::uint64_t seed = 1;
  std::filesystem::path out = "fbsq_out";
  // probe.*
  int probe_samples = 64;
  // calibrate.*
  ParamSweep sweep;
  int calibrate_samples = 128;
  double calibrate_T = 0.5;
  int calibrate_steps = 32;
  // gate.*
  std::filesystem::path cache;  // empty: <out>/constants.cache
  bool force = false;
  std::optional<double> gate_lambda;  // empty: lambda0
  // regimes.*
  double nu_min = 0.1, nu_max = 10.0;
  int nu_points = 5;
  double eta_min = 0.1, eta_max = 10.0;
  int eta_points = 5;
  bool log_spacing = true;
  // verify.*
  int verify_n = 16;
  std::optional<int> verify_j_min;
  std::optional<int> verify_j_max;

  std::filesystem::path cache_path() const { return cache.empty() ? out / "constants.cache" : cache; }
};

/// Builds a config from parsed key-values. Unknown keys and malformed values
/// throw ConfigError; soft problems (Besov indices outside the theorem's
/// range) are appended to `warnings`.
RunConfig parse_run_config(const KeyValues& kv, std::vector<std::string>* warnings = nullptr);
RunConfig load_run_config(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Canonical full rendering: every key, shortest round-trip numbers.
KeyValues serialize(const RunConfig& config);

/// FNV-1a of the canonical rendering, run.out excluded.
std::uint64_t config_hash(const RunConfig& config);
std::string config_hash_hex(const RunConfig& config);

/// Warnings for (p, q) outside {3 < p <= inf, 1 <= q <= inf} and {p = 3, q = 1}.
std::vector<std::string> besov_index_warnings(double p, double q);

}  // namespace fbsq
