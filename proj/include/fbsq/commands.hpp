#pragma once

#include <iosfwd>
#include <string>

#include "fbsq/run_config.hpp"

namespace fbsq {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,         // usage, config or I/O error
  kExitFailed = 2,        // Picard nonconvergence, failed verify checks
  kExitNotAdmissible = 3  // gate verdict
};

/// Where a command talks to. `quiet` silences progress chatter on `err`;
/// the primary result (gate report, regime CSV, ...) still goes to `out`.
struct CommandIO {
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;
};

struct VerifyHooks {
  bool inject_r_fault = false;
};

// Each command reports problems on io.err and returns an ExitCode; none throws.
int cmd_simulate(const RunConfig& config, CommandIO io);
int cmd_gate(const RunConfig& config, CommandIO io);
int cmd_regimes(const RunConfig& config, CommandIO io);
int cmd_calibrate(const RunConfig& config, CommandIO io);
int cmd_verify(const RunConfig& config, CommandIO io, VerifyHooks hooks = {});

/// `# config_hash=<hex> seed=<n> prng=splitmix64`, without the leading '#'.
std::string output_comment(const RunConfig& config);

}  // namespace fbsq
