#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fbsq {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  double value = 0.0;      // the measured quantity
  double tolerance = 0.0;  // the bound it is compared against
  std::string detail;
};

struct VerifyOptions {
  int n = 16;
  double box_scale = 1.0;
  std::uint64_t seed = 1;
  /// Overrides the automatically chosen Littlewood-Paley range.
  std::optional<int> j_min;
  std::optional<int> j_max;
  /// Runs every check with the R(xi) sign fault enabled.
  bool inject_r_fault = false;
  /// Called after each check (progress output).
  std::function<void(const CheckResult&)> on_check;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
  std::vector<const CheckResult*> failures() const;
};

/// Runs the invariant suite of every module at desk scale.
VerifyReport run_verify(const VerifyOptions& options);

/// JSON summary: {"passed": bool, "seconds": x, "checks": [...]}.
void write_verify_json(std::ostream& out, const VerifyReport& report);

}  // namespace fbsq
