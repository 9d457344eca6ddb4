#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fbsq/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fourier-Besov solver and well-posedness gate for the rotating Boussinesq system"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides run.out)");
  app.add_option("--seed", seed, "PRNG seed (overrides run.seed)");
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* simulate = app.add_subcommand("simulate", "Picard solve; writes trajectory.fbsq, norms.csv, report.json");
  auto* gate = app.add_subcommand("gate", "admissibility of the initial data against the cached constants");
  auto* regimes = app.add_subcommand("regimes", "CSV sweep of the (nu, eta) regime classifier");
  auto* calibrate = app.add_subcommand("calibrate", "probe operator norms and write constants.cache");
  auto* verify = app.add_subcommand("verify", "run the invariant suite of every module");
  bool inject_r_fault = false;
  verify->add_flag("--inject-r-fault", inject_r_fault)->group("");  // mutation test hook

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? fbsq::kExitOk : fbsq::kExitUsage;
  }

  fbsq::RunConfig config;
  try {
    std::vector<std::string> warnings;
    config = config_path.empty() ? fbsq::parse_run_config({}, &warnings)
                                 : fbsq::load_run_config(config_path, &warnings);
    if (!quiet) {
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "fbsq: " << e.what() << '\n';
    return fbsq::kExitUsage;
  }
  if (!out_dir.empty()) config.out = out_dir;
  if (seed) config.seed = *seed;

  const fbsq::CommandIO io{std::cout, std::cerr, quiet};
  if (*simulate) return fbsq::cmd_simulate(config, io);
  if (*gate) return fbsq::cmd_gate(config, io);
  if (*regimes) return fbsq::cmd_regimes(config, io);
  if (*calibrate) return fbsq::cmd_calibrate(config, io);
  return fbsq::cmd_verify(config, io, {inject_r_fault});
}
