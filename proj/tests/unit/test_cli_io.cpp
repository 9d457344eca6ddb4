#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "fbsq/commands.hpp"
#include "fbsq/keyvalue.hpp"
#include "fbsq/run_config.hpp"
#include "fbsq/snapshot_io.hpp"
#include "fbsq/wellposedness_gate.hpp"
#include "oracles.hpp"

using namespace fbsq;
namespace fs = std::filesystem;

namespace {

KeyValues parse(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("fbsq_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Captured {
  int code;
  std::string out;
  std::string err;
};

template <class F>
Captured capture(F&& f) {
  std::ostringstream out, err;
  const int code = f(CommandIO{out, err, false});
  return {code, out.str(), err.str()};
}

// Runs the real executable; stdout lands in `stdout_file`.
int run_exe(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string("\"") + FBSQ_EXE + "\" " + args + " > \"" +
                          stdout_file.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.n = 8;
  c.steps = 4;
  c.probe_samples = 4;
  c.out = out;
  return c;
}

ConstantSet handmade_constants(int n) {
  ConstantSet c;
  c.C_L = 0.9;
  c.C_B = 1.7;
  c.C0 = 1.1;
  c.g = 1.0;
  c.meta.n = n;
  return c;
}

std::string value_of(const std::string& text, const std::string& key) {
  const KeyValues kv = parse(text);
  const auto it = kv.find(key);
  REQUIRE_MESSAGE(it != kv.end(), key);
  return it->second;
}

}  // namespace

TEST_CASE("key-value parsing") {
  const KeyValues kv = parse("# comment\n\ngrid.n = 16\n  model.nu=0.5  \nflag = yes\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("grid.n") == "16");
  CHECK(kv.at("model.nu") == "0.5");
  CHECK(kv.at("flag") == "yes");

  CHECK_THROWS_AS(parse("a.b = 1\na.b = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("a.b.c = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);

  std::ostringstream out;
  write_key_values(out, kv);
  CHECK(parse(out.str()) == kv);
}

TEST_CASE("scalar parsing and formatting") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, kInf}) {
    CHECK(parse_double(format_double(x), "x") == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(kInf) == "inf");
  CHECK_THROWS_AS(parse_double("1.5x", "x"), ConfigError);
  CHECK_THROWS_AS(parse_double("", "x"), ConfigError);
  CHECK_THROWS_AS(parse_integer("2.5", "x"), ConfigError);
  CHECK_THROWS_AS(parse_unsigned("-1", "x"), ConfigError);
  CHECK(parse_bool("true", "x"));
  CHECK_FALSE(parse_bool("false", "x"));
  CHECK_THROWS_AS(parse_bool("maybe", "x"), ConfigError);
  CHECK(parse_double_list("0.5, 2", "x") == std::vector<double>{0.5, 2.0});
  CHECK_THROWS_AS(parse_double_list("1,,2", "x"), ConfigError);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("run config") {
  SUBCASE("defaults") {
    const RunConfig c = parse_run_config({});
    CHECK(c.n == 16);
    CHECK(c.z.p == 4.0);
    CHECK(c.cache_path() == fs::path("fbsq_out") / "constants.cache");
  }
  SUBCASE("round trip through the canonical rendering") {
    KeyValues kv = parse(
        "grid.n = 8\nmodel.nu = 0.25\nmodel.omega = 3\nbesov.q = inf\nbesov.s = 0.5, 1\n"
        "initial.kind = single_mode\ninitial.mode = 1, 2, 0\ninitial.velocity_amplitude = 0.01\n"
        "run.seed = 99\ngate.lambda = 0.3\nregimes.spacing = linear\nverify.j_min = -2\nverify.j_max = 3\n");
    const RunConfig a = parse_run_config(kv);
    CHECK(a.n == 8);
    CHECK(a.model.omega == 3.0);
    CHECK(a.z.q == kInf);
    CHECK(a.initial.kind == InitialKind::single_mode);
    CHECK(a.seed == 99);
    REQUIRE(a.gate_lambda);
    CHECK(*a.gate_lambda == 0.3);
    CHECK_FALSE(a.log_spacing);
    const RunConfig b = parse_run_config(serialize(a));
    CHECK(serialize(b) == serialize(a));
    CHECK(config_hash(b) == config_hash(a));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_run_config(parse("grid.nn = 8\n")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(parse("grid.n = eight\n")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(parse("regimes.spacing = cubic\n")), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/fbsq.cfg"), ConfigError);
  }
  SUBCASE("besov index warnings") {
    CHECK(besov_index_warnings(4.0, 1.0).empty());
    CHECK(besov_index_warnings(kInf, kInf).empty());
    CHECK(besov_index_warnings(3.0, 1.0).empty());
    CHECK(besov_index_warnings(3.0, 2.0).size() == 1);
    CHECK(besov_index_warnings(2.0, 1.0).size() == 1);
    std::vector<std::string> w;
    parse_run_config(parse("besov.p = 2\n"), &w);
    CHECK(w.size() == 1);
  }
  SUBCASE("hash ignores the output directory only") {
    RunConfig a;
    RunConfig b;
    b.out = "somewhere/else";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash_hex(a).size() == 16);
    b.model.nu = 0.5;
    CHECK(config_hash(a) != config_hash(b));
    RunConfig c;
    c.seed = 2;
    CHECK(config_hash(a) != config_hash(c));
  }
}

TEST_CASE("snapshot format") {
  const Grid g = make_grid(8, 2.0);
  SplitMix64 rng(3);
  const SpectralField f = oracle::random_field(g, Rank::vector3, rng, 2);
  std::ostringstream out;
  write_snapshot(out, f);
  const std::string bytes = out.str();

  REQUIRE(bytes.size() == 4 + 4 + 4 + 4 + 8 + 3 * g.size() * 16);
  CHECK(bytes.substr(0, 4) == "FBSQ");
  std::uint32_t header[3];
  std::memcpy(header, bytes.data() + 4, sizeof header);
  CHECK(header[0] == kSnapshotVersion);
  CHECK(header[1] == 8);
  CHECK(header[2] == 3);
  double L = 0;
  std::memcpy(&L, bytes.data() + 16, 8);
  CHECK(L == 2.0);

  std::istringstream in(bytes);
  const SpectralField back = read_snapshot(in);
  CHECK(back.rank() == Rank::vector3);
  CHECK(back.grid().n() == 8);
  CHECK(back.grid().box_scale() == 2.0);
  CHECK(max_abs_diff(back, f) == 0.0);

  SUBCASE("bad input") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream b1(bad);
    CHECK_THROWS_AS(read_snapshot(b1), SnapshotError);
    std::istringstream b2(bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS(read_snapshot(b2), SnapshotError);
    std::string wrong_version = bytes;
    wrong_version[4] = 7;
    std::istringstream b3(wrong_version);
    CHECK_THROWS_AS(read_snapshot(b3), SnapshotError);
    CHECK_THROWS(read_snapshot_file("/nonexistent/x.fbsq"));
  }
  SUBCASE("Nyquist modes are dropped on input") {
    std::string raw = bytes;
    std::size_t nyq = 0;
    while (!g.is_nyquist(nyq)) ++nyq;
    const double one = 1.0;
    std::memcpy(raw.data() + 24 + nyq * 16, &one, 8);
    std::istringstream in2(raw);
    CHECK(read_snapshot(in2)(0, nyq) == Complex(0.0, 0.0));
  }
  SUBCASE("file round trip") {
    TempDir dir("snap");
    write_snapshot_file(dir.path / "f.fbsq", f);
    CHECK(max_abs_diff(read_snapshot_file(dir.path / "f.fbsq"), f) == 0.0);
  }
}

TEST_CASE("simulate") {
  TempDir dir("simulate");
  RunConfig c = small_config(dir.path / "a");

  const Captured r = capture([&](CommandIO io) { return cmd_simulate(c, io); });
  REQUIRE(r.code == kExitOk);
  for (const char* name : {"trajectory.fbsq", "norms.csv", "norms_temperature.csv", "report.json"}) {
    CHECK(fs::exists(c.out / name));
  }

  // zero data: every norm is zero
  const auto rows = lines_of(slurp(c.out / "norms.csv"));
  REQUIRE(rows.size() > 2);
  CHECK(rows[0].rfind("# config_hash=" + config_hash_hex(c), 0) == 0);
  CHECK(rows[1] == "t, j, shell_lp, fb_norm_total");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    std::istringstream row(rows[i]);
    std::string t, j, shell, total;
    std::getline(row, t, ',');
    std::getline(row, j, ',');
    std::getline(row, shell, ',');
    std::getline(row, total, ',');
    CHECK(std::stod(shell) == 0.0);
    CHECK(std::stod(total) == 0.0);
  }

  // V and D interleaved for every sample time
  const auto snaps = read_snapshot_sequence(c.out / "trajectory.fbsq");
  REQUIRE(snaps.size() == 2 * static_cast<std::size_t>(c.steps + 1));
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    CHECK(snaps[i].rank() == (i % 2 == 0 ? Rank::vector3 : Rank::scalar));
    CHECK(snaps[i].max_abs() == 0.0);
  }

  SUBCASE("repeat runs are byte-identical") {
    c.initial.kind = InitialKind::random_shells;
    c.initial.shells = {0, 1};
    c.initial.velocity_amplitudes = {1e-3, 1e-3};
    c.initial.temperature_amplitudes = {1e-3, 1e-3};
    c.out = dir.path / "b";
    REQUIRE(capture([&](CommandIO io) { return cmd_simulate(c, io); }).code == kExitOk);
    RunConfig again = c;
    again.out = dir.path / "c";
    REQUIRE(capture([&](CommandIO io) { return cmd_simulate(again, io); }).code == kExitOk);
    for (const char* name : {"trajectory.fbsq", "norms.csv", "norms_temperature.csv", "report.json"}) {
      CAPTURE(name);
      CHECK(slurp(c.out / name) == slurp(again.out / name));
    }
    CHECK(slurp(c.out / "norms.csv") != slurp(dir.path / "a" / "norms.csv"));
  }
  SUBCASE("bad initial data is a usage error") {
    c.initial.kind = InitialKind::random_shells;
    c.initial.shells = {0};
    c.initial.velocity_amplitudes = {};
    const Captured bad = capture([&](CommandIO io) { return cmd_simulate(c, io); });
    CHECK(bad.code == kExitUsage);
    CHECK(bad.err.find("fbsq simulate:") != std::string::npos);
  }
}

TEST_CASE("gate") {
  TempDir dir("gate");
  RunConfig c = small_config(dir.path);

  const Captured missing = capture([&](CommandIO io) { return cmd_gate(c, io); });
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("no constants cache") != std::string::npos);

  const ConstantSet consts = handmade_constants(8);
  write_constants_cache(c.cache_path(), consts);
  c.model.nu = 0.7;
  c.model.eta = 1.3;

  const Captured ok = capture([&](CommandIO io) { return cmd_gate(c, io); });
  CHECK(ok.code == kExitOk);
  CHECK(value_of(ok.out, "gate.lambda0") == format_double(lambda0(consts, 0.7, 1.0)));
  CHECK(value_of(ok.out, "gate.epsilon0") == format_double(epsilon0(consts, 0.7, 1.3)));
  CHECK(value_of(ok.out, "gate.lambda") == value_of(ok.out, "gate.lambda0"));
  CHECK(value_of(ok.out, "gate.admissible") == "true");
  CHECK(value_of(ok.out, "constants.C1") == format_double(consts.C1()));

  SUBCASE("large data is not admissible") {
    c.initial.kind = InitialKind::single_mode;
    c.initial.velocity_amplitude = 10.0;
    const Captured r = capture([&](CommandIO io) { return cmd_gate(c, io); });
    CHECK(r.code == kExitNotAdmissible);
    CHECK(value_of(r.out, "gate.admissible") == "false");
  }
  SUBCASE("lambda above lambda0") {
    c.gate_lambda = 2.0 * lambda0(consts, 0.7, 1.0);
    const Captured r = capture([&](CommandIO io) { return cmd_gate(c, io); });
    CHECK(r.code == kExitNotAdmissible);
    CHECK(value_of(r.out, "gate.lambda_exceeds_lambda0") == "true");
  }
  SUBCASE("cache from another grid") {
    c.n = 16;
    const Captured r = capture([&](CommandIO io) { return cmd_gate(c, io); });
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("does not match") != std::string::npos);
    c.force = true;
    CHECK(capture([&](CommandIO io) { return cmd_gate(c, io); }).code == kExitOk);
  }
  SUBCASE("cache round trip") {
    const ConstantSet back = read_constants_cache(c.cache_path());
    CHECK(back.C_L == consts.C_L);
    CHECK(back.C_B == consts.C_B);
    CHECK(back.C0 == consts.C0);
    CHECK(back.meta.n == 8);
    CHECK(cache_incompatibilities(back, make_grid(8, 1.0), ZNormConfig{}).empty());
  }
}

TEST_CASE("regimes") {
  TempDir dir("regimes");
  RunConfig c = small_config(dir.path);
  CHECK(capture([&](CommandIO io) { return cmd_regimes(c, io); }).code == kExitUsage);
  const ConstantSet consts = handmade_constants(8);
  write_constants_cache(c.cache_path(), consts);

  SUBCASE("single point") {
    c.nu_min = c.nu_max = 1.0;
    c.eta_min = c.eta_max = 1.0;
    c.nu_points = c.eta_points = 1;
    const Captured r = capture([&](CommandIO io) { return cmd_regimes(c, io); });
    REQUIRE(r.code == kExitOk);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == "nu, eta, case, u_bound, theta_bound");
    CHECK(rows[2] == "1, 1, a1, " + format_double(consts.C1()) + ", " + format_double(consts.C2()));
    CHECK(slurp(dir.path / "regimes.csv") == r.out);
  }
  SUBCASE("five by five") {
    const Captured r = capture([&](CommandIO io) { return cmd_regimes(c, io); });
    REQUIRE(r.code == kExitOk);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 27);
    CHECK(rows[2].rfind("0.1, 0.1, ", 0) == 0);
    CHECK(rows[26].rfind("10, 10, ", 0) == 0);
    // the middle of a log range over [0.1, 10] is exactly 1
    CHECK(rows[14].rfind("1, 1, a1, ", 0) == 0);
  }
  SUBCASE("empty ranges") {
    c.nu_points = 0;
    CHECK(capture([&](CommandIO io) { return cmd_regimes(c, io); }).code == kExitUsage);
    c.nu_points = 3;
    c.nu_min = 5.0;
    c.nu_max = 1.0;
    CHECK(capture([&](CommandIO io) { return cmd_regimes(c, io); }).code == kExitUsage);
  }
}

TEST_CASE("executable") {
  TempDir dir("exe");
  const fs::path log = dir.path / "stdout.txt";

  CHECK(run_exe("", log) == kExitUsage);
  CHECK(run_exe("frobnicate", log) == kExitUsage);
  CHECK(run_exe("--config /nonexistent/x.cfg gate", log) == kExitUsage);
  CHECK(run_exe("--help", log) == kExitOk);

  const fs::path cfg = dir.path / "run.cfg";
  {
    std::ofstream f(cfg);
    f << "grid.n = 8\ntime.steps = 4\nprobe.samples = 4\n"
      << "calibrate.samples = 32\ncalibrate.steps = 4\ncalibrate.nu = 0.5, 2\ncalibrate.eta = 1\n";
  }
  const std::string common = "--config \"" + cfg.string() + "\" --out \"" + (dir.path / "o").string() + "\" --quiet ";

  CHECK(run_exe(common + "gate", log) == kExitUsage);
  REQUIRE(run_exe(common + "calibrate", log) == kExitOk);
  CHECK(fs::exists(dir.path / "o" / "constants.cache"));
  CHECK(run_exe(common + "gate", log) == kExitOk);
  CHECK(slurp(log).find("gate.admissible = true") != std::string::npos);
  CHECK(run_exe(common + "regimes", log) == kExitOk);
  CHECK(run_exe(common + "simulate", log) == kExitOk);
  CHECK(run_exe(common + "--seed 5 simulate", log) == kExitOk);
  CHECK(slurp(dir.path / "o" / "norms.csv").find("seed=5 prng=splitmix64") != std::string::npos);

  {
    std::ofstream f(dir.path / "bad.cfg");
    f << "grid.n = 8\ngrid.typo = 1\n";
  }
  CHECK(run_exe("--config \"" + (dir.path / "bad.cfg").string() + "\" simulate", log) == kExitUsage);
  CHECK(slurp(log).find("grid.typo") != std::string::npos);

  SUBCASE("verify and its mutation hook") {
    CHECK(run_exe(common + "verify", log) == kExitOk);
    CHECK(fs::exists(dir.path / "o" / "verify.json"));
    CHECK(run_exe(common + "verify --inject-r-fault", log) == kExitFailed);
    CHECK(slurp(log).find("failed: ") != std::string::npos);
  }
}
