// End-to-end tests of the command-line tool: exit codes, output schemas,
// config/flag precedence, and byte-determinism of written files.  The binary
// path is injected by the build as WAVEMAP_BIN.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "wavemap_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& tag) {
  const fs::path out_file = scratch_dir() / (tag + ".stdout");
  const fs::path err_file = scratch_dir() / (tag + ".stderr");
  const std::string cmd = std::string(WAVEMAP_BIN) + " " + args + " > " +
                          out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

ordered_json parse_file(const fs::path& p) {
  return ordered_json::parse(slurp(p));
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli: exit codes cover success, validation, numeric, regression") {
  // 0: success.
  CHECK(run_cli("profile --n 0", "ec_ok").exit_code == 0);
  CHECK(run_cli("--help", "ec_help").exit_code == 0);
  CHECK(run_cli("profile --help", "ec_help_sub").exit_code == 0);
  CHECK(run_cli("--version", "ec_version").exit_code == 0);

  // 2: validation errors, both from the parser and from the core.
  CHECK(run_cli("", "ec_nosub").exit_code == 2);                // no subcommand
  CHECK(run_cli("frobnicate", "ec_badsub").exit_code == 2);     // bad subcommand
  CHECK(run_cli("profile --frobnicate", "ec_badflag").exit_code == 2);
  CHECK(run_cli("modes --n 0 --lambda-range 1", "ec_halfrange").exit_code == 2);
  CHECK(run_cli("modes --n 0 --lambda-range 2 -1", "ec_revrange").exit_code == 2);
  CHECK(run_cli("profile --n -3", "ec_badn").exit_code == 2);
  CHECK(run_cli("profile --n 1 --check-closed-form", "ec_ccf1").exit_code == 2);
  CHECK(run_cli("spectrum --n 0 --levels 9", "ec_levels").exit_code == 2);
  CHECK(run_cli("spectrum --n 0 --grid 8", "ec_grid").exit_code == 2);
  CHECK(run_cli("profile --config /nonexistent/cfg.json", "ec_nocfg").exit_code == 2);
  CHECK(run_cli("reproduce-tables --cell bogus/cell", "ec_badcell").exit_code == 2);

  // Validation errors explain themselves on stderr.
  const RunResult bad = run_cli("spectrum --n 0 --levels 9", "ec_levels_msg");
  CHECK(bad.exit_code == 2);
  CHECK(contains(bad.err, "levels"));

  // 3: numerical failure (time step far above the stability limit).
  const RunResult unstable =
      run_cli("spectrum --n 0 --grid 256 --cfl 0.45 --tau-end 8 --levels 1",
              "ec_unstable");
  CHECK(unstable.exit_code == 3);
  CHECK(contains(unstable.err, "unstable"));
}

TEST_CASE("cli: profile command output and closed-form gate") {
  const fs::path out = scratch_dir() / "profile0.json";
  const RunResult r = run_cli(
      "profile --n 0 --check-closed-form --out " + out.string(), "prof0");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "b="));
  CHECK(contains(r.out, "closed-form check"));
  CHECK(contains(r.out, "(ok)"));

  const ordered_json doc = parse_file(out);
  CHECK(doc.at("tool") == "wavemap");
  CHECK(doc.at("version") == "1.0.0");
  CHECK(doc.at("kind") == "profile");
  CHECK(doc.at("config").at("command") == "profile");
  CHECK(doc.at("config").at("n") == 0);
  const ordered_json& body = doc.at("result");
  CHECK(body.at("format") == "profile/1");
  CHECK(body.at("n") == 0);
  CHECK(std::abs(body.at("b").get<double>() - 2.0) < 1e-8);
  CHECK(std::abs(body.at("c").get<double>() - 1.0) < 1e-8);
  CHECK(body.at("samples").size() >= 1000);

  // The first excitation's parameters land on the published values.
  const fs::path out1 = scratch_dir() / "profile1.json";
  REQUIRE(run_cli("profile --n 1 --out " + out1.string(), "prof1").exit_code == 0);
  const ordered_json body1 = parse_file(out1).at("result");
  CHECK(std::abs(body1.at("b").get<double>() - 21.757414181888) < 1e-7);
  CHECK(std::abs(body1.at("c").get<double>() - (-0.305664411396)) < 1e-8);
}

TEST_CASE("cli: modes command finds the published eigenvalues") {
  const fs::path out = scratch_dir() / "modes0.json";
  const RunResult r =
      run_cli("modes --n 0 --lambda-range -1 2 --out " + out.string(), "modes0");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "2 eigenvalues"));
  CHECK(contains(r.out, "lambda=+1.0000000000"));
  CHECK(contains(r.out, "lambda=-0.5424663"));

  const ordered_json doc = parse_file(out);
  CHECK(doc.at("kind") == "modes");
  const ordered_json& body = doc.at("result");
  CHECK(body.at("format") == "mode/1");
  REQUIRE(body.at("eigenvalues").size() == 2);
  CHECK(std::abs(body.at("eigenvalues")[0].at("lambda").get<double>() - 1.0) < 1e-8);
  CHECK(std::abs(body.at("eigenvalues")[1].at("lambda").get<double>() -
                 (-0.5424663534)) < 1e-7);
  // With --out, eigenfunction samples are embedded.
  CHECK(body.at("eigenvalues")[0].at("samples").size() >= 100);
  // Scan metadata is preserved.
  CHECK(body.at("scan").at("lo") == -1.0);
  CHECK(body.at("scan").at("hi") == 2.0);

  // An eigenvalue-free window yields an empty list and still succeeds.
  const RunResult empty = run_cli("modes --n 0 --lambda-range 2 5", "modes_empty");
  CHECK(empty.exit_code == 0);
  CHECK(contains(empty.out, "0 eigenvalues"));

  // A window covering -2 triggers the resonance report (analytic eigenvalue
  // for the ground state, rejected for the first excitation).
  const RunResult res0 =
      run_cli("modes --n 0 --lambda-range -2.5 -1.5", "modes_res0");
  CHECK(res0.exit_code == 0);
  CHECK(contains(res0.out, "analytic eigenvalue"));
  const RunResult res1 =
      run_cli("modes --n 1 --lambda-range -2.5 -1.5", "modes_res1");
  CHECK(res1.exit_code == 0);
  CHECK(contains(res1.out, "not an eigenvalue"));
}

TEST_CASE("cli: spectrum command writes matching JSON and CSV") {
  const fs::path out = scratch_dir() / "spec0.json";
  const RunResult r = run_cli(
      "spectrum --n 0 --grid 256 --tau-end 8 --levels 2 --out " + out.string(),
      "spec0");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "level 0"));
  CHECK(contains(r.out, "level 1"));

  const ordered_json doc = parse_file(out);
  CHECK(doc.at("kind") == "spectrum");
  CHECK(doc.at("config").at("grid") == 256);
  CHECK(doc.at("config").at("tau_end") == 8.0);
  const ordered_json& body = doc.at("result");
  CHECK(body.at("format") == "spectrum/1");
  CHECK(body.at("method") == "evolution");
  REQUIRE(body.at("levels").size() == 2);
  CHECK(std::abs(body.at("levels")[0].at("mu").get<double>() - 1.0) < 0.01);
  CHECK(std::abs(body.at("levels")[1].at("mu").get<double>() - (-0.5424663534)) <
        0.012);

  // Companion CSV: one header plus one row per recorded time.
  const fs::path csv = scratch_dir() / "spec0.csv";
  REQUIRE(fs::exists(csv));
  const std::string text = slurp(csv);
  std::istringstream lines(text);
  std::string line;
  std::size_t rows = 0;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "tau,log_norm_level_0,log_norm_level_1");
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  // The series in the JSON is not embedded, but the CSV must at least cover
  // [0, tau_end] densely: N=256, kappa=0.25 gives dt=1/1024, so 8193 rows.
  CHECK(rows == 8193);
}

TEST_CASE("cli: config file is honored and explicit flags override it") {
  const fs::path cfg = scratch_dir() / "cfg.json";
  {
    std::ofstream os(cfg);
    os << R"({"n": 1, "lambda_range": [5.0, 7.0], "out": ")"
       << (scratch_dir() / "from_config.json").string() << R"("})";
  }
  // No overriding flags: everything comes from the file.
  const RunResult r1 = run_cli("modes --config " + cfg.string(), "cfgplain");
  REQUIRE(r1.exit_code == 0);
  CHECK(contains(r1.out, "lambda=+6.3336253"));
  const ordered_json doc1 = parse_file(scratch_dir() / "from_config.json");
  CHECK(doc1.at("config").at("n") == 1);
  CHECK(doc1.at("config").at("config_path") == cfg.string());

  // --lambda-range and --out on the command line beat the file; --n keeps
  // the file's value.
  const fs::path out2 = scratch_dir() / "override.json";
  const RunResult r2 = run_cli("modes --config " + cfg.string() +
                                   " --lambda-range 0.5 1.5 --out " + out2.string(),
                               "cfgover");
  REQUIRE(r2.exit_code == 0);
  const ordered_json doc2 = parse_file(out2);
  CHECK(doc2.at("config").at("n") == 1);
  CHECK(doc2.at("config").at("lambda_range")[0] == 0.5);
  CHECK(doc2.at("config").at("lambda_range")[1] == 1.5);
  REQUIRE(doc2.at("result").at("eigenvalues").size() == 1);
  CHECK(std::abs(doc2.at("result").at("eigenvalues")[0].at("lambda").get<double>() -
                 1.0) < 1e-8);

  // A config file with an unknown key is rejected up front.
  const fs::path bad = scratch_dir() / "bad.json";
  {
    std::ofstream os(bad);
    os << R"({"gird": 512})";
  }
  const RunResult r3 = run_cli("profile --config " + bad.string(), "cfgbad");
  CHECK(r3.exit_code == 2);
  CHECK(contains(r3.err, "gird"));
}

TEST_CASE("cli: repeated runs are byte-identical") {
  // Identical invocations (including --out, which is embedded in the config
  // block of the document) must reproduce every output byte.
  const fs::path out = scratch_dir() / "det.json";
  const std::string cmd =
      "spectrum --n 0 --grid 256 --tau-end 6 --levels 2 --out " + out.string();
  REQUIRE(run_cli(cmd, "det_a").exit_code == 0);
  const std::string json_a = slurp(out);
  const std::string csv_a = slurp(scratch_dir() / "det.csv");
  REQUIRE(run_cli(cmd, "det_b").exit_code == 0);
  CHECK(json_a == slurp(out));
  CHECK(csv_a == slurp(scratch_dir() / "det.csv"));

  const RunResult m1 = run_cli("modes --n 1 --lambda-range -1 2", "det_m1");
  const RunResult m2 = run_cli("modes --n 1 --lambda-range -1 2", "det_m2");
  CHECK(m1.out == m2.out);
}

TEST_CASE("cli: converge command passes and reports second order") {
  const fs::path out = scratch_dir() / "conv.json";
  const RunResult r =
      run_cli("converge --grid 128 --out " + out.string(), "conv");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "order="));
  CHECK(contains(r.out, "exact zeros (ok)"));

  const ordered_json body = parse_file(out).at("result");
  CHECK(body.at("pass") == true);
  CHECK(std::abs(body.at("order").get<double>() - 2.0) < 0.2);
  REQUIRE(body.at("gauge_slopes").size() == 3);
  for (const auto& row : body.at("gauge_slopes"))
    CHECK(std::abs(row.at("slope").get<double>() - 1.0) < 0.01);
  CHECK(body.at("zero_exact") == true);
}

TEST_CASE("cli: reproduce-tables single-cell gates on that cell") {
  const RunResult ok =
      run_cli("reproduce-tables --cell groundstate/shooting/gauge", "cell_ok");
  CHECK(ok.exit_code == 0);
  CHECK(contains(ok.out, "groundstate/shooting/gauge"));
  CHECK(contains(ok.out, "ok"));

  const RunResult bonus = run_cli(
      "reproduce-tables --cell firstexcitation/shooting/unstable", "cell_b");
  CHECK(bonus.exit_code == 0);
  CHECK(contains(bonus.out, "+6.333625"));
}
