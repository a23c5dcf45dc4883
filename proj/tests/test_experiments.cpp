#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "homog/cell2d.hpp"
#include "homog/experiments.hpp"

using namespace homog;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() { return fs::path(TEST_DATA_DIR); }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("homog_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: ", p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parsing: sections, comments, typed access") {
  const auto f = ConfigFile::parse_string(
      "# comment\n[experiment]\nkind = cell1d\n\n[cell]\n"
      "kappa = 1 + 0.5*sin(2*pi*Y1)\nlength = 2.0\n; another comment\n",
      "inline");
  const auto cfg = ExperimentConfig::load(f);
  CHECK(cfg.kind == ExperimentKind::cell1d);
  const auto& spec = std::get<Cell1dSpec>(cfg.spec);
  CHECK(spec.length == 2.0);
  CHECK(spec.nodes == 257);  // default
}

TEST_CASE("config parsing rejects malformed input") {
  CHECK_THROWS_AS(ConfigFile::parse_string("[unterminated\n", "x"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("novalue\n", "x"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("[a]\nk = 1\nk = 2\n", "x"), ConfigError);
  // unknown keys are flagged with their line number
  const auto f = ConfigFile::parse_string(
      "[experiment]\nkind = cell1d\n[cell]\nkappa = 1\nlenght = 2\n", "typo");
  CHECK_THROWS_WITH_AS(ExperimentConfig::load(f),
                       doctest::Contains("unknown key 'lenght'"), ConfigError);
  // eta validation
  const auto dup = ConfigFile::parse_string(
      "[experiment]\nkind = solve1d\n[problem]\nkappa = 1\n[cell]\nkappa = 1\n"
      "[sweep]\neta = 0.5, 0.5\n",
      "dup");
  CHECK_THROWS_AS(ExperimentConfig::load(dup), ConfigError);
}

TEST_CASE("solve1d experiment writes solutions, errors, report, and manifest") {
  const fs::path out = fresh_dir("solve1d");
  RunOptions opt;
  opt.out_dir = out;
  const RunResult res = run_experiment(data_dir() / "rod_smoke.ini", opt);
  REQUIRE_MESSAGE(res.exit_code == 0, res.error);

  CHECK(fs::exists(out / "solution_eta_0.5.csv"));
  CHECK(fs::exists(out / "solution_eta_0.25.csv"));
  CHECK(fs::exists(out / "errors.csv"));
  CHECK(fs::exists(out / "report.txt"));
  CHECK(fs::exists(out / "manifest.json"));

  const std::string sol = slurp(out / "solution_eta_0.5.csv");
  CHECK(sol.rfind("X1,u_exact,u_homogenized\n", 0) == 0);
  CHECK(sol.find("\r") == std::string::npos);  // LF only

  const std::string report = slurp(out / "report.txt");
  CHECK(report.find("monotone decrease (max_err): PASS") != std::string::npos);

  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["kind"] == "solve1d");
  CHECK(manifest["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(manifest["outputs"].size() == res.outputs.size());
}

TEST_CASE("identical configs produce byte-identical CSV outputs") {
  const fs::path out1 = fresh_dir("repro1");
  const fs::path out2 = fresh_dir("repro2");
  RunOptions o1, o2;
  o1.out_dir = out1;
  o2.out_dir = out2;
  o2.threads = 2;  // results must not depend on the thread count
  REQUIRE(run_experiment(data_dir() / "rod_smoke.ini", o1).exit_code == 0);
  REQUIRE(run_experiment(data_dir() / "rod_smoke.ini", o2).exit_code == 0);
  for (const char* name : {"solution_eta_0.5.csv", "solution_eta_0.25.csv",
                           "errors.csv", "report.txt"})
    CHECK_MESSAGE(slurp(out1 / name) == slurp(out2 / name), "differs: ", name);
}

TEST_CASE("cell2d experiment: CSV schema and tensor JSON round-trip") {
  const fs::path out = fresh_dir("cell2d");
  RunOptions opt;
  opt.out_dir = out;
  const RunResult res = run_experiment(data_dir() / "cell2d_small.ini", opt);
  REQUIRE_MESSAGE(res.exit_code == 0, res.error);

  const std::string cell = slurp(out / "cell.csv");
  CHECK(cell.rfind("Y1,Y2,kappa,chi1,chi2\n", 0) == 0);

  // the exported tensor must match an in-process recomputation exactly
  CellProblem2D p;
  p.grid = PeriodicGrid2D::unit(32);
  ScalarCoefficient c;
  c.expr = parse("1 + 0.5*sin(2*pi*Y1)");
  p.kappa = sample_scalar(c, p.grid);
  const auto t = assemble_tensor(p, solve_cell_2d(p, 1, 1e-12), solve_cell_2d(p, 2, 1e-12));
  const auto tj = nlohmann::json::parse(slurp(out / "tensor.json"));
  CHECK(tj["k11"].get<double>() == t.k11);
  CHECK(tj["k12"].get<double>() == t.k12);
  CHECK(tj["k21"].get<double>() == t.k21);
  CHECK(tj["k22"].get<double>() == t.k22);
}

TEST_CASE("lb1d experiment emits per-eta curve, coefficient, khat, and solution tables") {
  const fs::path out = fresh_dir("lb1d");
  RunOptions opt;
  opt.out_dir = out;
  const RunResult res = run_experiment(data_dir() / "lb1d_smoke.ini", opt);
  REQUIRE_MESSAGE(res.exit_code == 0, res.error);
  for (const char* name :
       {"curve_eta_0.5.csv", "kappa_eta_0.5.csv", "khat_eta_0.5.csv",
        "solution_eta_0.5.csv", "curve_eta_0.25.csv", "errors.csv", "report.txt"})
    CHECK_MESSAGE(fs::exists(out / name), "missing ", name);
}

TEST_CASE("cell1d experiment reports both effective-conductivity formulas") {
  const fs::path out = fresh_dir("cell1d");
  const fs::path cfg = out;
  fs::create_directories(out);
  {
    std::ofstream f(out / "cell.ini");
    f << "[experiment]\nkind = cell1d\n[cell]\nkappa = 1 + 0.5*sin(2*pi*Y1)\n";
  }
  RunOptions opt;
  opt.out_dir = out;
  const RunResult res = run_experiment(out / "cell.ini", opt);
  REQUIRE_MESSAGE(res.exit_code == 0, res.error);
  const auto eff = nlohmann::json::parse(slurp(out / "effective.json"));
  CHECK(eff["harmonic_mean"].get<double>() ==
        doctest::Approx(std::sqrt(0.75)).epsilon(1e-10));
  CHECK(eff["flux_form_mean"].get<double>() ==
        doctest::Approx(eff["harmonic_mean"].get<double>()).epsilon(1e-10));
  const std::string corr = slurp(out / "corrector.csv");
  CHECK(corr.rfind("Y1,chi1\n", 0) == 0);
}

TEST_CASE("solve2d experiment produces fields, tensor, and a decreasing sweep") {
  const fs::path out = fresh_dir("solve2d");
  fs::create_directories(out);
  {
    std::ofstream f(out / "plate.ini");
    f << "[experiment]\nkind = solve2d\n"
         "[problem]\nkappa = 1 + 0.5*sin(2*pi*X1/ETA)\nh = 1\n"
         "[cell]\nkappa = 1 + 0.5*sin(2*pi*Y1)\nresolution = 32\n"
         "[sweep]\neta = 0.5, 0.25\n"
         "[solver]\nm = 96\ntol = 1e-10\n";
  }
  RunOptions opt;
  opt.out_dir = out;
  opt.threads = 2;
  const RunResult res = run_experiment(out / "plate.ini", opt);
  REQUIRE_MESSAGE(res.exit_code == 0, res.error);
  for (const char* name : {"homogenized.csv", "multiscale_eta_0.5.csv",
                           "multiscale_eta_0.25.csv", "tensor.json", "errors.csv"})
    CHECK_MESSAGE(fs::exists(out / name), "missing ", name);
  CHECK(slurp(out / "report.txt").find("PASS") != std::string::npos);
  const std::string field = slurp(out / "homogenized.csv");
  CHECK(field.rfind("X1,X2,U\n", 0) == 0);
}

TEST_CASE("convergence experiment consumes an error table") {
  const fs::path out = fresh_dir("conv_src");
  RunOptions opt;
  opt.out_dir = out;
  REQUIRE(run_experiment(data_dir() / "rod_smoke.ini", opt).exit_code == 0);

  const fs::path cfg = out / "conv.ini";
  {
    std::ofstream f(cfg);
    f << "[experiment]\nkind = convergence\n[input]\ntable = "
      << (out / "errors.csv").string() << "\n";
  }
  const fs::path out2 = fresh_dir("conv_out");
  RunOptions opt2;
  opt2.out_dir = out2;
  const RunResult res = run_experiment(cfg, opt2);
  REQUIRE_MESSAGE(res.exit_code == 0, res.error);
  CHECK(slurp(out2 / "report.txt").find("PASS") != std::string::npos);
  CHECK(fs::exists(out2 / "summary.csv"));
}

TEST_CASE("validation failures exit 1 and still write the manifest") {
  for (const char* name : {"bad_empty_eta.ini", "bad_expr.ini", "unknown_key.ini"}) {
    const fs::path out = fresh_dir(std::string("val_") + name);
    RunOptions opt;
    opt.out_dir = out;
    const RunResult res = run_experiment(data_dir() / name, opt);
    CHECK_MESSAGE(res.exit_code == 1, name, " -> ", res.error);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["status"] == "error");
    CHECK_FALSE(manifest["error"].get<std::string>().empty());
  }
  // missing config counts as validation too
  RunOptions opt;
  opt.out_dir = fresh_dir("val_missing");
  CHECK(run_experiment("no_such_config.ini", opt).exit_code == 1);
}

TEST_CASE("solver-level failures exit 2 with the manifest error recorded") {
  const fs::path out = fresh_dir("solver_fail");
  RunOptions opt;
  opt.out_dir = out;
  const RunResult res = run_experiment(data_dir() / "nonelliptic.ini", opt);
  CHECK(res.exit_code == 2);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "error");
  CHECK(manifest["error"].get<std::string>().find("positiv") != std::string::npos);
}

TEST_CASE("report_convergence") {
  const auto pass = report_convergence({{0.5, 0.4, 0.2}, {0.05, 0.06, 0.03}, {0.005, 0.006, 0.003}});
  CHECK(pass.monotone_decreasing);
  CHECK(pass.text.find("PASS") != std::string::npos);

  const auto fail = report_convergence({{0.5, 0.1, 0.1}, {0.05, 0.2, 0.2}});
  CHECK_FALSE(fail.monotone_decreasing);
  CHECK(fail.text.find("FAIL") != std::string::npos);

  CHECK_THROWS_AS(report_convergence({{0.5, 0.1, 0.1}}), ConfigError);
}

TEST_CASE("value formatting uses 17 significant digits") {
  CHECK(format_value(0.5) == "0.5");
  CHECK(format_value(1.0 / 3.0) == "0.33333333333333331");
  CHECK(fnv1a_hex("") == "cbf29ce484222325");  // FNV-1a offset basis
  CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}

TEST_CASE("cli binary: exit codes and HOMOGENIZE_OUT override") {
  const std::string bin = HOMOGENIZE_BIN;
  CHECK(run_cli(bin + " --help > /dev/null 2>&1") == 0);
  CHECK(run_cli(bin + " > /dev/null 2>&1") == 1);  // missing subcommand

  const fs::path flag_dir = fresh_dir("cli_flag");
  const fs::path env_dir = fresh_dir("cli_env");
  const std::string cfg = (data_dir() / "cell2d_small.ini").string();

  CHECK(run_cli(bin + " run " + cfg + " --out " + flag_dir.string() +
                " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(flag_dir / "tensor.json"));

  // the environment variable wins over --out
  CHECK(run_cli("HOMOGENIZE_OUT=" + env_dir.string() + " " + bin + " run " + cfg +
                " --out " + flag_dir.string() + "_ignored > /dev/null 2>&1") == 0);
  CHECK(fs::exists(env_dir / "tensor.json"));
  CHECK_FALSE(fs::exists(fs::path(flag_dir.string() + "_ignored") / "tensor.json"));

  CHECK(run_cli(bin + " run " + (data_dir() / "bad_expr.ini").string() +
                " --out " + fresh_dir("cli_bad").string() + " > /dev/null 2>&1") == 1);
  CHECK(run_cli(bin + " run " + (data_dir() / "nonelliptic.ini").string() +
                " --out " + fresh_dir("cli_solver").string() + " > /dev/null 2>&1") == 2);
}
