#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "cutvip/harness.hpp"
#include "oracles.hpp"

using namespace cutvip;
using namespace cutvip::harness;
using oracle::vec;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path dir(CUTVIP_TEST_TMP);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = tmp_dir() / name;
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CUTVIP_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

const char* kP1 = R"({"problem": {"builtin": "p1_box"}, "seed": 3})";

}  // namespace

TEST_CASE("format_double round-trips") {
  oracle::Gen gen(71);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(gen.uniform(-1, 1), static_cast<int>(gen.index(200)) - 100);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("parse_config rejects bad documents") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"problem": {"builtin": "nope"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"problme": {}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"problem": {"builtin": "p1_box", "extra": 1}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"problem": {"builtin": "p1_box"}, "solver": {"rho": 1}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"problem": {"builtin": "p1_box"}, "solver": {"gamma": 2}})")),
                  StepSequenceError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"problem": {"builtin": "p1_box"}, "solver": {"rho0": 0}})")),
                  StepSequenceError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"problem": {"builtin": "p1_box"}, "seed": -1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(
                      R"({"problem": {"operator": {"kind": "box", "lo": [0, 0], "hi": [1]},
                                      "field": {"kind": "zero"}}})")),
                  ConfigError);
}

TEST_CASE("parse_config builds custom problems") {
  const auto rc = parse_config(json::parse(R"({
    "problem": {"operator": {"kind": "ball", "center": [0, 0], "radius": 1},
                "field": {"kind": "shift", "a": [3, 0]}, "x0": [0, 2], "solution": [1, 0]},
    "solver": {"rho0": 0.5, "gamma": 0.75, "alpha": 1.2, "max_iter": 10}})"));
  CHECK(rc.problem.vip.T(vec({2, 0})).isApprox(vec({1, 0})));
  CHECK(rc.problem.vip.F(vec({1, 1})).isApprox(vec({-2, 1})));
  CHECK(rc.solver.config.steps.rho0 == 0.5);
  CHECK(rc.solver.config.relax(0) == 1.2);
  CHECK(rc.solver.config.max_iter == 10);
  CHECK(*rc.solver.config.x0 == vec({0, 2}));
}

TEST_CASE("builtin problems carry their solutions") {
  for (const auto& name : builtin_names()) {
    const auto p = make_builtin(name);
    CHECK(p.vip.known_solution.has_value());
    CHECK(p.x0.has_value());
  }
  CHECK_THROWS_AS(make_builtin("unknown"), ConfigError);
}

TEST_CASE("trace_csv layout") {
  auto rc = parse_config(json::parse(R"({"problem": {"builtin": "p1_box"}, "solver": {"max_iter": 5}})"));
  const auto result = execute(rc.problem, rc.solver);
  const std::string csv = trace_csv(result.trace);
  CHECK(csv.rfind("k,rho_k,alpha_k,norm_F,fix_residual,step_norm,shift_norm,err_to_solution,fejer_ok\n", 0) == 0);
  CHECK(count_lines(csv) == 6);
  CHECK(csv.find("\n0,1,1,") != std::string::npos);

  rc.solver.algorithm = Algorithm::auslender;
  const std::string baseline = trace_csv(execute(rc.problem, rc.solver).trace);
  CHECK(baseline.find("\n0,0.5,,") != std::string::npos);
}

TEST_CASE("cli: solve p1_box") {
  const auto cfg = write_config("p1.json", kP1);
  const auto csv = tmp_dir() / "p1.csv", sum = tmp_dir() / "p1.summary.json";
  REQUIRE(cli("solve --config " + cfg.string() + " --out " + csv.string() + " --summary " + sum.string()) == 0);
  const json summary = json::parse(slurp(sum));
  CHECK(summary["status"] == "converged");
  CHECK(summary["final_error"].get<double>() <= 1e-3);
  CHECK(summary["invariants"]["fejer_violations"] == 0);
  const std::size_t rows = count_lines(slurp(csv)) - 1;
  CHECK(rows == summary["iterations"].get<std::size_t>());
  CHECK(rows == summary["trace_aggregates"]["rows"].get<std::size_t>());
  CHECK(rows <= 100000);
}

TEST_CASE("cli: identical config and seed give byte-identical traces") {
  const auto cfg = write_config("det.json", kP1);
  const auto a = tmp_dir() / "det_a.csv", b = tmp_dir() / "det_b.csv";
  REQUIRE(cli("solve --config " + cfg.string() + " --out " + a.string() + " --summary /dev/null") == 0);
  REQUIRE(cli("solve --config " + cfg.string() + " --out " + b.string() + " --summary /dev/null") == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());
}

TEST_CASE("cli: exit codes for bad input") {
  CHECK(cli("solve --config " + write_config("gamma2.json",
                                             R"({"problem": {"builtin": "p1_box"}, "solver": {"gamma": 2}})")
                                    .string()) == 4);
  CHECK(cli("solve --config " + write_config("broken.json", "{\"problem\": ").string()) == 3);
  CHECK(cli("solve --config " + (tmp_dir() / "does_not_exist.json").string()) == 3);
  CHECK(cli("solve --config " + write_config("unknown.json", R"({"problem": {"builtin": "p1_box"}, "colour": 1})")
                                    .string()) == 3);
  CHECK(cli("frobnicate") == 3);
  CHECK(cli("solve") == 3);
}

TEST_CASE("cli: iteration cap gives exit 2") {
  const auto cfg = write_config("cap.json", R"({"problem": {"builtin": "p1_box"}, "solver": {"max_iter": 20}})");
  CHECK(cli("solve --config " + cfg.string() + " --summary /dev/null") == 2);
}

TEST_CASE("cli: resolvent inner cap gives exit 5") {
  const auto cfg = write_config("inner_cap.json", R"({
    "problem": {"g": {"kind": "squared_affine", "a": [1, 1], "b": 1},
                "C": {"kind": "box", "lo": [0, 0], "hi": [2, 2]},
                "inner_tol": 1e-16, "max_inner": 1, "x0": [2, 0]}})");
  CHECK(cli("bilevel --config " + cfg.string() + " --summary /dev/null") == 5);
}

TEST_CASE("cli: diagnose") {
  const auto pass = write_config("cutter.json", R"({
    "diagnostics": [{"check": "cutter", "operator": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
                     "region": {"kind": "box", "lo": [-3, -3], "hi": [3, 3], "count": 500}}]})");
  const auto sum = tmp_dir() / "cutter.summary.json";
  CHECK(cli("diagnose --config " + pass.string() + " --summary " + sum.string()) == 0);
  CHECK(json::parse(slurp(sum))["passed"] == true);

  const auto fail = write_config("reflection.json", R"({
    "diagnostics": [{"check": "sqne", "alpha": 0.5,
                     "operator": {"kind": "reflection", "base": {"kind": "ball", "center": [0, 0], "radius": 1}},
                     "region": {"kind": "box", "lo": [-3, -3], "hi": [3, 3], "count": 500}}]})");
  const auto fsum = tmp_dir() / "reflection.summary.json";
  CHECK(cli("diagnose --config " + fail.string() + " --summary " + fsum.string()) == 1);
  const json report = json::parse(slurp(fsum))["checks"][0];
  CHECK(report["passed"] == false);
  CHECK(report["witness"].size() == 2);

  const auto curve = write_config("dcurve.json", R"({
    "diagnostics": [{"check": "d_curve", "operator": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
                     "region": {"kind": "box", "lo": [-2, -2], "hi": [3, 3], "count": 2000},
                     "r_grid": [0, 0.25, 0.5, 1]}], "seed": 5})");
  const auto csum = tmp_dir() / "dcurve.summary.json";
  CHECK(cli("diagnose --config " + curve.string() + " --summary " + csum.string()) == 0);
  const auto estimates = json::parse(slurp(csum))["checks"][0]["estimates"].get<std::vector<double>>();
  REQUIRE(estimates.size() == 4);
  CHECK(estimates[0] == 0.0);
  for (std::size_t i = 1; i < estimates.size(); ++i) CHECK(estimates[i] >= estimates[i - 1]);

  CHECK(cli("diagnose --config " + write_config("nodiag.json", kP1).string()) == 3);
}

TEST_CASE("cli: bilevel reports the grid oracle") {
  const auto cfg = write_config("bilevel.json", R"({"problem": {"builtin": "bilevel_pnorm2"}})");
  const auto sum = tmp_dir() / "bilevel.summary.json";
  REQUIRE(cli("bilevel --config " + cfg.string() + " --summary " + sum.string()) == 0);
  const json summary = json::parse(slurp(sum));
  CHECK(summary["oracle"]["distance"].get<double>() <= 1e-2);
  CHECK(cli("bilevel --config " + write_config("not_bilevel.json", kP1).string()) == 3);
}

TEST_CASE("cli: bench") {
  const auto out = tmp_dir() / "bench.csv";
  REQUIRE(cli("bench --suite builtin --out " + out.string()) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("suite,status,iterations,final_error,fix_residual,step_norm,fejer_violations\n", 0) == 0);
  CHECK(count_lines(csv) == 5);
  CHECK(csv.find("\np1_box,converged,") != std::string::npos);
  CHECK(csv.find("\nbilevel_pnorm2,converged,") != std::string::npos);
  const auto again = tmp_dir() / "bench2.csv";
  REQUIRE(cli("bench --suite builtin --out " + again.string()) == 0);
  CHECK(slurp(again) == csv);
  CHECK(cli("bench --suite other --out " + again.string()) == 3);
}
