#pragma once

// Config-driven runner behind the `cutvip` CLI: JSON configs in, trace CSV and summary JSON out.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutvip/bilevel.hpp"
#include "cutvip/diagnostics.hpp"
#include "cutvip/solver.hpp"

namespace cutvip::harness {

using nlohmann::json;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int iteration_cap = 2;
inline constexpr int invalid_config = 3;
inline constexpr int invalid_step_sequence = 4;
inline constexpr int oracle_failure = 5;
}  // namespace exit_code

/// Thrown for configs that fail `validate_step_sequence` (exit code 4).
class StepSequenceError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

enum class Algorithm { vip, auslender, yamada_ogura };

std::string to_string(Algorithm a);

struct SolverSpec {
  Algorithm algorithm = Algorithm::vip;
  SolverConfig config;
  double tau = 0.5;
  double lambda0 = 1.0;
};

/// A problem ready to run: the VIP, plus the pieces individual algorithms need.
struct ProblemInstance {
  std::string name;
  VipProblem vip;
  std::optional<BilevelProblem> bilevel;
  std::optional<Point> x0;
  /// Grid step for the bilevel oracle comparison.
  double oracle_grid_step = 0.01;
  /// Solver keys applied before the user's solver block (builtins carry tuned defaults).
  json solver_defaults = json::object();
};

struct OutputPaths {
  std::optional<std::string> trace;
  std::optional<std::string> summary;
};

struct RunConfig {
  ProblemInstance problem;
  SolverSpec solver;
  json diagnostics = json::array();
  OutputPaths output;
  std::uint64_t seed = 0;
};

/// Parses and validates a config document. Throws ConfigError (or StepSequenceError).
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

// Building blocks, exposed for tests.
FixedPointOperator build_operator(const json& spec, std::uint64_t seed);
ConvexFunctionOracle build_function(const json& spec);
VectorField build_field(const json& spec);
SampleRegion build_region(const json& spec, std::uint64_t seed);
ProblemInstance build_problem(const json& spec, std::uint64_t seed);
SolverSpec build_solver(const json& spec, std::uint64_t seed);

std::vector<std::string> builtin_names();
ProblemInstance make_builtin(const std::string& name);

/// Runs the configured algorithm on the problem.
SolveResult execute(const ProblemInstance& problem, const SolverSpec& solver);

/// Trace CSV with header k,rho_k,alpha_k,norm_F,fix_residual,step_norm,shift_norm,
/// err_to_solution,fejer_ok; floats in shortest round-trip form, missing values empty.
std::string trace_csv(const SolverTrace& trace);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

json report_to_json(const CheckReport& r);

/// Runs every entry of a diagnostics block; returns the reports and whether all passed.
json run_diagnostics(const json& entries, std::uint64_t seed, bool& all_passed);

json solve_summary(const ProblemInstance& problem, const SolverSpec& solver,
                   const SolveResult& result, double wall_time_s);

struct CliOverrides {
  std::optional<std::string> trace;
  std::optional<std::string> summary;
};

int run_solve(const std::string& config_path, const CliOverrides& overrides = {});
int run_diagnose(const std::string& config_path, const CliOverrides& overrides = {});
int run_bilevel(const std::string& config_path, const CliOverrides& overrides = {});
int run_bench(const std::string& suite, const std::string& out_csv);

}  // namespace cutvip::harness
