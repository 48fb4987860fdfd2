// cutvip: run VIP solves, operator diagnostics, bilevel problems and the builtin benchmark.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cutvip/harness.hpp"

int main(int argc, char** argv) {
  namespace h = cutvip::harness;

  CLI::App app{"Half-space-cut solver for variational inequalities over fixed-point sets"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> trace_out, summary_out;
  std::string suite = "builtin", bench_out;

  auto* solve = app.add_subcommand("solve", "Run the configured solver");
  solve->add_option("--config", config, "JSON run config")->required();
  solve->add_option("--out", trace_out, "Trace CSV path (overrides output.trace)");
  solve->add_option("--summary", summary_out, "Summary JSON path (overrides output.summary)");

  auto* diagnose = app.add_subcommand("diagnose", "Run the configured sampled checks");
  diagnose->add_option("--config", config, "JSON run config")->required();
  diagnose->add_option("--summary", summary_out, "Summary JSON path (overrides output.summary)");

  auto* bilevel = app.add_subcommand("bilevel", "Solve a p-minimal-norm bilevel problem");
  bilevel->add_option("--config", config, "JSON run config")->required();
  bilevel->add_option("--out", trace_out, "Trace CSV path (overrides output.trace)");
  bilevel->add_option("--summary", summary_out, "Summary JSON path (overrides output.summary)");

  auto* bench = app.add_subcommand("bench", "Run a problem suite and tabulate the results");
  bench->add_option("--suite", suite, "Suite name")->default_val("builtin");
  bench->add_option("--out", bench_out, "Result CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : h::exit_code::invalid_config;
  }

  const h::CliOverrides overrides{trace_out, summary_out};
  if (*solve) return h::run_solve(config, overrides);
  if (*diagnose) return h::run_diagnose(config, overrides);
  if (*bilevel) return h::run_bilevel(config, overrides);
  if (*bench) return h::run_bench(suite, bench_out);
  return h::exit_code::invalid_config;
}
