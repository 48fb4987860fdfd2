#include "cutvip/harness.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

namespace cutvip::harness {

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.contains(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

double number_at(const json& obj, const char* key, const std::string& where) {
  return number(require(obj, key, where), where + "." + key);
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

std::size_t count_or(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::string string_at(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Point point(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a nonempty array of numbers");
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = number(v[i], where);
  return p;
}

Point point_at(const json& obj, const char* key, const std::string& where) {
  return point(require(obj, key, where), where + "." + key);
}

Eigen::MatrixXd matrix_at(const json& obj, const char* key, const std::string& where) {
  const json& rows = require(obj, key, where);
  if (!rows.is_array() || rows.empty()) throw ConfigError(where + "." + key + ": expected rows");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point row = point(rows[static_cast<std::size_t>(i)], where + "." + key);
    if (row.size() != n) throw ConfigError(where + "." + key + ": matrix must be square");
    m.row(i) = row.transpose();
  }
  return m;
}

json to_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

std::optional<std::uint64_t> seed_of(const json& obj, const std::string& where) {
  if (!obj.contains("seed")) return std::nullopt;
  const json& v = obj.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(where + ".seed: expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

bool is_oracle_failure(const std::exception& e) {
  return dynamic_cast<const NumericError*>(&e) || dynamic_cast<const ConvergenceError*>(&e) ||
         dynamic_cast<const ContractError*>(&e) || dynamic_cast<const SelectionError*>(&e) ||
         dynamic_cast<const InputError*>(&e);
}

/// Loads a config and maps failures onto exit codes 3 and 4.
std::optional<RunConfig> load_or_report(const std::string& path, int& code) {
  try {
    return load_config(path);
  } catch (const StepSequenceError& e) {
    std::cerr << "invalid step sequence: " << e.what() << '\n';
    code = exit_code::invalid_step_sequence;
  } catch (const std::exception& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    code = exit_code::invalid_config;
  }
  return std::nullopt;
}

void emit_summary(const json& summary, const std::optional<std::string>& path) {
  const std::string text = summary.dump(2) + "\n";
  if (path) {
    write_file(*path, text);
  } else {
    std::cout << text;
  }
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::vip: return "vip";
    case Algorithm::auslender: return "auslender";
    case Algorithm::yamada_ogura: return "yamada_ogura";
  }
  return "unknown";
}

ConvexFunctionOracle build_function(const json& spec) {
  const std::string where = "function";
  const std::string kind = string_at(spec, "kind", where);
  if (kind == "zero") {
    check_keys(spec, {"kind"}, where);
    return functions::zero();
  }
  if (kind == "half_squared_norm") {
    check_keys(spec, {"kind"}, where);
    return functions::half_squared_norm();
  }
  if (kind == "affine" || kind == "squared_affine") {
    check_keys(spec, {"kind", "a", "b"}, where);
    Point a = point_at(spec, "a", where);
    const double b = number_at(spec, "b", where);
    return kind == "affine" ? functions::affine(std::move(a), b)
                            : functions::squared_affine(std::move(a), b);
  }
  if (kind == "squared_ball" || kind == "ball_distance") {
    check_keys(spec, {"kind", "center", "radius"}, where);
    Point c = point_at(spec, "center", where);
    const double r = number_at(spec, "radius", where);
    return kind == "squared_ball" ? functions::squared_ball(std::move(c), r)
                                  : functions::ball_distance(std::move(c), r);
  }
  throw ConfigError("function: unknown kind '" + kind + "'");
}

FixedPointOperator build_operator(const json& spec, std::uint64_t seed) {
  const std::string where = "operator";
  const std::string kind = string_at(spec, "kind", where);
  try {
    if (kind == "identity") {
      check_keys(spec, {"kind", "dim"}, where);
      return identity_operator(static_cast<Eigen::Index>(count_or(spec, "dim", 0, where)));
    }
    if (kind == "box") {
      check_keys(spec, {"kind", "lo", "hi"}, where);
      return projection_box(point_at(spec, "lo", where), point_at(spec, "hi", where));
    }
    if (kind == "ball") {
      check_keys(spec, {"kind", "center", "radius"}, where);
      return projection_ball(point_at(spec, "center", where), number_at(spec, "radius", where));
    }
    if (kind == "halfspace") {
      check_keys(spec, {"kind", "a", "b"}, where);
      return projection_halfspace_op(
          HalfSpace<double>::from_inequality(point_at(spec, "a", where), number_at(spec, "b", where)));
    }
    if (kind == "subgradient" || kind == "c_delta") {
      const bool is_subgradient = kind == "subgradient";
      if (is_subgradient) {
        check_keys(spec, {"kind", "f", "witness", "sample_box"}, where);
      } else {
        check_keys(spec, {"kind", "c", "delta", "witness", "sample_box"}, where);
      }
      ConvexFunctionOracle f = build_function(require(spec, is_subgradient ? "f" : "c", where));
      Point witness = point_at(spec, "witness", where);
      std::function<std::vector<Point>(std::size_t, std::uint64_t)> sampler;
      if (spec.contains("sample_box")) {
        const json& box = spec.at("sample_box");
        check_keys(box, {"lo", "hi"}, where + ".sample_box");
        sampler = rejection_sampler([f](const Point& x) { return f.value(x) <= 0.0; },
                                    point_at(box, "lo", where), point_at(box, "hi", where));
      }
      if (is_subgradient) return subgradient_projector(std::move(f), witness, std::move(sampler));
      CDeltaSpec cd{std::move(f), number_at(spec, "delta", where), std::move(witness)};
      return c_delta_operator(std::move(cd), subgradient_selection, std::move(sampler));
    }
    if (kind == "relaxed" || kind == "reflection") {
      if (kind == "relaxed") {
        check_keys(spec, {"kind", "base", "alpha"}, where);
      } else {
        check_keys(spec, {"kind", "base"}, where);
      }
      const FixedPointOperator base = build_operator(require(spec, "base", where), seed);
      const double alpha = kind == "relaxed" ? number_at(spec, "alpha", where) : 2.0;
      return relax_operator(base, alpha);
    }
    if (kind == "resolvent") {
      check_keys(spec, {"kind", "g", "C", "lambda", "inner_tol", "max_inner", "smoothness"}, where);
      ResolventOptions opts;
      opts.inner_tol = number_or(spec, "inner_tol", opts.inner_tol, where);
      opts.max_inner = count_or(spec, "max_inner", opts.max_inner, where);
      if (spec.contains("smoothness")) opts.smoothness = number_at(spec, "smoothness", where);
      return resolvent_operator(build_function(require(spec, "g", where)),
                                build_operator(require(spec, "C", where), seed),
                                number_or(spec, "lambda", 1.0, where), opts);
    }
  } catch (const InputError& e) {
    throw ConfigError(std::string("operator '") + kind + "': " + e.what());
  }
  throw ConfigError("operator: unknown kind '" + kind + "'");
}

VectorField build_field(const json& spec) {
  const std::string where = "field";
  const std::string kind = string_at(spec, "kind", where);
  try {
    if (kind == "zero") {
      check_keys(spec, {"kind"}, where);
      return [](const Point& x) -> Point { return Point::Zero(x.size()); };
    }
    if (kind == "shift") {
      check_keys(spec, {"kind", "a"}, where);
      return [a = point_at(spec, "a", where)](const Point& x) -> Point { return x - a; };
    }
    if (kind == "constant") {
      check_keys(spec, {"kind", "c"}, where);
      return [c = point_at(spec, "c", where)](const Point&) -> Point { return c; };
    }
    if (kind == "matrix") {
      check_keys(spec, {"kind", "G", "a"}, where);
      return matrix_field(matrix_at(spec, "G", where), point_at(spec, "a", where));
    }
    if (kind == "pnorm") {
      check_keys(spec, {"kind", "p", "alpha_reg"}, where);
      const double p = number_at(spec, "p", where);
      const double a = number_or(spec, "alpha_reg", 0.0, where);
      if (!(p >= 2.0) || !(a >= 0.0)) throw ConfigError("field pnorm: need p >= 2, alpha_reg >= 0");
      return [p, a](const Point& x) { return grad_f2(x, p, a); };
    }
    if (kind == "rotation") {
      check_keys(spec, {"kind"}, where);
      return [](const Point& x) -> Point {
        require_same_dimension(x.size(), 2, "rotation field");
        return (Point(2) << -x[1], x[0]).finished();
      };
    }
  } catch (const InputError& e) {
    throw ConfigError(std::string("field '") + kind + "': " + e.what());
  }
  throw ConfigError("field: unknown kind '" + kind + "'");
}

SampleRegion build_region(const json& spec, std::uint64_t seed) {
  const std::string where = "region";
  const std::string kind = string_at(spec, "kind", where);
  const std::uint64_t s = seed_of(spec, where).value_or(seed);
  try {
    if (kind == "box") {
      check_keys(spec, {"kind", "lo", "hi", "count", "seed"}, where);
      return SampleRegion::box(point_at(spec, "lo", where), point_at(spec, "hi", where),
                               count_or(spec, "count", 1000, where), s);
    }
    if (kind == "sphere_shell") {
      check_keys(spec, {"kind", "center", "r_inner", "r_outer", "count", "seed"}, where);
      return SampleRegion::shell(point_at(spec, "center", where), number_at(spec, "r_inner", where),
                                 number_at(spec, "r_outer", where),
                                 count_or(spec, "count", 1000, where), s);
    }
  } catch (const InputError& e) {
    throw ConfigError(std::string("region: ") + e.what());
  }
  throw ConfigError("region: unknown kind '" + kind + "'");
}

ProblemInstance build_problem(const json& spec, std::uint64_t seed) {
  const std::string where = "problem";
  if (!spec.is_object()) throw ConfigError("problem: expected an object");
  if (spec.contains("builtin")) {
    check_keys(spec, {"builtin", "x0"}, where);
    ProblemInstance p = make_builtin(string_at(spec, "builtin", where));
    if (spec.contains("x0")) p.x0 = point_at(spec, "x0", where);
    return p;
  }

  ProblemInstance p;
  p.name = "custom";
  std::optional<Point> solution;
  if (spec.contains("solution")) solution = point_at(spec, "solution", where);

  if (spec.contains("g")) {
    check_keys(spec, {"g", "C", "p", "alpha_reg", "lambda", "inner_tol", "max_inner", "smoothness",
                      "x0", "solution", "oracle_grid_step"},
               where);
    BilevelProblem prob;
    prob.g = build_function(spec.at("g"));
    const json& c_spec = require(spec, "C", where);
    prob.C = build_operator(c_spec, seed);
    if (c_spec.value("kind", "") == "box") {
      prob.bounds = std::make_pair(point_at(c_spec, "lo", where), point_at(c_spec, "hi", where));
    }
    prob.p = number_or(spec, "p", 2.0, where);
    prob.alpha_reg = number_or(spec, "alpha_reg", prob.p > 2.0 ? 0.01 : 0.0, where);
    prob.lambda = number_or(spec, "lambda", 1.0, where);
    prob.resolvent.inner_tol = number_or(spec, "inner_tol", prob.resolvent.inner_tol, where);
    prob.resolvent.max_inner = count_or(spec, "max_inner", prob.resolvent.max_inner, where);
    if (spec.contains("smoothness")) prob.resolvent.smoothness = number_at(spec, "smoothness", where);
    p.oracle_grid_step = number_or(spec, "oracle_grid_step", p.oracle_grid_step, where);
    try {
      p.vip = make_bilevel_vip(prob, solution);
    } catch (const InputError& e) {
      throw ConfigError(std::string("problem: ") + e.what());
    }
    p.name = "custom_bilevel";
    p.bilevel = std::move(prob);
  } else {
    check_keys(spec, {"operator", "field", "x0", "solution"}, where);
    p.vip.T = build_operator(require(spec, "operator", where), seed);
    p.vip.F = build_field(require(spec, "field", where));
    p.vip.dimension = p.vip.T.dimension;
    p.vip.known_solution = solution;
  }
  if (spec.contains("x0")) p.x0 = point_at(spec, "x0", where);
  if (p.x0) require_same_dimension(p.x0->size(), p.vip.dimension, "problem.x0");
  if (solution && solution->size() != p.vip.dimension) throw ConfigError("problem.solution: dimension mismatch");
  return p;
}

SolverSpec build_solver(const json& spec, std::uint64_t seed) {
  const std::string where = "solver";
  check_keys(spec, {"algorithm", "rho0", "gamma", "mu", "alpha", "tau", "lambda0", "max_iter", "tol",
                    "consecutive", "eps_F", "cut_resolution", "record_invariants", "fejer_samples"},
             where);
  SolverSpec s;
  if (spec.contains("algorithm")) {
    const std::string name = string_at(spec, "algorithm", where);
    if (name == "vip") {
      s.algorithm = Algorithm::vip;
    } else if (name == "auslender") {
      s.algorithm = Algorithm::auslender;
    } else if (name == "yamada_ogura") {
      s.algorithm = Algorithm::yamada_ogura;
    } else {
      throw ConfigError("solver.algorithm: unknown algorithm '" + name + "'");
    }
  }
  SolverConfig& c = s.config;
  c.steps.rho0 = number_or(spec, "rho0", c.steps.rho0, where);
  c.steps.gamma = number_or(spec, "gamma", c.steps.gamma, where);
  if (!validate_step_sequence(c.steps)) {
    throw StepSequenceError("solver: need rho0 > 0 and gamma in (0, 1]");
  }
  const double mu = number_or(spec, "mu", 0.1, where);
  const double alpha = number_or(spec, "alpha", 1.0, where);
  if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("solver.mu: must lie in (0, 1)");
  if (!(alpha >= mu && alpha <= 2.0 - mu)) throw ConfigError("solver.alpha: must lie in [mu, 2 - mu]");
  c.relax = RelaxationSchedule::constant(alpha, mu);
  c.max_iter = count_or(spec, "max_iter", c.max_iter, where);
  c.tol = number_or(spec, "tol", c.tol, where);
  c.consecutive = count_or(spec, "consecutive", c.consecutive, where);
  c.eps_F = number_or(spec, "eps_F", c.eps_F, where);
  c.cut_resolution = number_or(spec, "cut_resolution", c.cut_resolution, where);
  if (spec.contains("record_invariants")) {
    if (!spec.at("record_invariants").is_boolean()) throw ConfigError("solver.record_invariants: expected a boolean");
    c.record_invariants = spec.at("record_invariants").get<bool>();
  }
  c.fejer_samples = count_or(spec, "fejer_samples", c.fejer_samples, where);
  c.seed = seed;
  s.tau = number_or(spec, "tau", s.tau, where);
  s.lambda0 = number_or(spec, "lambda0", s.lambda0, where);
  if (!(s.tau >= 0.0)) throw ConfigError("solver.tau: must be >= 0");
  if (!(s.lambda0 >= 0.0)) throw ConfigError("solver.lambda0: must be >= 0");
  try {
    c.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, {"problem", "solver", "diagnostics", "output", "seed"}, "config");
  RunConfig rc;
  rc.seed = seed_of(doc, "config").value_or(0);

  json solver_spec = json::object();
  std::optional<ProblemInstance> problem;
  if (doc.contains("problem")) {
    problem = build_problem(doc.at("problem"), rc.seed);
    solver_spec = problem->solver_defaults;
  }
  if (doc.contains("solver")) {
    const json& user = doc.at("solver");
    if (!user.is_object()) throw ConfigError("solver: expected an object");
    for (const auto& item : user.items()) solver_spec[item.key()] = item.value();
  }
  rc.solver = build_solver(solver_spec, rc.seed);
  if (problem) {
    rc.solver.config.x0 = problem->x0;
    rc.problem = std::move(*problem);
  } else {
    rc.problem.name.clear();
  }

  if (doc.contains("diagnostics")) {
    rc.diagnostics = doc.at("diagnostics");
    if (!rc.diagnostics.is_array()) throw ConfigError("diagnostics: expected an array");
  }
  if (doc.contains("output")) {
    const json& out = doc.at("output");
    check_keys(out, {"trace", "summary"}, "output");
    if (out.contains("trace")) rc.output.trace = string_at(out, "trace", "output");
    if (out.contains("summary")) rc.output.summary = string_at(out, "summary", "output");
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

SolveResult execute(const ProblemInstance& problem, const SolverSpec& solver) {
  SolverConfig cfg = solver.config;
  if (!cfg.x0) cfg.x0 = problem.x0;
  const VipProblem& vip = problem.vip;
  switch (solver.algorithm) {
    case Algorithm::vip:
      return vip_solve(vip, cfg);
    case Algorithm::auslender: {
      if (!vip.T.has_fix_projection()) {
        throw ConfigError("auslender: the problem's operator has no fix-set projection");
      }
      FixedPointOperator projector = vip.T;
      projector.apply = vip.T.fix_projection;
      const double tau = solver.tau;
      return auslender_solve(vip.F, projector, [tau](std::size_t) { return tau; }, cfg,
                             vip.known_solution);
    }
    case Algorithm::yamada_ogura:
      return yamada_ogura_solve(vip.F, vip.T, harmonic_schedule(solver.lambda0), cfg,
                                vip.known_solution);
  }
  throw ConfigError("unknown algorithm");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const SolverTrace& trace) {
  std::string out = "k,rho_k,alpha_k,norm_F,fix_residual,step_norm,shift_norm,err_to_solution,fejer_ok\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const IterationRecord& r : trace.records) {
    out += std::to_string(r.k);
    out += ',' + format_double(r.rho);
    out += ',' + opt(r.alpha);
    out += ',' + format_double(r.norm_F);
    out += ',' + format_double(r.fix_residual);
    out += ',' + format_double(r.step_norm);
    out += ',' + opt(r.shift_norm);
    out += ',' + opt(r.err_to_solution);
    out += ',';
    if (r.fejer_ok) out += *r.fejer_ok ? '1' : '0';
    out += '\n';
  }
  return out;
}

json report_to_json(const CheckReport& r) {
  return json{{"name", r.name},
              {"passed", r.passed},
              {"worst_violation", r.worst_violation},
              {"slack", r.slack},
              {"witness", to_json(r.witness)},
              {"witness_partner", to_json(r.witness_partner)},
              {"samples_used", r.samples_used}};
}

json run_diagnostics(const json& entries, std::uint64_t seed, bool& all_passed) {
  all_passed = true;
  json reports = json::array();
  std::size_t index = 0;
  for (const json& entry : entries) {
    const std::string where = "diagnostics[" + std::to_string(index++) + "]";
    const std::string check = string_at(entry, "check", where);
    json report;
    try {
      if (check == "cutter" || check == "sqne") {
        if (check == "cutter") {
          check_keys(entry, {"check", "operator", "region", "fix_samples"}, where);
        } else {
          check_keys(entry, {"check", "operator", "region", "fix_samples", "alpha"}, where);
        }
        const FixedPointOperator T = build_operator(require(entry, "operator", where), seed);
        const SampleRegion region = build_region(require(entry, "region", where), seed);
        std::vector<Point> ws;
        if (entry.contains("fix_samples")) {
          for (const json& w : entry.at("fix_samples")) ws.push_back(point(w, where + ".fix_samples"));
        }
        const CheckReport r = check == "cutter"
                                  ? check_cutter(T, region, ws)
                                  : check_sqne(T, number_at(entry, "alpha", where), region, ws);
        report = report_to_json(r);
      } else if (check == "d_curve" || check == "quasi_shrinking") {
        check_keys(entry, {"check", "operator", "region", "r_grid", "threshold"}, where);
        const FixedPointOperator T = build_operator(require(entry, "operator", where), seed);
        const SampleRegion region = build_region(require(entry, "region", where), seed);
        std::vector<double> grid;
        for (const json& r : require(entry, "r_grid", where)) grid.push_back(number(r, where + ".r_grid"));
        const QuasiShrinkingReport q =
            probe_quasi_shrinking(T, region, grid, {}, number_or(entry, "threshold", 1e-9, where));
        bool monotone = true;
        for (std::size_t i = 1; i < q.estimates.size(); ++i) {
          if (grid[i] >= grid[i - 1] && q.estimates[i] < q.estimates[i - 1]) monotone = false;
        }
        json estimates = json::array();
        for (double d : q.estimates) estimates.push_back(std::isinf(d) ? json(nullptr) : json(d));
        report = json{{"name", check + "(" + T.name + ")"},
                      {"passed", check == "d_curve" ? monotone : q.consistent},
                      {"kind", "evidence"},
                      {"r_grid", grid},
                      {"estimates", estimates},
                      {"monotone", monotone},
                      {"consistent_with_quasi_shrinking", q.consistent},
                      {"samples_used", region.count}};
      } else if (check == "condition_c") {
        check_keys(entry, {"check", "field", "q", "beta", "region"}, where);
        report = report_to_json(check_condition_c(build_field(require(entry, "field", where)),
                                                  point_at(entry, "q", where),
                                                  number_at(entry, "beta", where),
                                                  build_region(require(entry, "region", where), seed)));
      } else if (check == "strong_monotonicity") {
        check_keys(entry, {"check", "field", "alpha", "region"}, where);
        report = report_to_json(check_strong_monotonicity(
            build_field(require(entry, "field", where)), number_at(entry, "alpha", where),
            build_region(require(entry, "region", where), seed)));
      } else if (check == "norm_product") {
        check_keys(entry, {"check", "x", "a", "b"}, where);
        const Point x = point_at(entry, "x", where);
        const double ratio = check_norm_product_inequality(x, number_at(entry, "a", where),
                                                           number_at(entry, "b", where));
        const double n = static_cast<double>(x.size());
        const bool ok = ratio >= (1.0 - 1e-12) / (n * n) && ratio <= 1.0 + 1e-12;
        report = json{{"name", "norm_product"}, {"passed", ok}, {"ratio", ratio}, {"floor", 1.0 / (n * n)}};
      } else if (check == "sequence_lemma") {
        check_keys(entry, {"check", "f_scale", "b_ratio", "a0", "K", "bound"}, where);
        const double scale = number_at(entry, "f_scale", where);
        const double ratio = number_at(entry, "b_ratio", where);
        const std::size_t K = count_or(entry, "K", 50, where);
        std::vector<double> b(K);
        for (std::size_t k = 0; k < K; ++k) b[k] = std::pow(ratio, static_cast<double>(k));
        const double aK = sequence_lemma_probe([scale](double r) { return scale * r; }, b,
                                               number_at(entry, "a0", where), K);
        const double bound = number_at(entry, "bound", where);
        report = json{{"name", "sequence_lemma"}, {"passed", aK <= bound}, {"a_K", aK}, {"bound", bound}};
      } else if (check == "closedness") {
        check_keys(entry, {"check", "operator", "target", "sequence", "tol"}, where);
        const FixedPointOperator T = build_operator(require(entry, "operator", where), seed);
        std::vector<Point> seq;
        for (const json& p : require(entry, "sequence", where)) seq.push_back(point(p, where + ".sequence"));
        const ClosednessReport c = check_closedness_probe(T, point_at(entry, "target", where), seq,
                                                          number_or(entry, "tol", 1e-6, where));
        report = json{{"name", "closedness(" + T.name + ")"},
                      {"passed", c.consistent},
                      {"kind", "evidence"},
                      {"residuals", c.residuals},
                      {"target_residual", c.target_residual},
                      {"target_fixed", c.target_fixed},
                      {"residuals_vanish", c.residuals_vanish}};
      } else {
        throw ConfigError(where + ": unknown check '" + check + "'");
      }
    } catch (const InputError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    all_passed = all_passed && report.at("passed").get<bool>();
    reports.push_back(std::move(report));
  }
  return reports;
}

json solve_summary(const ProblemInstance& problem, const SolverSpec& solver,
                   const SolveResult& result, double wall_time_s) {
  const SolverTrace& trace = result.trace;
  json final_state = json::object();
  if (!trace.records.empty()) {
    const IterationRecord& last = trace.records.back();
    final_state = {{"fix_residual", last.fix_residual},
                   {"step_norm", last.step_norm},
                   {"norm_F", last.norm_F}};
  }
  std::size_t fejer_rows = 0, fejer_failed = 0;
  for (const IterationRecord& r : trace.records) {
    if (!r.fejer_ok) continue;
    ++fejer_rows;
    if (!*r.fejer_ok) ++fejer_failed;
  }
  const InvariantTally& t = trace.invariants;
  json summary = {
      {"problem", problem.name},
      {"algorithm", to_string(solver.algorithm)},
      {"status", to_string(trace.status)},
      {"iterations", trace.iterations()},
      {"x_final", to_json(result.x)},
      {"final", final_state},
      {"final_error", problem.vip.known_solution
                          ? json((result.x - *problem.vip.known_solution).norm())
                          : json(nullptr)},
      {"max_iterate_norm", trace.max_iterate_norm},
      {"wall_time_s", wall_time_s},
      {"invariants",
       {{"fejer_checked", t.fejer_checked},
        {"fejer_violations", t.fejer_violations},
        {"worst_fejer", t.fejer_checked ? json(t.worst_fejer) : json(nullptr)},
        {"shift_checked", t.shift_checked},
        {"shift_violations", t.shift_violations},
        {"drift_checked", t.drift_checked},
        {"drift_violations", t.drift_violations},
        {"step_bound_checked", t.step_bound_checked},
        {"step_bound_violations", t.step_bound_violations}}},
      {"trace_aggregates", {{"rows", trace.records.size()}, {"fejer_rows", fejer_rows}, {"fejer_failed", fejer_failed}}},
      {"checks", json::array()}};
  return summary;
}

namespace {

/// Shared body of `solve` and `bilevel`.
int run_problem(const std::string& config_path, const CliOverrides& overrides, bool bilevel_only) {
  int code = exit_code::ok;
  std::optional<RunConfig> rc = load_or_report(config_path, code);
  if (!rc) return code;
  if (rc->problem.name.empty()) {
    std::cerr << "invalid config: missing problem\n";
    return exit_code::invalid_config;
  }
  if (bilevel_only && !rc->problem.bilevel) {
    std::cerr << "invalid config: bilevel subcommand needs a bilevel problem\n";
    return exit_code::invalid_config;
  }
  const auto trace_path = overrides.trace ? overrides.trace : rc->output.trace;
  const auto summary_path = overrides.summary ? overrides.summary : rc->output.summary;

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult result = execute(rc->problem, rc->solver);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json summary = solve_summary(rc->problem, rc->solver, result, wall);

    if (bilevel_only) {
      const BilevelProblem& prob = *rc->problem.bilevel;
      if (prob.bounds && prob.dimension() <= 3) {
        const Point oracle = brute_force_bilevel(prob, rc->problem.oracle_grid_step);
        summary["oracle"] = {{"x", to_json(oracle)},
                             {"grid_step", rc->problem.oracle_grid_step},
                             {"distance", (result.x - oracle).norm()}};
      }
    }
    if (!rc->diagnostics.empty()) {
      bool all_passed = true;
      summary["checks"] = run_diagnostics(rc->diagnostics, rc->seed, all_passed);
    }
    if (trace_path) write_file(*trace_path, trace_csv(result.trace));
    emit_summary(summary, summary_path);
    return result.trace.status == SolverStatus::converged ? exit_code::ok : exit_code::iteration_cap;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return exit_code::invalid_config;
  } catch (const std::exception& e) {
    std::cerr << (is_oracle_failure(e) ? "oracle failure: " : "error: ") << e.what() << '\n';
    return exit_code::oracle_failure;
  }
}

}  // namespace

int run_solve(const std::string& config_path, const CliOverrides& overrides) {
  return run_problem(config_path, overrides, false);
}

int run_bilevel(const std::string& config_path, const CliOverrides& overrides) {
  return run_problem(config_path, overrides, true);
}

int run_diagnose(const std::string& config_path, const CliOverrides& overrides) {
  int code = exit_code::ok;
  std::optional<RunConfig> rc = load_or_report(config_path, code);
  if (!rc) return code;
  if (rc->diagnostics.empty()) {
    std::cerr << "invalid config: no diagnostics listed\n";
    return exit_code::invalid_config;
  }
  try {
    bool all_passed = true;
    json checks = run_diagnostics(rc->diagnostics, rc->seed, all_passed);
    emit_summary(json{{"passed", all_passed}, {"checks", std::move(checks)}},
                 overrides.summary ? overrides.summary : rc->output.summary);
    return all_passed ? exit_code::ok : exit_code::check_failed;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return exit_code::invalid_config;
  } catch (const json::exception& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return exit_code::invalid_config;
  } catch (const std::exception& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return exit_code::oracle_failure;
  }
}

int run_bench(const std::string& suite, const std::string& out_csv) {
  if (suite != "builtin") {
    std::cerr << "unknown suite '" << suite << "'\n";
    return exit_code::invalid_config;
  }
  struct Row {
    std::string line;
    bool converged = false;
  };
  std::vector<std::future<Row>> jobs;
  for (const std::string& name : builtin_names()) {
    jobs.push_back(std::async(std::launch::async, [name] {
      const ProblemInstance problem = make_builtin(name);
      SolverSpec solver = build_solver(problem.solver_defaults, 0);
      solver.config.x0 = problem.x0;
      const SolveResult r = execute(problem, solver);
      const IterationRecord& last = r.trace.records.back();
      std::ostringstream os;
      os << name << ',' << to_string(r.trace.status) << ',' << r.trace.iterations() << ','
         << format_double((r.x - *problem.vip.known_solution).norm()) << ','
         << format_double(last.fix_residual) << ',' << format_double(last.step_norm) << ','
         << r.trace.invariants.fejer_violations << '\n';
      return Row{os.str(), r.trace.status == SolverStatus::converged};
    }));
  }
  std::string csv = "suite,status,iterations,final_error,fix_residual,step_norm,fejer_violations\n";
  bool all_converged = true;
  try {
    for (auto& job : jobs) {
      Row row = job.get();
      csv += row.line;
      all_converged = all_converged && row.converged;
    }
    write_file(out_csv, csv);
  } catch (const std::exception& e) {
    std::cerr << "bench failed: " << e.what() << '\n';
    return exit_code::oracle_failure;
  }
  return all_converged ? exit_code::ok : exit_code::iteration_cap;
}

}  // namespace cutvip::harness
