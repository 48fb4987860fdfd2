#include "cutvip/solver.hpp"

#include <algorithm>
#include <cmath>

namespace cutvip {

namespace {

constexpr double kInequalitySlack = 1e-9;

void require_finite_output(const Point& v, const char* what) {
  if (!all_finite(v)) throw NumericError(std::string(what) + " returned a non-finite value");
}

Point initial_point(const SolverConfig& config, Eigen::Index n) {
  if (n < 1) throw InputError("solver: problem dimension must be >= 1");
  if (!config.x0) return Point::Zero(n);
  require_same_dimension(config.x0->size(), n, "solver: x0");
  if (!all_finite(*config.x0)) throw InputError("solver: x0 must be finite");
  return *config.x0;
}

std::optional<double> error_to(const std::optional<Point>& solution, const Point& x) {
  if (!solution) return std::nullopt;
  return (x - *solution).norm();
}

/// Shared loop for the two baselines: `advance` maps x^k to (x^{k+1}, partial record).
template <typename Advance>
SolveResult run_fixed_point_loop(Eigen::Index n, const SolverConfig& config,
                                 const std::optional<Point>& known_solution, Advance&& advance) {
  config.validate();
  Point x = initial_point(config, n);
  SolveResult result;
  result.trace.max_iterate_norm = x.norm();
  std::size_t below_tol = 0;
  for (std::size_t k = 0; k < config.max_iter; ++k) {
    IterationRecord rec;
    rec.k = k;
    Point next = advance(x, k, rec);
    require_finite_output(next, "baseline iteration");
    rec.step_norm = (next - x).norm();
    rec.err_to_solution = error_to(known_solution, x);
    result.trace.records.push_back(rec);
    result.trace.max_iterate_norm = std::max(result.trace.max_iterate_norm, next.norm());
    const bool stationary = rec.step_norm == 0.0 && rec.fix_residual == 0.0;
    x = std::move(next);
    below_tol = std::max(rec.fix_residual, rec.step_norm) <= config.tol ? below_tol + 1 : 0;
    if (stationary || below_tol >= config.consecutive) {
      result.trace.status = SolverStatus::converged;
      break;
    }
  }
  result.x = std::move(x);
  return result;
}

}  // namespace

bool validate_step_sequence(const StepSequence& s) {
  return std::isfinite(s.rho0) && s.rho0 > 0.0 && s.gamma > 0.0 && s.gamma <= 1.0;
}

RelaxationSchedule RelaxationSchedule::constant(double alpha, double mu) {
  RelaxationSchedule r;
  r.mu = mu;
  r.alpha_of_k = [alpha](std::size_t) { return alpha; };
  return r;
}

double RelaxationSchedule::operator()(std::size_t k) const {
  const double a = alpha_of_k(k);
  if (!(a >= mu && a <= 2.0 - mu)) {
    throw InputError("RelaxationSchedule: alpha_k outside [mu, 2 - mu]");
  }
  return a;
}

void SolverConfig::validate() const {
  if (max_iter < 1) throw InputError("SolverConfig: max_iter must be >= 1");
  if (!(tol > 0.0)) throw InputError("SolverConfig: tol must be > 0");
  if (consecutive < 1) throw InputError("SolverConfig: consecutive must be >= 1");
  if (!(eps_F >= 0.0)) throw InputError("SolverConfig: eps_F must be >= 0");
  if (!(cut_resolution >= 0.0)) throw InputError("SolverConfig: cut_resolution must be >= 0");
  if (!(relax.mu > 0.0 && relax.mu < 1.0)) throw InputError("SolverConfig: mu must lie in (0, 1)");
}

std::string to_string(SolverStatus s) {
  return s == SolverStatus::converged ? "converged" : "iteration_cap";
}

Point shifted_point(const Point& x, const Point& Fx, double rho, double eps_F) {
  if (!(rho > 0.0)) throw InputError("shifted_point: rho must be > 0");
  require_same_dimension(x.size(), Fx.size(), "shifted_point");
  const double norm = Fx.norm();
  if (norm > eps_F) return x - rho * (Fx / norm);
  return x;
}

StepResult vip_step(const Point& x, const VipProblem& problem, double rho, double alpha,
                    double eps_F, double cut_resolution) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InputError("vip_step: alpha must lie in (0, 2)");
  if (!(rho > 0.0)) throw InputError("vip_step: rho must be > 0");
  if (!all_finite(x)) throw NumericError("vip_step: non-finite iterate");

  StepResult s;
  s.tx = problem.T(x);
  require_finite_output(s.tx, "T");
  require_same_dimension(s.tx.size(), x.size(), "vip_step: T(x)");
  s.Fx = problem.F(x);
  require_finite_output(s.Fx, "F");
  require_same_dimension(s.Fx.size(), x.size(), "vip_step: F(x)");

  s.cut = halfspace_from_cut(x, s.tx);
  if (!s.cut.degenerate && s.cut.normal.norm() <= cut_resolution * rho * std::max(1.0, x.norm())) {
    s.cut.degenerate = true;
  }
  s.shifted = shifted_point(x, s.Fx, rho, eps_F);
  s.next = s.cut.contains(s.shifted) ? s.shifted : relaxed_project(s.shifted, s.cut, alpha);

  s.record.rho = rho;
  s.record.alpha = alpha;
  s.record.norm_F = s.Fx.norm();
  s.record.fix_residual = (s.tx - x).norm();
  s.record.step_norm = (s.next - x).norm();
  s.record.shift_norm = (s.shifted - x).norm();
  return s;
}

SolveResult vip_solve(const VipProblem& problem, const SolverConfig& config) {
  config.validate();
  if (!validate_step_sequence(config.steps)) throw InputError("vip_solve: invalid step sequence");
  if (problem.T.dimension != 0) require_same_dimension(problem.T.dimension, problem.dimension, "vip_solve: T");

  Point x = initial_point(config, problem.dimension);
  SolveResult result;
  SolverTrace& trace = result.trace;
  InvariantTally& tally = trace.invariants;
  trace.max_iterate_norm = x.norm();

  std::vector<Point> fix_points;
  if (config.record_invariants && problem.T.has_fix_sampler() && config.fejer_samples > 0) {
    fix_points = problem.T.fix_sampler(config.fejer_samples, config.seed);
  }
  const bool check_distance = config.record_invariants && problem.T.has_fix_projection();
  double dist_x = check_distance ? problem.T.distance_to_fix(x) : 0.0;

  std::size_t below_tol = 0;
  for (std::size_t k = 0; k < config.max_iter; ++k) {
    const double rho = config.steps(k);
    const double alpha = config.relax(k);
    StepResult step = vip_step(x, problem, rho, alpha, config.eps_F, config.cut_resolution);
    IterationRecord& rec = step.record;
    rec.k = k;
    rec.err_to_solution = error_to(problem.known_solution, x);

    if (config.record_invariants) {
      const double shift = *rec.shift_norm;
      // |z - x| is formed by subtraction, so its rounding error scales with |x|, not rho.
      const double shift_scale = std::max({rho, x.norm(), step.shifted.norm()});
      rec.shift_ok = shift == 0.0 || std::abs(shift - rho) <= 1e-12 * shift_scale;
      ++tally.shift_checked;
      if (!*rec.shift_ok) ++tally.shift_violations;

      if (!fix_points.empty()) {
        const double decrement = (2.0 - alpha) / alpha * (step.next - step.shifted).squaredNorm();
        bool ok = true;
        for (const Point& w : fix_points) {
          const double lhs = (step.next - w).squaredNorm();
          const double rhs = (step.shifted - w).squaredNorm() - decrement;
          const double scale = std::max({1.0, step.next.squaredNorm(), step.shifted.squaredNorm(),
                                         w.squaredNorm()});
          const double violation = (lhs - rhs) / scale;
          tally.worst_fejer = std::max(tally.worst_fejer, violation);
          ok = ok && violation <= kInequalitySlack;
        }
        rec.fejer_ok = ok;
        ++tally.fejer_checked;
        if (!ok) ++tally.fejer_violations;
      }

      if (check_distance) {
        const double dist_next = problem.T.distance_to_fix(step.next);
        const double rho_tilde = shift > 0.0 ? rho : 0.0;
        const double slack = 1e-12 * std::max({1.0, x.norm(), step.next.norm()});
        rec.drift_ok = dist_next <= dist_x + rho_tilde + slack;
        rec.step_bound_ok = rec.step_norm <= rho + alpha * dist_x + slack;
        ++tally.drift_checked;
        ++tally.step_bound_checked;
        if (!*rec.drift_ok) ++tally.drift_violations;
        if (!*rec.step_bound_ok) ++tally.step_bound_violations;
        dist_x = dist_next;
      }
    }

    trace.records.push_back(rec);
    trace.max_iterate_norm = std::max(trace.max_iterate_norm, step.next.norm());

    // x in Fix(T) with F(x) = 0: every later iterate equals x.
    const bool stationary = rec.fix_residual == 0.0 && *rec.shift_norm == 0.0 && step.next == x;
    below_tol = std::max(rec.fix_residual, rec.step_norm) <= config.tol ? below_tol + 1 : 0;
    x = std::move(step.next);
    if (stationary || below_tol >= config.consecutive) {
      trace.status = SolverStatus::converged;
      break;
    }
  }
  result.x = std::move(x);
  return result;
}

SolveResult auslender_solve(const VectorField& F, const FixedPointOperator& S_projector,
                            const std::function<double(std::size_t)>& tau_schedule,
                            const SolverConfig& config,
                            const std::optional<Point>& known_solution) {
  return run_fixed_point_loop(
      S_projector.dimension, config, known_solution,
      [&](const Point& x, std::size_t k, IterationRecord& rec) -> Point {
        const double tau = tau_schedule(k);
        if (!(tau >= 0.0) || !std::isfinite(tau)) throw InputError("auslender_solve: tau_k must be >= 0");
        const Point Fx = F(x);
        require_finite_output(Fx, "F");
        const Point px = S_projector(x);
        require_finite_output(px, "P_S");
        rec.rho = tau;
        rec.norm_F = Fx.norm();
        rec.fix_residual = (px - x).norm();
        return S_projector(x - tau * Fx);
      });
}

SolveResult yamada_ogura_solve(const VectorField& F, const FixedPointOperator& T,
                               const std::function<double(std::size_t)>& lambda_schedule,
                               const SolverConfig& config,
                               const std::optional<Point>& known_solution) {
  return run_fixed_point_loop(
      T.dimension, config, known_solution,
      [&](const Point& x, std::size_t k, IterationRecord& rec) -> Point {
        const double lambda = lambda_schedule(k + 1);
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
          throw InputError("yamada_ogura_solve: lambda_k must be >= 0");
        }
        const Point tx = T(x);
        require_finite_output(tx, "T");
        const Point Ftx = F(tx);
        require_finite_output(Ftx, "F");
        rec.rho = lambda;
        rec.norm_F = F(x).norm();
        rec.fix_residual = (tx - x).norm();
        return tx - lambda * Ftx;
      });
}

std::function<double(std::size_t)> harmonic_schedule(double lambda0) {
  return [lambda0](std::size_t k) { return lambda0 / (static_cast<double>(k) + 1.0); };
}

}  // namespace cutvip
