#pragma once

// Half-space-cut method for VIP(F, Fix(T)) with T a cutter, plus the Auslender projected step
// and the Yamada-Ogura hybrid steepest descent iteration as baselines.

#include <cmath>
#include <cstdint>
#include <limits>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cutvip/geometry.hpp"
#include "cutvip/operators.hpp"

namespace cutvip {

/// rho_k = rho0 / (k + 1)^gamma.
struct StepSequence {
  double rho0 = 1.0;
  double gamma = 1.0;

  double operator()(std::size_t k) const {
    return rho0 / std::pow(static_cast<double>(k) + 1.0, gamma);
  }
};

/// rho0 > 0 and gamma in (0, 1], so rho_k -> 0 with a divergent sum.
bool validate_step_sequence(const StepSequence& s);

struct RelaxationSchedule {
  double mu = 0.1;
  std::function<double(std::size_t)> alpha_of_k = [](std::size_t) { return 1.0; };

  static RelaxationSchedule constant(double alpha, double mu = 0.1);

  /// alpha_k, checked against [mu, 2 - mu].
  double operator()(std::size_t k) const;
};

struct VipProblem {
  VectorField F;
  FixedPointOperator T;
  Eigen::Index dimension = 0;
  std::optional<Point> known_solution;
};

struct SolverConfig {
  StepSequence steps;
  RelaxationSchedule relax;
  std::size_t max_iter = 100000;
  double tol = 1e-4;
  std::size_t consecutive = 10;
  double eps_F = 1e-15;
  /// A cut with |x - T x| <= cut_resolution * rho_k * max(1, |x|) is treated as the whole
  /// space: below that, rounding in x - T x tilts the normal enough to misplace the projected
  /// point by more than ~1e-9. Zero keeps only the 1e-14 degeneracy test of halfspace_from_cut.
  double cut_resolution = 1e-6;
  bool record_invariants = false;
  /// Number of fixed points drawn from T.fix_sampler for the Fejer check.
  std::size_t fejer_samples = 10;
  std::uint64_t seed = 0;
  std::optional<Point> x0;

  void validate() const;
};

enum class SolverStatus { converged, iteration_cap };

std::string to_string(SolverStatus s);

struct IterationRecord {
  std::size_t k = 0;
  double rho = 0.0;
  std::optional<double> alpha;
  double norm_F = 0.0;
  double fix_residual = 0.0;
  double step_norm = 0.0;
  std::optional<double> shift_norm;
  std::optional<double> err_to_solution;
  std::optional<bool> fejer_ok;
  // Per-iteration invariant outcomes; drift/step bounds need the fix-set projection.
  std::optional<bool> shift_ok;
  std::optional<bool> drift_ok;
  std::optional<bool> step_bound_ok;
};

struct InvariantTally {
  std::size_t fejer_checked = 0, fejer_violations = 0;
  std::size_t shift_checked = 0, shift_violations = 0;
  std::size_t drift_checked = 0, drift_violations = 0;
  std::size_t step_bound_checked = 0, step_bound_violations = 0;
  double worst_fejer = -std::numeric_limits<double>::infinity();
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  SolverStatus status = SolverStatus::iteration_cap;
  /// max_k |x^k|, reported as the boundedness witness.
  double max_iterate_norm = 0.0;
  InvariantTally invariants;

  std::size_t iterations() const { return records.size(); }
};

struct SolveResult {
  Point x;
  SolverTrace trace;
};

/// x - rho Fx / |Fx| when |Fx| > eps_F, otherwise x.
Point shifted_point(const Point& x, const Point& Fx, double rho, double eps_F = 1e-15);

struct StepResult {
  Point next;
  Point shifted;
  Point tx;
  Point Fx;
  HalfSpace<double> cut;
  IterationRecord record;
};

/// One iteration: cut H(x, T x), shift along -F(x)/|F(x)|, relaxed projection onto the cut.
StepResult vip_step(const Point& x, const VipProblem& problem, double rho, double alpha,
                    double eps_F = 1e-15, double cut_resolution = 0.0);

SolveResult vip_solve(const VipProblem& problem, const SolverConfig& config);

/// x^{k+1} = P_S(x^k - tau_k F(x^k)).
SolveResult auslender_solve(const VectorField& F, const FixedPointOperator& S_projector,
                            const std::function<double(std::size_t)>& tau_schedule,
                            const SolverConfig& config,
                            const std::optional<Point>& known_solution = std::nullopt);

/// x^{k+1} = T(x^k) - lambda_{k+1} F(T(x^k)).
SolveResult yamada_ogura_solve(const VectorField& F, const FixedPointOperator& T,
                               const std::function<double(std::size_t)>& lambda_schedule,
                               const SolverConfig& config,
                               const std::optional<Point>& known_solution = std::nullopt);

/// lambda_k = lambda0 / (k + 1).
std::function<double(std::size_t)> harmonic_schedule(double lambda0);

}  // namespace cutvip
