#pragma once

// min { f2 | Argmin { g | C } } with f2 = 1/p |x|_p^p + alpha/2 |x|_2^2, solved as
// VIP(grad f2, Fix(J_lambda^{dg + N_C})).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cutvip/operators.hpp"
#include "cutvip/solver.hpp"

namespace cutvip {

struct BilevelProblem {
  ConvexFunctionOracle g;
  FixedPointOperator C;
  double p = 2.0;
  double alpha_reg = 0.0;
  double lambda = 1.0;
  ResolventOptions resolvent;
  /// Bounding box of C, needed by the grid oracle.
  std::optional<std::pair<Point, Point>> bounds;
  /// Sampler of Argmin{g | C} = Fix(T), used only for invariant checks.
  std::function<std::vector<Point>(std::size_t, std::uint64_t)> argmin_sampler;

  Eigen::Index dimension() const { return C.dimension; }
  void validate() const;
};

/// (x_i |x_i|^{p-2})_i
Point grad_pnorm(const Point& x, double p);

/// grad_pnorm(x, p) + alpha_reg x
Point grad_f2(const Point& x, double p, double alpha_reg);

/// 1/p |x|_p^p + alpha_reg/2 |x|_2^2
double f2_value(const Point& x, double p, double alpha_reg);

/// The resolvent-backed VIP for `prob`.
VipProblem make_bilevel_vip(const BilevelProblem& prob,
                            const std::optional<Point>& known_solution = std::nullopt);

SolveResult solve_p_min_norm(const BilevelProblem& prob, const SolverConfig& cfg,
                             const std::optional<Point>& known_solution = std::nullopt);

/// Grid enumeration of C (dimension <= 3): the inner-optimal set is every grid point with
/// g <= min g + 1e-8 max(1, |min g|); returns the f2-minimizer over it, ties broken
/// lexicographically.
Point brute_force_bilevel(const BilevelProblem& prob, double grid_step);

}  // namespace cutvip
