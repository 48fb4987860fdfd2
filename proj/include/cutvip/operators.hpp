#pragma once

// Cutter operators (metric projections, subgradient projectors, C-delta operators, resolvents),
// their relaxations, and the vector fields used as F in VIP(F, Fix(T)).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cutvip/geometry.hpp"

namespace cutvip {

using VectorField = std::function<Point(const Point&)>;

/// T : R^n -> R^n plus whatever is known about Fix(T). The oracles are optional; diagnostics
/// fall back to sampled checks when they are absent.
struct FixedPointOperator {
  std::string name;
  Eigen::Index dimension = 0;
  std::function<Point(const Point&)> apply;
  std::function<bool(const Point&)> fix_membership;
  /// R = P_Fix(T).
  std::function<Point(const Point&)> fix_projection;
  std::function<std::vector<Point>(std::size_t count, std::uint64_t seed)> fix_sampler;

  Point operator()(const Point& x) const { return apply(x); }

  bool has_fix_membership() const { return static_cast<bool>(fix_membership); }
  bool has_fix_projection() const { return static_cast<bool>(fix_projection); }
  bool has_fix_sampler() const { return static_cast<bool>(fix_sampler); }

  /// dist(x, Fix(T)); requires fix_projection.
  double distance_to_fix(const Point& x) const;
};

/// f together with a subgradient selection g_f(y) in the subdifferential of f at y.
struct ConvexFunctionOracle {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> subgradient;

  double operator()(const Point& x) const { return value(x); }
};

/// Common convex functions.
namespace functions {
ConvexFunctionOracle zero();
/// <a, x> - b
ConvexFunctionOracle affine(Point a, double b);
/// (<a, x> - b)^2
ConvexFunctionOracle squared_affine(Point a, double b);
/// 1/2 |x|^2
ConvexFunctionOracle half_squared_norm();
/// |x - center|^2 - radius^2
ConvexFunctionOracle squared_ball(Point center, double radius);
/// |x - center| - radius (subgradient 0 at the center)
ConvexFunctionOracle ball_distance(Point center, double radius);
}  // namespace functions

FixedPointOperator identity_operator(Eigen::Index n);
FixedPointOperator projection_box(Point lo, Point hi);
FixedPointOperator projection_ball(Point center, double radius);
FixedPointOperator projection_halfspace_op(HalfSpace<double> h);

/// Pi_{f<=0}(y) = y - f(y)/|g|^2 g when f(y) > 0. `witness` must satisfy f(witness) <= 0.
/// An optional sampler of the sublevel set can be supplied for diagnostics.
FixedPointOperator subgradient_projector(
    ConvexFunctionOracle f, const Point& witness,
    std::function<std::vector<Point>(std::size_t, std::uint64_t)> sublevel_sampler = {});

/// C = {x : c(x) <= 0} with clearance parameter delta in (0, 1].
struct CDeltaSpec {
  ConvexFunctionOracle c;
  double delta = 1.0;
  Point witness;

  void validate() const;
};

/// Picks y in A_delta(z) for z outside C.
using CDeltaSelection = std::function<Point(const CDeltaSpec&, const Point& z)>;

/// The subgradient half-space point z - c(z)/|g_c(z)|^2 g_c(z).
Point subgradient_selection(const CDeltaSpec& spec, const Point& z);

Point c_delta_apply(const CDeltaSpec& spec, const Point& z,
                    const CDeltaSelection& select = subgradient_selection);

/// True iff every sample lies in H(z, y) and dist(z, H(z, y)) >= delta c(z).
bool validate_a_delta(const CDeltaSpec& spec, const Point& z, const Point& y,
                      const std::vector<Point>& c_samples);

FixedPointOperator c_delta_operator(
    CDeltaSpec spec, CDeltaSelection select = subgradient_selection,
    std::function<std::vector<Point>(std::size_t, std::uint64_t)> sublevel_sampler = {});

/// T_alpha = I + alpha (T - I), alpha in [0, 2].
FixedPointOperator relax_operator(const FixedPointOperator& t, double alpha);

struct ResolventOptions {
  double inner_tol = 1e-10;
  std::size_t max_inner = 100000;
  /// Lipschitz bound of the gradient of g; backtracking is used when absent.
  std::optional<double> smoothness;
};

/// argmin_{u in C} g(u) + |u - y|^2 / (2 lambda), i.e. J_lambda^{dg + N_C}(y), by projected
/// gradient descent. Throws ConvergenceError when the inner cap is hit.
Point resolvent_apply(const ConvexFunctionOracle& g, const FixedPointOperator& projector,
                      double lambda, const Point& y, const ResolventOptions& options = {});

FixedPointOperator resolvent_operator(ConvexFunctionOracle g, FixedPointOperator projector,
                                      double lambda, ResolventOptions options = {});

/// F(x) = G (x - a) for symmetric positive-definite G.
VectorField matrix_field(const Eigen::MatrixXd& G, Point a);

}  // namespace cutvip
