#pragma once

// Sampled checks of the operator and field hypotheses the convergence theory relies on.
// Reports are evidence over finite samples, never proofs.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cutvip/operators.hpp"
#include "cutvip/sampling.hpp"

namespace cutvip {

/// Relative slack for the sampled inequalities; each violation is divided by
/// max(1, |x|^2, |w|^2) before comparison.
inline constexpr double kCheckSlack = 1e-9;

struct CheckReport {
  std::string name;
  bool passed = true;
  /// Largest scaled violation (lhs - rhs) / scale seen; passed iff worst_violation <= slack.
  double worst_violation = -std::numeric_limits<double>::infinity();
  double slack = kCheckSlack;
  Point witness;
  /// Second point of the worst pair (fixed point or partner sample), when the check has one.
  Point witness_partner;
  std::size_t samples_used = 0;
};

/// Fixed points for a check: the explicit list if nonempty, else T.fix_sampler(count, seed).
std::vector<Point> resolve_fix_samples(const FixedPointOperator& T,
                                       const std::vector<Point>& fix_samples, std::size_t count,
                                       std::uint64_t seed);

/// max <T x - x, T x - w> over sampled x and fixed points w.
CheckReport check_cutter(const FixedPointOperator& T, const SampleRegion& xs,
                         const std::vector<Point>& fix_samples = {});

/// |T x - w|^2 <= |x - w|^2 - alpha |x - T x|^2 on samples.
CheckReport check_sqne(const FixedPointOperator& T, double alpha, const SampleRegion& xs,
                       const std::vector<Point>& fix_samples = {});

using MembershipPredicate = std::function<bool(const Point&)>;

/// Upper estimate of D(r) = inf over u in C with dist(u, Fix T) >= r of
/// dist(u, Fix T) - dist(T u, Fix T). +inf when no sample qualifies.
double estimate_D(const FixedPointOperator& T, const SampleRegion& C_region, double r,
                  const MembershipPredicate& in_C = {});

/// Same estimator over an explicit sample set.
double estimate_D(const FixedPointOperator& T, const std::vector<Point>& C_samples, double r);

struct QuasiShrinkingReport {
  std::vector<double> r_grid;
  std::vector<double> estimates;
  double threshold = 1e-9;
  /// Evidence only: all estimates at r > 0 exceed the threshold.
  bool consistent = true;
};

QuasiShrinkingReport probe_quasi_shrinking(const FixedPointOperator& T, const SampleRegion& C_region,
                                           const std::vector<double>& r_grid,
                                           const MembershipPredicate& in_C = {},
                                           double threshold = 1e-9);

/// <F(x), x - q> >= beta |F(x)| on the sampled region.
CheckReport check_condition_c(const VectorField& F, const Point& q, double beta,
                              const SampleRegion& outside_region);

/// Radius beyond which the constant-G field G(x - a) keeps an angle with x of cosine >= c,
/// r = l2 (1 + c) |a| / (l1 - l2 c) for c in (0, l1/l2).
double matrix_field_angle_radius(double lambda_min, double lambda_max, double c, double a_norm);

/// Smallest R >= r with |q|/R + beta <= c (beta in (0, c)).
double condition_c_radius(double r, double c, double beta, double q_norm);

/// <F(x) - F(y), x - y> >= alpha |x - y|^2 over sample pairs (2i, 2i+1).
CheckReport check_strong_monotonicity(const VectorField& F, double alpha,
                                      const SampleRegion& region);

struct ClosednessReport {
  std::vector<double> residuals;
  double target_residual = 0.0;
  bool residuals_vanish = false;
  bool target_fixed = false;
  /// False exactly when residuals vanish along the sequence but the target is not fixed.
  bool consistent = true;
};

ClosednessReport check_closedness_probe(const FixedPointOperator& T, const Point& target,
                                        const std::vector<Point>& sequence, double tol = 1e-6);

/// a_{k+1} = max(0, a_k - f(a_k) + b_k), returns a_K. b must hold at least K entries.
double sequence_lemma_probe(const std::function<double(double)>& f, const std::vector<double>& b,
                            double a0, std::size_t K);

/// (sum |x_i|^{a+b})^2 / (sum |x_i|^{2a} sum |x_i|^{2b}); lies in [n^-2, 1].
double check_norm_product_inequality(const Point& x, double a_exp, double b_exp);

}  // namespace cutvip
