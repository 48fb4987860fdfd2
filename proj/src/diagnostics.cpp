#include "cutvip/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace cutvip {

namespace {

constexpr std::size_t kDefaultFixSamples = 32;

double pair_scale(const Point& a, const Point& b) {
  return std::max({1.0, a.squaredNorm(), b.squaredNorm()});
}

void record(CheckReport& report, double violation, const Point& x, const Point& partner) {
  ++report.samples_used;
  if (violation > report.worst_violation) {
    report.worst_violation = violation;
    report.witness = x;
    report.witness_partner = partner;
  }
}

void finish(CheckReport& report) { report.passed = report.worst_violation <= report.slack; }

/// Shared body of the cutter and SQNE checks: `violation(x, Tx, w)` is unscaled.
template <typename Violation>
CheckReport operator_inequality(std::string name, const FixedPointOperator& T,
                                const SampleRegion& xs, const std::vector<Point>& fix_samples,
                                Violation&& violation) {
  const std::vector<Point> ws = resolve_fix_samples(T, fix_samples, kDefaultFixSamples, xs.seed + 1);
  CheckReport report;
  report.name = std::move(name);
  for (const Point& x : sample_region(xs)) {
    const Point tx = T(x);
    for (const Point& w : ws) {
      record(report, violation(x, tx, w) / pair_scale(x, w), x, w);
    }
  }
  finish(report);
  return report;
}

}  // namespace

std::vector<Point> resolve_fix_samples(const FixedPointOperator& T,
                                       const std::vector<Point>& fix_samples, std::size_t count,
                                       std::uint64_t seed) {
  if (!fix_samples.empty()) return fix_samples;
  if (!T.has_fix_sampler()) {
    throw ConfigError("no fixed-point samples for operator '" + T.name + "'");
  }
  std::vector<Point> ws = T.fix_sampler(count, seed);
  if (ws.empty()) throw ConfigError("fixed-point sampler of '" + T.name + "' returned nothing");
  return ws;
}

CheckReport check_cutter(const FixedPointOperator& T, const SampleRegion& xs,
                         const std::vector<Point>& fix_samples) {
  return operator_inequality("cutter(" + T.name + ")", T, xs, fix_samples,
                             [](const Point& x, const Point& tx, const Point& w) {
                               return (tx - x).dot(tx - w);
                             });
}

CheckReport check_sqne(const FixedPointOperator& T, double alpha, const SampleRegion& xs,
                       const std::vector<Point>& fix_samples) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InputError("check_sqne: alpha must be >= 0");
  return operator_inequality(
      "sqne(" + T.name + ")", T, xs, fix_samples,
      [alpha](const Point& x, const Point& tx, const Point& w) {
        return (tx - w).squaredNorm() - (x - w).squaredNorm() + alpha * (x - tx).squaredNorm();
      });
}

double estimate_D(const FixedPointOperator& T, const std::vector<Point>& C_samples, double r) {
  if (!(r >= 0.0)) throw InputError("estimate_D: r must be >= 0");
  if (!T.has_fix_projection()) throw ConfigError("estimate_D: operator has no fix-set projection");
  double best = std::numeric_limits<double>::infinity();
  for (const Point& u : C_samples) {
    const double du = T.distance_to_fix(u);
    if (du < r) continue;
    best = std::min(best, du - T.distance_to_fix(T(u)));
  }
  return best;
}

namespace {

std::vector<Point> region_points(const SampleRegion& region, const MembershipPredicate& in_C) {
  std::vector<Point> pts = sample_region(region);
  if (in_C) std::erase_if(pts, [&](const Point& p) { return !in_C(p); });
  return pts;
}

}  // namespace

double estimate_D(const FixedPointOperator& T, const SampleRegion& C_region, double r,
                  const MembershipPredicate& in_C) {
  return estimate_D(T, region_points(C_region, in_C), r);
}

QuasiShrinkingReport probe_quasi_shrinking(const FixedPointOperator& T, const SampleRegion& C_region,
                                           const std::vector<double>& r_grid,
                                           const MembershipPredicate& in_C, double threshold) {
  const std::vector<Point> pts = region_points(C_region, in_C);
  QuasiShrinkingReport report;
  report.r_grid = r_grid;
  report.threshold = threshold;
  for (double r : r_grid) {
    const double d = estimate_D(T, pts, r);
    report.estimates.push_back(d);
    if (r > 0.0 && !(d > threshold)) report.consistent = false;
  }
  return report;
}

CheckReport check_condition_c(const VectorField& F, const Point& q, double beta,
                              const SampleRegion& outside_region) {
  if (!(beta > 0.0)) throw InputError("check_condition_c: beta must be > 0");
  CheckReport report;
  report.name = "condition_c";
  for (const Point& x : sample_region(outside_region)) {
    const Point fx = F(x);
    const double violation = beta * fx.norm() - fx.dot(x - q);
    record(report, violation / pair_scale(x, q), x, q);
  }
  finish(report);
  return report;
}

double matrix_field_angle_radius(double lambda_min, double lambda_max, double c, double a_norm) {
  if (!(lambda_min > 0.0 && lambda_max >= lambda_min)) {
    throw InputError("matrix_field_angle_radius: need 0 < lambda_min <= lambda_max");
  }
  if (!(c > 0.0 && c < lambda_min / lambda_max)) {
    throw InputError("matrix_field_angle_radius: c must lie in (0, lambda_min / lambda_max)");
  }
  return lambda_max * (1.0 + c) * a_norm / (lambda_min - lambda_max * c);
}

double condition_c_radius(double r, double c, double beta, double q_norm) {
  if (!(beta > 0.0 && beta < c)) throw InputError("condition_c_radius: beta must lie in (0, c)");
  return std::max(r, q_norm / (c - beta));
}

CheckReport check_strong_monotonicity(const VectorField& F, double alpha,
                                      const SampleRegion& region) {
  if (!(alpha > 0.0)) throw InputError("check_strong_monotonicity: alpha must be > 0");
  const std::vector<Point> pts = sample_region(region);
  if (pts.size() < 2) throw ConfigError("check_strong_monotonicity: need at least two samples");
  CheckReport report;
  report.name = "strong_monotonicity";
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    const Point& x = pts[i];
    const Point& y = pts[i + 1];
    const Point d = x - y;
    const double violation = alpha * d.squaredNorm() - (F(x) - F(y)).dot(d);
    record(report, violation / pair_scale(x, y), x, y);
  }
  finish(report);
  return report;
}

ClosednessReport check_closedness_probe(const FixedPointOperator& T, const Point& target,
                                        const std::vector<Point>& sequence, double tol) {
  ClosednessReport report;
  report.residuals.reserve(sequence.size());
  for (const Point& x : sequence) report.residuals.push_back((T(x) - x).norm());
  report.target_residual = (T(target) - target).norm();
  report.residuals_vanish = !report.residuals.empty() && report.residuals.back() <= tol;
  report.target_fixed = report.target_residual <= tol;
  report.consistent = report.target_fixed || !report.residuals_vanish;
  return report;
}

double sequence_lemma_probe(const std::function<double(double)>& f, const std::vector<double>& b,
                            double a0, std::size_t K) {
  if (b.size() < K) throw InputError("sequence_lemma_probe: need at least K perturbation terms");
  if (!(a0 >= 0.0)) throw InputError("sequence_lemma_probe: a0 must be >= 0");
  double a = a0;
  for (std::size_t k = 0; k < K; ++k) a = std::max(0.0, a - f(a) + b[k]);
  return a;
}

double check_norm_product_inequality(const Point& x, double a_exp, double b_exp) {
  if (!(a_exp >= 0.5 && b_exp >= 0.5)) {
    throw InputError("check_norm_product_inequality: exponents must be >= 1/2");
  }
  const double peak = x.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw InputError("check_norm_product_inequality: x must be nonzero");
  // The ratio is scale-invariant; normalizing keeps every power in [0, 1].
  const Eigen::ArrayXd ax = x.cwiseAbs().array() / peak;
  const double num = ax.pow(a_exp + b_exp).sum();
  const double den_a = ax.pow(2.0 * a_exp).sum();
  const double den_b = ax.pow(2.0 * b_exp).sum();
  return num * num / (den_a * den_b);
}

}  // namespace cutvip
