#include "cutvip/bilevel.hpp"

#include <cmath>
#include <limits>

namespace cutvip {

void BilevelProblem::validate() const {
  if (!(p >= 2.0) || !std::isfinite(p)) throw InputError("BilevelProblem: p must be >= 2");
  if (!(alpha_reg >= 0.0)) throw InputError("BilevelProblem: alpha_reg must be >= 0");
  if (p > 2.0 && !(alpha_reg > 0.0)) {
    throw InputError("BilevelProblem: p > 2 requires alpha_reg > 0 for strong monotonicity");
  }
  if (!(lambda > 0.0)) throw InputError("BilevelProblem: lambda must be > 0");
  if (!g.value || !g.subgradient) throw InputError("BilevelProblem: inner objective is incomplete");
  if (!C.apply || C.dimension < 1) throw InputError("BilevelProblem: C projector is missing");
}

Point grad_pnorm(const Point& x, double p) {
  if (!(p >= 2.0)) throw InputError("grad_pnorm: p must be >= 2");
  if (p == 2.0) return x;
  return (x.array() * x.array().abs().pow(p - 2.0)).matrix();
}

Point grad_f2(const Point& x, double p, double alpha_reg) {
  return grad_pnorm(x, p) + alpha_reg * x;
}

double f2_value(const Point& x, double p, double alpha_reg) {
  return x.array().abs().pow(p).sum() / p + 0.5 * alpha_reg * x.squaredNorm();
}

VipProblem make_bilevel_vip(const BilevelProblem& prob, const std::optional<Point>& known_solution) {
  prob.validate();
  VipProblem vip;
  vip.dimension = prob.dimension();
  vip.T = resolvent_operator(prob.g, prob.C, prob.lambda, prob.resolvent);
  vip.T.fix_sampler = prob.argmin_sampler;
  vip.F = [p = prob.p, a = prob.alpha_reg](const Point& x) { return grad_f2(x, p, a); };
  vip.known_solution = known_solution;
  return vip;
}

SolveResult solve_p_min_norm(const BilevelProblem& prob, const SolverConfig& cfg,
                             const std::optional<Point>& known_solution) {
  return vip_solve(make_bilevel_vip(prob, known_solution), cfg);
}

namespace {

bool lexicographically_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

/// Visits every grid point of the box in lexicographic order.
template <typename Visit>
void for_each_grid_point(const Point& lo, const Point& hi, double step, Visit&& visit) {
  const Eigen::Index n = lo.size();
  std::vector<long> counts(n), index(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    counts[i] = static_cast<long>(std::floor((hi[i] - lo[i]) / step + 1e-9)) + 1;
  }
  Point u(n);
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) u[i] = lo[i] + static_cast<double>(index[i]) * step;
    visit(u);
    Eigen::Index d = n - 1;
    while (d >= 0 && ++index[d] == counts[d]) index[d--] = 0;
    if (d < 0) return;
  }
}

}  // namespace

Point brute_force_bilevel(const BilevelProblem& prob, double grid_step) {
  prob.validate();
  const Eigen::Index n = prob.dimension();
  if (n > 3) throw UnsupportedError("brute_force_bilevel: dimension must be <= 3");
  if (!(grid_step > 0.0)) throw InputError("brute_force_bilevel: grid_step must be > 0");
  if (!prob.bounds) throw InputError("brute_force_bilevel: C needs a bounding box");
  const auto& [lo, hi] = *prob.bounds;
  require_same_dimension(lo.size(), n, "brute_force_bilevel");
  require_same_dimension(hi.size(), n, "brute_force_bilevel");
  if (!all_finite(lo) || !all_finite(hi) || (hi - lo).minCoeff() < 0.0) {
    throw InputError("brute_force_bilevel: empty or unbounded bounding box");
  }

  auto in_C = [&](const Point& u) {
    if (prob.C.has_fix_membership()) return prob.C.fix_membership(u);
    return (prob.C(u) - u).norm() <= 1e-12 * std::max(1.0, u.norm());
  };

  std::vector<Point> feasible;
  std::vector<double> g_values;
  for_each_grid_point(lo, hi, grid_step, [&](const Point& u) {
    if (!in_C(u)) return;
    feasible.push_back(u);
    g_values.push_back(prob.g.value(u));
  });
  if (feasible.empty()) throw InputError("brute_force_bilevel: no grid point lies in C");

  double g_min = std::numeric_limits<double>::infinity();
  for (double v : g_values) g_min = std::min(g_min, v);
  const double g_cut = g_min + 1e-8 * std::max(1.0, std::abs(g_min));

  std::optional<Point> best;
  double best_f2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < feasible.size(); ++i) {
    if (g_values[i] > g_cut) continue;
    const double f = f2_value(feasible[i], prob.p, prob.alpha_reg);
    if (f < best_f2 || (f == best_f2 && best && lexicographically_less(feasible[i], *best))) {
      best_f2 = f;
      best = feasible[i];
    }
  }
  return *best;
}

}  // namespace cutvip
