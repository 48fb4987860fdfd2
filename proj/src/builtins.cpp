#include <stdexcept>

#include "cutvip/harness.hpp"
#include "cutvip/sampling.hpp"

namespace cutvip::harness {

namespace {

Point vec2(double a, double b) { return (Point(2) << a, b).finished(); }

/// Uniform samples on the segment [from, to].
std::function<std::vector<Point>(std::size_t, std::uint64_t)> segment_sampler(Point from, Point to) {
  return [from = std::move(from), to = std::move(to)](std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = rng.uniform();
      out.push_back((1.0 - t) * from + t * to);
    }
    return out;
  };
}

const json kProjectionDefaults = {
    {"max_iter", 100000}, {"tol", 1e-4}, {"record_invariants", true}};

ProblemInstance p1_box() {
  ProblemInstance p;
  p.name = "p1_box";
  p.vip.dimension = 2;
  p.vip.T = projection_box(vec2(0, 0), vec2(1, 1));
  p.vip.F = [a = vec2(2.0, 0.5)](const Point& x) -> Point { return x - a; };
  p.vip.known_solution = vec2(1.0, 0.5);
  p.x0 = vec2(-1.0, 0.0);
  p.solver_defaults = kProjectionDefaults;
  return p;
}

ProblemInstance g_weighted_box() {
  ProblemInstance p;
  p.name = "g_weighted_box";
  Eigen::MatrixXd G(2, 2);
  G << 2, 1, 1, 2;
  p.vip.dimension = 2;
  p.vip.T = projection_box(vec2(0, 0), vec2(1, 1));
  p.vip.F = matrix_field(G, vec2(2, 2));
  p.vip.known_solution = vec2(1.0, 1.0);
  p.x0 = vec2(0.0, 0.0);
  p.solver_defaults = kProjectionDefaults;
  return p;
}

ProblemInstance bilevel_instance(std::string name, Point a, double b, double p_exp,
                                 double alpha_reg, Point argmin_from, Point argmin_to,
                                 Point solution, Point x0) {
  BilevelProblem prob;
  prob.g = functions::squared_affine(a, b);
  prob.C = projection_box(vec2(0, 0), vec2(2, 2));
  prob.p = p_exp;
  prob.alpha_reg = alpha_reg;
  prob.lambda = 1.0;
  prob.resolvent.inner_tol = 1e-12;
  prob.resolvent.smoothness = 2.0 * a.squaredNorm();
  prob.bounds = std::make_pair(vec2(0, 0), vec2(2, 2));
  prob.argmin_sampler = segment_sampler(std::move(argmin_from), std::move(argmin_to));

  ProblemInstance p;
  p.name = std::move(name);
  p.vip = make_bilevel_vip(prob, solution);
  p.bilevel = std::move(prob);
  p.x0 = std::move(x0);
  p.solver_defaults = kProjectionDefaults;
  return p;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"p1_box", "g_weighted_box", "bilevel_symmetric", "bilevel_pnorm2"};
}

ProblemInstance make_builtin(const std::string& name) {
  if (name == "p1_box") return p1_box();
  if (name == "g_weighted_box") return g_weighted_box();
  if (name == "bilevel_symmetric") {
    // Argmin{(x1 + x2 - 1)^2 | [0,2]^2} is the segment x1 + x2 = 1; symmetry picks its midpoint.
    return bilevel_instance(name, vec2(1, 1), 1.0, 4.0, 0.01, vec2(0, 1), vec2(1, 0),
                            vec2(0.5, 0.5), vec2(2.0, 0.0));
  }
  if (name == "bilevel_pnorm2") {
    // Minimal-norm point of 2 x1 + x2 = 2 is 2a/|a|^2 with a = (2, 1).
    return bilevel_instance(name, vec2(2, 1), 2.0, 2.0, 0.0, vec2(0, 2), vec2(1, 0),
                            vec2(0.8, 0.4), vec2(2.0, 2.0));
  }
  throw ConfigError("unknown builtin problem '" + name + "'");
}

}  // namespace cutvip::harness
