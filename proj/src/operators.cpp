#include "cutvip/operators.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "cutvip/sampling.hpp"

namespace cutvip {

namespace {

void require_finite(const Point& x, const char* where) {
  if (!all_finite(x)) throw InputError(std::string(where) + ": non-finite input");
}

std::string format_alpha(double alpha) {
  std::ostringstream os;
  os << alpha;
  return os.str();
}

}  // namespace

double FixedPointOperator::distance_to_fix(const Point& x) const {
  if (!fix_projection) throw ConfigError(name + ": no fix-set projection available");
  return (x - fix_projection(x)).norm();
}

namespace functions {

ConvexFunctionOracle zero() {
  return {[](const Point&) { return 0.0; },
          [](const Point& x) -> Point { return Point::Zero(x.size()); }};
}

ConvexFunctionOracle affine(Point a, double b) {
  return {[a, b](const Point& x) { return a.dot(x) - b; }, [a](const Point&) { return a; }};
}

ConvexFunctionOracle squared_affine(Point a, double b) {
  return {[a, b](const Point& x) {
            const double r = a.dot(x) - b;
            return r * r;
          },
          [a, b](const Point& x) -> Point { return 2.0 * (a.dot(x) - b) * a; }};
}

ConvexFunctionOracle half_squared_norm() {
  return {[](const Point& x) { return 0.5 * x.squaredNorm(); }, [](const Point& x) { return x; }};
}

ConvexFunctionOracle squared_ball(Point center, double radius) {
  return {[center, radius](const Point& x) {
            return (x - center).squaredNorm() - radius * radius;
          },
          [center](const Point& x) -> Point { return 2.0 * (x - center); }};
}

ConvexFunctionOracle ball_distance(Point center, double radius) {
  return {[center, radius](const Point& x) { return (x - center).norm() - radius; },
          [center](const Point& x) -> Point {
            const Point d = x - center;
            const double n = d.norm();
            if (n == 0.0) return Point::Zero(x.size());
            return d / n;
          }};
}

}  // namespace functions

FixedPointOperator identity_operator(Eigen::Index n) {
  FixedPointOperator t;
  t.name = "identity";
  t.dimension = n;
  t.apply = [](const Point& x) { return x; };
  t.fix_membership = [](const Point&) { return true; };
  t.fix_projection = [](const Point& x) { return x; };
  t.fix_sampler = [n](std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out;
    for (std::size_t i = 0; i < count; ++i) {
      Point p(n);
      for (Eigen::Index j = 0; j < n; ++j) p[j] = rng.normal();
      out.push_back(std::move(p));
    }
    return out;
  };
  return t;
}

FixedPointOperator projection_box(Point lo, Point hi) {
  require_same_dimension(lo.size(), hi.size(), "projection_box");
  if (lo.size() < 1) throw InputError("projection_box: empty dimension");
  if (!all_finite(lo) || !all_finite(hi)) throw InputError("projection_box: non-finite bounds");
  if ((hi - lo).minCoeff() < 0.0) throw InputError("projection_box: need lo <= hi");

  FixedPointOperator t;
  t.name = "box";
  t.dimension = lo.size();
  auto clamp = [lo, hi](const Point& x) -> Point {
    require_same_dimension(x.size(), lo.size(), "projection_box");
    return x.cwiseMax(lo).cwiseMin(hi);
  };
  t.apply = clamp;
  t.fix_projection = clamp;
  t.fix_membership = [lo, hi](const Point& x) {
    return (x - lo).minCoeff() >= 0.0 && (hi - x).minCoeff() >= 0.0;
  };
  t.fix_sampler = [lo, hi](std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(rng.uniform_box(lo, hi));
    return out;
  };
  return t;
}

FixedPointOperator projection_ball(Point center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError("projection_ball: radius must be > 0");
  if (center.size() < 1 || !all_finite(center)) throw InputError("projection_ball: bad center");

  FixedPointOperator t;
  t.name = "ball";
  t.dimension = center.size();
  auto project = [center, radius](const Point& x) -> Point {
    require_same_dimension(x.size(), center.size(), "projection_ball");
    const Point d = x - center;
    const double n = d.norm();
    if (n <= radius) return x;
    return center + (radius / n) * d;
  };
  t.apply = project;
  t.fix_projection = project;
  t.fix_membership = [center, radius](const Point& x) { return (x - center).norm() <= radius; };
  t.fix_sampler = [center, radius](std::size_t count, std::uint64_t seed) {
    return sample_ball(center, radius, count, seed);
  };
  return t;
}

FixedPointOperator projection_halfspace_op(HalfSpace<double> h) {
  if (h.anchor.size() < 1) throw InputError("projection_halfspace_op: empty dimension");
  if (!h.degenerate && !(h.normal.norm() > 0.0)) {
    throw InputError("projection_halfspace_op: non-degenerate half-space needs a nonzero normal");
  }
  FixedPointOperator t;
  t.name = "halfspace";
  t.dimension = h.dimension();
  auto project = [h](const Point& x) -> Point { return project_halfspace(x, h); };
  t.apply = project;
  t.fix_projection = project;
  t.fix_membership = [h](const Point& x) { return h.contains(x); };
  t.fix_sampler = [h](std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::Index n = h.dimension();
    const double scale = std::max(1.0, h.anchor.norm());
    std::vector<Point> out;
    for (std::size_t i = 0; i < count; ++i) {
      Point p(n);
      for (Eigen::Index j = 0; j < n; ++j) p[j] = scale * rng.normal();
      p += h.anchor;
      p = project_halfspace(p, h);
      if (!h.degenerate) p -= rng.uniform() * scale * h.normal.normalized();
      out.push_back(std::move(p));
    }
    return out;
  };
  return t;
}

FixedPointOperator subgradient_projector(
    ConvexFunctionOracle f, const Point& witness,
    std::function<std::vector<Point>(std::size_t, std::uint64_t)> sublevel_sampler) {
  require_finite(witness, "subgradient_projector");
  if (!(f.value(witness) <= 0.0)) {
    throw InputError("subgradient_projector: witness is not in the sublevel set f <= 0");
  }
  FixedPointOperator t;
  t.name = "subgradient_projector";
  t.dimension = witness.size();
  t.apply = [f](const Point& y) -> Point {
    const double fy = f.value(y);
    if (fy <= 0.0) return y;
    const Point g = f.subgradient(y);
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0)) {
      throw ContractError("subgradient_projector: zero subgradient at a point with f > 0");
    }
    return y - (fy / g2) * g;
  };
  t.fix_membership = [f](const Point& y) { return f.value(y) <= 0.0; };
  t.fix_sampler = std::move(sublevel_sampler);
  return t;
}

void CDeltaSpec::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("CDeltaSpec: delta must lie in (0, 1]");
  if (!c.value || !c.subgradient) throw InputError("CDeltaSpec: c oracle is incomplete");
  if (!(c.value(witness) <= 0.0)) throw InputError("CDeltaSpec: witness is not in C");
}

Point subgradient_selection(const CDeltaSpec& spec, const Point& z) {
  const double cz = spec.c.value(z);
  const Point g = spec.c.subgradient(z);
  const double g2 = g.squaredNorm();
  if (!(g2 > 0.0)) throw ContractError("subgradient_selection: zero subgradient outside C");
  return z - (cz / g2) * g;
}

Point c_delta_apply(const CDeltaSpec& spec, const Point& z, const CDeltaSelection& select) {
  require_finite(z, "c_delta_apply");
  const double cz = spec.c.value(z);
  if (cz <= 0.0) return z;
  const Point y = select(spec, z);
  require_same_dimension(y.size(), z.size(), "c_delta_apply");
  const double clearance = spec.delta * cz;
  if ((z - y).norm() < clearance * (1.0 - 1e-12)) {
    throw SelectionError("c_delta_apply: selected y fails the ball-clearance test");
  }
  return project_halfspace(z, halfspace_from_cut(z, y));
}

bool validate_a_delta(const CDeltaSpec& spec, const Point& z, const Point& y,
                      const std::vector<Point>& c_samples) {
  require_same_dimension(z.size(), y.size(), "validate_a_delta");
  const double cz = spec.c.value(z);
  if (!(cz > 0.0)) return false;  // A_delta(z) is only defined for z outside C
  const HalfSpace<double> h = halfspace_from_cut(z, y);
  if (h.degenerate) return false;
  for (const Point& s : c_samples) {
    const double slack = 1e-12 * std::max(1.0, s.norm() * h.normal.norm());
    if (!h.contains(s, slack)) return false;
  }
  return distance_to_halfspace(z, h) >= spec.delta * cz * (1.0 - 1e-12);
}

FixedPointOperator c_delta_operator(
    CDeltaSpec spec, CDeltaSelection select,
    std::function<std::vector<Point>(std::size_t, std::uint64_t)> sublevel_sampler) {
  spec.validate();
  FixedPointOperator t;
  t.name = "c_delta";
  t.dimension = spec.witness.size();
  t.fix_membership = [c = spec.c](const Point& x) { return c.value(x) <= 0.0; };
  t.apply = [spec = std::move(spec), select = std::move(select)](const Point& z) {
    return c_delta_apply(spec, z, select);
  };
  t.fix_sampler = std::move(sublevel_sampler);
  return t;
}

FixedPointOperator relax_operator(const FixedPointOperator& t, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 2.0)) throw InputError("relax_operator: alpha must lie in [0, 2]");
  if (alpha == 0.0) {
    FixedPointOperator id = identity_operator(t.dimension);
    id.name = "relaxed(" + t.name + ", 0)";
    return id;
  }
  FixedPointOperator r = t;
  r.name = "relaxed(" + t.name + ", " + format_alpha(alpha) + ")";
  r.apply = [inner = t.apply, alpha](const Point& x) -> Point {
    return x + alpha * (inner(x) - x);
  };
  return r;
}

Point resolvent_apply(const ConvexFunctionOracle& g, const FixedPointOperator& projector,
                      double lambda, const Point& y, const ResolventOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("resolvent_apply: lambda must be > 0");
  if (!(options.inner_tol > 0.0)) throw InputError("resolvent_apply: inner_tol must be > 0");
  require_finite(y, "resolvent_apply");

  const double inv_lambda = 1.0 / lambda;
  auto objective = [&](const Point& u) { return g.value(u) + 0.5 * inv_lambda * (u - y).squaredNorm(); };
  auto gradient = [&](const Point& u) -> Point { return g.subgradient(u) + inv_lambda * (u - y); };

  Point u = projector(y);
  double residual = std::numeric_limits<double>::infinity();

  if (options.smoothness) {
    if (!(*options.smoothness >= 0.0)) throw InputError("resolvent_apply: smoothness must be >= 0");
    const double step = 1.0 / (*options.smoothness + inv_lambda);
    for (std::size_t j = 0; j < options.max_inner; ++j) {
      Point next = projector(u - step * gradient(u));
      residual = (next - u).norm();
      u = std::move(next);
      if (residual <= options.inner_tol) return u;
    }
  } else {
    double step = lambda;
    for (std::size_t j = 0; j < options.max_inner; ++j) {
      const Point grad = gradient(u);
      const double phi = objective(u);
      Point next = projector(u - step * grad);
      for (int halvings = 0; halvings < 60; ++halvings) {
        const Point d = next - u;
        const double model = phi + grad.dot(d) + 0.5 / step * d.squaredNorm();
        if (objective(next) <= model + 1e-15 * std::max(1.0, std::abs(phi))) break;
        step *= 0.5;
        next = projector(u - step * grad);
      }
      residual = (next - u).norm();
      u = std::move(next);
      if (residual <= options.inner_tol) return u;
    }
  }
  if (!all_finite(u)) throw NumericError("resolvent_apply: non-finite inner iterate");
  throw ConvergenceError("resolvent_apply: inner iteration cap reached", residual);
}

FixedPointOperator resolvent_operator(ConvexFunctionOracle g, FixedPointOperator projector,
                                      double lambda, ResolventOptions options) {
  if (!(lambda > 0.0)) throw InputError("resolvent_operator: lambda must be > 0");
  FixedPointOperator t;
  t.name = "resolvent";
  t.dimension = projector.dimension;
  t.apply = [g = std::move(g), projector = std::move(projector), lambda, options](const Point& y) {
    return resolvent_apply(g, projector, lambda, y, options);
  };
  return t;
}

VectorField matrix_field(const Eigen::MatrixXd& G, Point a) {
  if (G.rows() != G.cols()) throw InputError("matrix_field: G must be square");
  require_same_dimension(G.rows(), a.size(), "matrix_field");
  if (!G.allFinite() || !all_finite(a)) throw InputError("matrix_field: non-finite input");
  if ((G - G.transpose()).norm() > 1e-12 * std::max(1.0, G.norm())) {
    throw InputError("matrix_field: G must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw InputError("matrix_field: G must be positive definite");
  return [G, a = std::move(a)](const Point& x) -> Point {
    require_same_dimension(x.size(), a.size(), "matrix_field");
    return G * (x - a);
  };
}

}  // namespace cutvip
