#include <doctest.h>

#include "cutvip/diagnostics.hpp"
#include "cutvip/operators.hpp"
#include "oracles.hpp"

using namespace cutvip;
using oracle::vec;

namespace {

auto unit_ball_sampler() {
  return [](std::size_t count, std::uint64_t seed) { return sample_ball(vec({0, 0}), 1.0, count, seed); };
}

CDeltaSpec unit_ball_spec(double delta) {
  return CDeltaSpec{functions::ball_distance(vec({0, 0}), 1.0), delta, vec({0, 0})};
}

}  // namespace

TEST_CASE("metric projections") {
  const auto box = projection_box(vec({0, 0}), vec({1, 1}));
  CHECK(box(vec({2, 0.5})).isApprox(vec({1, 0.5})));
  CHECK(box(vec({0.3, 0.7})) == vec({0.3, 0.7}));
  CHECK(box.fix_membership(vec({1, 0})));
  CHECK_FALSE(box.fix_membership(vec({1.1, 0})));
  CHECK(box.distance_to_fix(vec({4, 5})) == doctest::Approx(5.0));

  const auto ball = projection_ball(vec({0, 0}), 1.0);
  CHECK(ball(vec({2, 0})).isApprox(vec({1, 0})));
  CHECK(ball(vec({0.2, -0.3})) == vec({0.2, -0.3}));

  const auto half = projection_halfspace_op(HalfSpace<double>::from_inequality(vec({1, 1}), 1.0));
  CHECK(half(vec({1, 1})).isApprox(vec({0.5, 0.5})));

  CHECK_THROWS_AS(projection_box(vec({1, 0}), vec({0, 1})), InputError);
  CHECK_THROWS_AS(projection_box(vec({0, 0}), vec({1, 1, 1})), InputError);
  CHECK_THROWS_AS(projection_ball(vec({0, 0}), -1.0), InputError);
}

TEST_CASE("fix samplers land in Fix(T)") {
  for (const auto& T : {projection_box(vec({0, -1}), vec({2, 1})), projection_ball(vec({1, 1}), 0.5),
                        projection_halfspace_op(HalfSpace<double>::from_inequality(vec({1, -2}), 0.3))}) {
    for (const Point& w : T.fix_sampler(200, 5)) {
      CHECK(T.fix_membership(w));
      CHECK((T(w) - w).norm() <= 1e-10);
    }
  }
}

TEST_CASE("subgradient projector examples") {
  const auto T = subgradient_projector(functions::squared_ball(vec({0, 0}), 1.0), vec({0, 0}));
  CHECK(T(vec({0, 0})) == vec({0, 0}));
  // f = 3, g = (4, 0): y - 3/16 (4, 0)
  CHECK(T(vec({2, 0})).isApprox(vec({1.25, 0})));
  CHECK_THROWS_AS(subgradient_projector(functions::squared_ball(vec({0, 0}), 1.0), vec({2, 0})),
                  InputError);
}

TEST_CASE("subgradient projector of an affine f is the half-space projection") {
  oracle::Gen gen(21);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(gen.index(10));
    const Point a = gen.direction(n) * gen.uniform(0.5, 3.0);
    const double b = gen.uniform(-2, 2);
    const Point witness = ((b - 1.0) / a.squaredNorm()) * a;
    const auto T = subgradient_projector(functions::affine(a, b), witness);
    const Point y = gen.box(n, -5, 5);
    CHECK((T(y) - oracle::halfspace_projection(a, b, y)).norm() <= 1e-12 * std::max(1.0, y.norm()));
  }
}

TEST_CASE("subgradient projector flags a zero subgradient outside the sublevel set") {
  ConvexFunctionOracle bad{[](const Point&) { return 1.0; }, [](const Point& x) { return Point::Zero(x.size()); }};
  ConvexFunctionOracle ok_at_witness{[](const Point& x) { return x[0] > 0 ? 1.0 : -1.0; },
                                     [](const Point& x) { return Point::Zero(x.size()); }};
  const auto T = subgradient_projector(ok_at_witness, vec({-1, 0}));
  CHECK_THROWS_AS(T(vec({1, 0})), ContractError);
  CHECK_THROWS(subgradient_projector(bad, vec({0, 0})));
}

TEST_CASE("C-delta operator") {
  const auto half = unit_ball_spec(0.5);
  CHECK(c_delta_apply(half, vec({2, 0})).isApprox(vec({1, 0})));
  CHECK(c_delta_apply(half, vec({0.3, 0.4})) == vec({0.3, 0.4}));

  const auto full = unit_ball_spec(1.0);
  CHECK(c_delta_apply(full, vec({2, 0})).isApprox(vec({1, 0})));

  CDeltaSelection too_close = [](const CDeltaSpec&, const Point& z) -> Point { return 0.9 * z; };
  CHECK_THROWS_AS(c_delta_apply(full, vec({2, 0}), too_close), SelectionError);

  CHECK_THROWS_AS(unit_ball_spec(0.0).validate(), InputError);
  CHECK_THROWS_AS(unit_ball_spec(1.5).validate(), InputError);
  CHECK_THROWS_AS((CDeltaSpec{functions::ball_distance(vec({0, 0}), 1.0), 0.5, vec({3, 0})}.validate()),
                  InputError);
}

TEST_CASE("validate_a_delta") {
  const auto spec = unit_ball_spec(1.0);
  const auto samples = sample_ball(vec({0, 0}), 1.0, 500, 3);
  CHECK(validate_a_delta(spec, vec({2, 0}), vec({1, 0}), samples));
  CHECK_FALSE(validate_a_delta(spec, vec({2, 0}), vec({2, 0}), samples));
  CHECK_FALSE(validate_a_delta(spec, vec({2, 0}), vec({0.5, 0}), samples));
  // clearance holds but the cut slices through C
  CHECK_FALSE(validate_a_delta(unit_ball_spec(0.5), vec({2, 0}), vec({0.9, 0}), samples));
}

TEST_CASE("relax_operator") {
  const auto ball = projection_ball(vec({0, 0}), 1.0);
  const Point x = vec({2, 0});
  CHECK(relax_operator(ball, 1.0)(x).isApprox(ball(x)));
  CHECK(relax_operator(ball, 2.0)(x).isApprox(vec({0, 0}), 1e-15));
  CHECK(relax_operator(ball, 0.0)(x) == x);
  CHECK(relax_operator(ball, 0.0)(vec({-7, 3})) == vec({-7, 3}));
  CHECK(relax_operator(ball, 1.5).has_fix_projection());
  CHECK_THROWS_AS(relax_operator(ball, 2.1), InputError);
  CHECK_THROWS_AS(relax_operator(ball, -0.5), InputError);
}

TEST_CASE("resolvent examples") {
  const auto box = projection_box(vec({0, 0}), vec({1, 1}));
  const Point y = vec({2, -0.5});
  CHECK((resolvent_apply(functions::zero(), box, 1.0, y) - box(y)).norm() <= 1e-12);

  const auto whole = identity_operator(2);
  ResolventOptions opts;
  opts.inner_tol = 1e-13;
  const Point u = resolvent_apply(functions::half_squared_norm(), whole, 1.0, vec({2, 4}), opts);
  CHECK((u - vec({1, 2})).norm() <= 1e-10);

  const Point e = vec({0.3, -0.8});
  const auto big_box = projection_box(vec({-1, -1}), vec({1, 1}));
  for (double lambda : {0.5, 1.0, 3.0}) {
    for (const Point& yy : {vec({0.1, 0.1}), vec({2, -2}), vec({-0.9, 0.6})}) {
      const Point expected = oracle::clamp(yy - lambda * e, vec({-1, -1}), vec({1, 1}));
      const Point got = resolvent_apply(functions::affine(e, 0.0), big_box, lambda, yy, opts);
      CHECK((got - expected).norm() <= 1e-9);
    }
  }
}

TEST_CASE("resolvent smoothness path agrees with backtracking") {
  const auto C = projection_box(vec({0, 0}), vec({2, 2}));
  const auto g = functions::squared_affine(vec({1, 1}), 1.0);
  ResolventOptions fixed;
  fixed.inner_tol = 1e-13;
  fixed.smoothness = 4.0;
  ResolventOptions back;
  back.inner_tol = 1e-13;
  oracle::Gen gen(22);
  for (int i = 0; i < 50; ++i) {
    const Point y = gen.box(2, -1, 3);
    CHECK((resolvent_apply(g, C, 1.0, y, fixed) - resolvent_apply(g, C, 1.0, y, back)).norm() <= 1e-9);
  }
}

TEST_CASE("resolvent inner cap raises a convergence error with the residual") {
  ResolventOptions opts;
  opts.inner_tol = 1e-16;
  opts.max_inner = 2;
  opts.smoothness = 200.0;
  const auto C = identity_operator(2);
  try {
    resolvent_apply(functions::squared_affine(vec({10, 0}), 1.0), C, 1.0, vec({5, 5}), opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_residual() > 0.0);
  }
}

TEST_CASE("property: resolvent output is optimal for the prox objective") {
  const auto C = projection_box(vec({-1, 0}), vec({2, 1}));
  const auto g = functions::squared_affine(vec({1, 2}), 1.0);
  const double lambda = 0.7;
  ResolventOptions opts;
  opts.inner_tol = 1e-12;
  auto phi = [&](const Point& u, const Point& y) { return g(u) + (u - y).squaredNorm() / (2 * lambda); };
  oracle::Gen gen(23);
  for (int i = 0; i < 100; ++i) {
    const Point y = gen.box(2, -3, 4);
    const Point u = resolvent_apply(g, C, lambda, y, opts);
    CHECK(C.fix_membership(u));
    for (int j = 0; j < 50; ++j) {
      const Point w = gen.box(2, 0, 1).cwiseProduct(vec({3, 1})) + vec({-1, 0});
      CHECK(phi(w, y) >= phi(u, y) - 1e-9);
    }
  }
}

TEST_CASE("matrix_field") {
  const auto F = matrix_field(Eigen::MatrixXd::Identity(2, 2), vec({0, 0}));
  CHECK(F(vec({3, -1})) == vec({3, -1}));
  Eigen::MatrixXd G(2, 2);
  G << 2, 0, 0, 1;
  CHECK(matrix_field(G, vec({1, 1}))(vec({2, 3})).isApprox(vec({2, 2})));

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  CHECK_THROWS_AS(matrix_field(indefinite, vec({0, 0})), InputError);
  Eigen::MatrixXd asym(2, 2);
  asym << 2, 1, 0, 2;
  CHECK_THROWS_AS(matrix_field(asym, vec({0, 0})), InputError);
  CHECK_THROWS_AS(matrix_field(G, vec({0, 0, 0})), InputError);
}

TEST_CASE("property: built-in cutters pass the sampled cutter and 1-SQNE checks") {
  const auto region = SampleRegion::box(vec({-3, -3}), vec({3, 3}), 2000, 31);
  ResolventOptions opts;
  opts.inner_tol = 1e-12;
  opts.smoothness = 4.0;
  auto resolvent = resolvent_operator(functions::squared_affine(vec({1, 1}), 1.0),
                                      projection_box(vec({0, 0}), vec({2, 2})), 1.0, opts);
  resolvent.fix_sampler = [](std::size_t count, std::uint64_t seed) {
    oracle::Gen gen(seed);
    std::vector<Point> out;
    for (std::size_t i = 0; i < count; ++i) {
      const double t = gen.uniform(0, 1);
      out.push_back(vec({t, 1 - t}));
    }
    return out;
  };
  const std::vector<FixedPointOperator> ops = {
      projection_box(vec({0, 0}), vec({1, 1})),
      projection_ball(vec({0.5, -0.5}), 1.0),
      subgradient_projector(functions::squared_ball(vec({0, 0}), 1.0), vec({0, 0}), unit_ball_sampler()),
      c_delta_operator(unit_ball_spec(0.5), subgradient_selection, unit_ball_sampler()),
      resolvent,
  };
  for (const auto& T : ops) {
    CAPTURE(T.name);
    CHECK(check_cutter(T, region).passed);
    CHECK(check_sqne(T, 1.0, region).passed);
  }
}

TEST_CASE("property: the reflection through a ball is not SQNE") {
  const auto reflection = relax_operator(projection_ball(vec({0, 0}), 1.0), 2.0);
  const auto region = SampleRegion::box(vec({-3, -3}), vec({3, 3}), 2000, 32);
  CHECK(check_sqne(reflection, 0.0, region).passed);  // still quasi-nonexpansive
  for (double alpha : {0.1, 0.5, 1.0}) {
    const auto report = check_sqne(reflection, alpha, region);
    CHECK_FALSE(report.passed);
    CHECK(report.witness.size() == 2);
  }
  CHECK_FALSE(check_cutter(reflection, region).passed);
}
