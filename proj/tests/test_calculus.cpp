#include <cmath>
#include <random>

#include "doctest.h"
#include "metrikos/calculus.hpp"
#include "metrikos/error.hpp"

using namespace metrikos;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Curve abs_curve() {
  return Curve{[](double t) { return SpacePoint{t, std::abs(t)}; }};
}

// Cartesian point of the right-corner H^3 system with the given coords.
SpacePoint h3_point(double xa, double xb, double xc) {
  const double x = (xc * xc - xa * xa + 1) / 2, y = (xc * xc - xb * xb + 1) / 2;
  return {x, y, std::sqrt(xc * xc - x * x - y * y)};
}

CoordinateSystem h3() {
  return CoordinateSystem(Space::euclidean(3, {SubsetKind::half_space}),
                          {{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}, {0, 0, 1});
}

}  // namespace

TEST_SUITE("calculus") {

TEST_CASE("forward derivative of a constant curve vanishes") {
  CoordinateSystem sys(Space::euclidean(2), {{0, 0}, {1, 0}, {0, 1}}, {0, 0});
  Curve still{[](double) { return SpacePoint{0.4, 0.3}; }};
  auto d = forward_derivative(still, sys, 0.0);
  CHECK(d.all_converged());
  for (double v : d.tangent.velocity) CHECK(v == 0.0);
  CHECK(d.tangent.speed_bound == 0.0);
}

TEST_CASE("forward derivative along the ellipsoid-sphere solution") {
  const auto sys = h3();
  const auto x0 = coords_of(sys, {0.3, 0.2, 0.8});
  Curve sol{[&](double t) { return h3_point(x0[0] + t, x0[1] - t, x0[2]); }};
  auto d = forward_derivative(sol, sys, 0.0);
  CHECK(d.all_converged());
  CHECK(d.tangent.velocity[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d.tangent.velocity[1] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(std::abs(d.tangent.velocity[2]) < 1e-6);
}

TEST_CASE("one-sided derivative of the corner curve") {
  CoordinateSystem b(Space::euclidean(2), {{1, 1}}, {0, 0});
  auto d = forward_derivative(abs_curve(), b, 0.0);
  CHECK(d.tangent.velocity[0] == doctest::Approx(-kSqrt2).epsilon(1e-6));
}

TEST_CASE("observer dependence of differentiability") {
  CoordinateSystem a(Space::euclidean(2), {{-2, 0}}, {0, 0});
  auto da = central_derivative(abs_curve(), a, 0.0);
  CHECK(da.flags[0] == Differentiability::differentiable);

  CoordinateSystem b(Space::euclidean(2), {{1, 1}}, {0, 0});
  auto db = central_derivative(abs_curve(), b, 0.0);
  CHECK(db.flags[0] == Differentiability::non_differentiable);
  CHECK(std::abs(db.left[0]) < 1e-3);
  CHECK(std::abs(db.right[0] + kSqrt2) < 1e-3);
}

TEST_CASE("smooth circle is differentiable in every coordinate") {
  CoordinateSystem sys(Space::euclidean(2), {{3, 0.5}, {-2, 1}, {0.2, -4}}, {0, 0});
  Curve circle{[](double t) { return SpacePoint{std::cos(t), std::sin(t)}; }};
  for (double t : {0.0, 0.7, 2.0, 4.5}) {
    auto d = central_derivative(circle, sys, t);
    for (auto f : d.flags) CHECK(f == Differentiability::differentiable);
  }
}

TEST_CASE("infinite-speed curves report non-convergence") {
  CoordinateSystem b(Space::euclidean(2), {{1, 1}}, {0, 0});
  Curve root{[](double t) { return SpacePoint{-std::sqrt(t), std::sqrt(t)}; }, 0.0};
  auto d = forward_derivative(root, b, 0.0);
  CHECK(d.tangent.velocity[0] == doctest::Approx(1 / kSqrt2).epsilon(1e-4));

  CoordinateSystem a(Space::euclidean(2), {{-2, 0}}, {0, 0});
  auto da = forward_derivative(root, a, 0.0);
  CHECK_FALSE(da.all_converged());
}

TEST_CASE("curves reject parameters outside their domain") {
  Curve half{[](double t) { return SpacePoint{t, 0}; }, 0.0, 1.0};
  CHECK_THROWS_AS(half(-0.5), Error);
  CoordinateSystem a(Space::euclidean(2), {{-2, 0}}, {0, 0});
  CHECK_THROWS_AS(central_derivative(half, a, 0.0), Error);
}

TEST_CASE("tangency") {
  CoordinateSystem sys(Space::euclidean(2), {{3, 0.5}, {-2, 1}, {0.2, -4}}, {0, 0});
  Curve line{[](double t) { return SpacePoint{t, 0}; }};
  Curve parabola{[](double t) { return SpacePoint{t, t * t}; }};
  Curve fast{[](double t) { return SpacePoint{2 * t, 0}; }};
  CHECK(tangency_test(line, line, sys, 0.0, 1e-6) == Tangency::tangent);
  CHECK(tangency_test(line, parabola, sys, 0.0, 1e-5) == Tangency::tangent);
  CHECK(tangency_test(line, fast, sys, 0.0, 1e-6) == Tangency::not_tangent);

  CoordinateSystem a(Space::euclidean(2), {{-2, 0}}, {0, 0});
  Curve root{[](double t) { return SpacePoint{-std::sqrt(t), std::sqrt(t)}; }, 0.0};
  Curve origin{[](double) { return SpacePoint{0, 0}; }};
  CHECK(tangency_test(root, origin, a, 0.0, 1e-6) == Tangency::indeterminate);
}

TEST_CASE("tangent metric") {
  auto u = make_tangent({1, 2, 3}, {1, -1, 0});
  auto v = make_tangent({1, 2, 3}, {1, 1, 1});
  CHECK(tangent_metric(u, u) == 0.0);
  CHECK(tangent_metric(u, v) == 2.0);
  auto w = make_tangent({4, 2, 3}, {1, -1, 0});
  CHECK(tangent_metric(u, w) == 3.0);
  CHECK(u.speed_bound == 1.0);
  CHECK_THROWS_AS(tangent_metric(u, make_tangent({1}, {1})), Error);
}

TEST_CASE("closed-form shift derivative") {
  const auto space = Space::grid_function(-2.0, 4.0, 6000);
  const SpacePoint zero(std::vector<double>(space.dim, 0.0));
  CHECK(char_shift_derivative(space, zero, 0.3) == 0.0);

  auto c = hat(space, 0.0, 1.0);
  const double phi0 = distance(space, indicator(space, 0.0, 1.0), c);
  CHECK(char_shift_derivative(space, c, 0.0) ==
        doctest::Approx(evaluate_at(space, c, 0.0) / phi0));

  auto sym = hat(space, 0.5, 1.0);
  CHECK(std::abs(char_shift_derivative(space, sym, 0.0)) < 1e-12);

  auto box = indicator(space, 0.0, 1.0);
  try {
    char_shift_derivative(space, box, 0.0);
    FAIL("expected division by zero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::division_by_zero);
  }
}

TEST_CASE("forward derivative of the shifted indicator matches the closed form") {
  const double dx = 2.5e-4;
  const auto space = Space::grid_function(-3.0, 5.0, 32000);
  std::vector<SpacePoint> basis{hat(space, 0.0, 1.0), hat(space, 0.8, 0.5),
                                sample_function(space, [](double t) {
                                  return std::abs(t) < 1.5 ? 1.5 - t * t / 1.5 : 0.0;
                                })};
  CoordinateSystem sys(space, basis, basis[0]);
  Curve shift{[&](double t) { return indicator(space, t, t + 1.0); }};
  DerivativeOptions opts;
  for (int k = 5; k >= 0; --k) opts.h_seq.push_back(dx * (1 << k));
  for (int k = 0; k < 20; ++k) {
    const double t = -1.7 + 0.125 * k;
    auto d = forward_derivative(shift, sys, t, opts);
    for (std::size_t c = 0; c < basis.size(); ++c) {
      const double oracle = char_shift_derivative(space, basis[c], t);
      CHECK(std::abs(d.tangent.velocity[c] - oracle) < 1e-3);
    }
  }
}

TEST_CASE("property: chain rule for smooth polynomial curves") {
  CoordinateSystem sys(Space::euclidean(2), {{3, 0}, {-3, 1}, {0, -3}}, {0, 0});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 50; ++k) {
    double p[3], q[3];
    for (int i = 0; i < 3; ++i) {
      p[i] = u(rng);
      q[i] = u(rng);
    }
    Curve poly{[=](double t) {
      return SpacePoint{p[0] + p[1] * t + p[2] * t * t, q[0] + q[1] * t + q[2] * t * t};
    }};
    const double t = u(rng);
    auto d = central_derivative(poly, sys, t);
    const SpacePoint x = poly(t);
    const double vx = p[1] + 2 * p[2] * t, vy = q[1] + 2 * q[2] * t;
    for (std::size_t c = 0; c < sys.size(); ++c) {
      CHECK(d.flags[c] == Differentiability::differentiable);
      const double dx = x[0] - sys.point(c)[0], dy = x[1] - sys.point(c)[1];
      const double chain = (dx * vx + dy * vy) / std::hypot(dx, dy);
      CHECK(std::abs(d.tangent.velocity[c] - chain) < 1e-6);
    }
  }
}

TEST_CASE("property: reparametrization scales the derivative") {
  CoordinateSystem sys(Space::euclidean(2), {{3, 0}, {-3, 1}, {0, -3}}, {0, 0});
  auto base = [](double t) { return SpacePoint{std::cos(t) + 0.1 * t, std::sin(2 * t)}; };
  for (double s : {0.5, 2.0}) {
    Curve scaled{[=](double t) { return base(s * t); }};
    const double t0 = 0.4;
    auto ds = forward_derivative(scaled, sys, t0 / s);
    auto d1 = forward_derivative(Curve{base}, sys, t0);
    for (std::size_t c = 0; c < sys.size(); ++c)
      CHECK(std::abs(ds.tangent.velocity[c] - s * d1.tangent.velocity[c]) < 1e-6);
  }
}

}  // TEST_SUITE
