#include <cmath>
#include <numbers>

#include "doctest.h"
#include "metrikos/loci.hpp"

using namespace metrikos;

namespace {

CoordinateSystem axis3() {
  return CoordinateSystem(Space::euclidean(3), {{0, 0, 0}, {2, 0, 0}, {0, 0, 1}}, {0, 0, 0});
}

CoordinateSystem plane2() {
  return CoordinateSystem(Space::euclidean(2), {{0, 0}, {1, 0}, {0, 1}}, {0, 0});
}

}  // namespace

TEST_SUITE("loci") {

TEST_CASE("names round-trip") {
  for (auto k : {LocusKind::sphere, LocusKind::ellipsoid, LocusKind::hyperboloid,
                 LocusKind::cylinder, LocusKind::cone, LocusKind::plane, LocusKind::segment,
                 LocusKind::ray, LocusKind::line})
    CHECK(locus_kind_from_string(to_string(k)) == k);
  CHECK_FALSE(locus_kind_from_string("torus"));
}

TEST_CASE("table residuals") {
  const auto sys = axis3();
  auto at = [&](SpacePoint p) { return coords_of(sys, p); };
  CHECK(std::abs(locus_residual({LocusKind::cylinder, 0, 1, 1.0}, at({1, 1, 0}), sys)) < 1e-12);
  CHECK(std::abs(locus_residual({LocusKind::cone, 0, 1, std::numbers::pi / 2}, at({0, 1, 0}), sys)) <
        1e-12);
  CHECK(locus_residual({LocusKind::segment, 0, 1}, at({1, 0, 0}), sys) == 0.0);
  CHECK(locus_residual({LocusKind::plane, 0, 1}, at({1, 5, -2}), sys) == doctest::Approx(0.0));
  CHECK(locus_residual({LocusKind::hyperboloid, 0, 1, 1.0}, at({1.5, 0, 0}), sys) ==
        doctest::Approx(0.0));

  auto ray = locus_evaluate({LocusKind::ray, 0, 1}, at({3, 0, 0}), sys);
  CHECK(ray.residual == doctest::Approx(0.0));
  CHECK(ray.branch == 1);
  auto inner = locus_evaluate({LocusKind::line, 0, 1}, at({0.5, 0, 0}), sys);
  CHECK(inner.branch == 0);
  auto behind = locus_evaluate({LocusKind::line, 0, 1}, at({-1, 0, 0}), sys);
  CHECK(behind.residual == doctest::Approx(0.0));
  CHECK(behind.branch == 1);
  CHECK_FALSE(locus_membership({LocusKind::line, 0, 1}, at({1, 1, 0}), sys, 1e-9));

  CHECK_THROWS_AS(locus_residual({LocusKind::cylinder, 0, 1, 1.0}, MetricCoords{0.1, 0.1, 1}, sys),
                  Error);
}

TEST_CASE("membership") {
  CoordinateSystem foci(Space::euclidean(2), {{0, 0}, {1, 0}}, {0, 0});
  const Locus ell{LocusKind::ellipsoid, 0, 1, 2.0};
  CHECK(locus_membership(ell, coords_of(foci, {0.5, std::sqrt(3.0) / 2}), foci, 1e-9));
  CHECK_FALSE(locus_membership(ell, coords_of(foci, {0.5, 1}), foci, 1e-9));
  CHECK(locus_membership({LocusKind::sphere, 0, 0, 0.0}, coords_of(foci, {0, 0}), foci, 1e-12));
}

TEST_CASE("validation") {
  const auto sys = axis3();
  auto code = [&](Locus L) {
    try {
      validate_locus(L, sys);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  };
  CHECK(code({LocusKind::sphere, 0, 0, -1}) == ErrorCode::empty_locus);
  CHECK(code({LocusKind::ellipsoid, 0, 1, 1.5}) == ErrorCode::empty_locus);
  CHECK(code({LocusKind::hyperboloid, 0, 1, 2.0}) == ErrorCode::empty_locus);
  CHECK(code({LocusKind::hyperboloid, 0, 1, 0.0}) == ErrorCode::empty_locus);
  CHECK(code({LocusKind::cone, 0, 1, std::numbers::pi}) == ErrorCode::invalid_input);
  CHECK(code({LocusKind::plane, 0, 7}) == ErrorCode::invalid_input);
  CHECK(code({LocusKind::plane, 1, 1}) == ErrorCode::invalid_input);
  CHECK(code({LocusKind::ellipsoid, 0, 1, 3.0}) == ErrorCode::internal);
}

TEST_CASE("sampling spheres and ellipses") {
  CoordinateSystem r3(Space::euclidean(3), {{0.5, -1, 2}, {1, 0, 0}, {0, 1, 0}}, {0, 0, 0});
  auto pts = sample_locus({LocusKind::sphere, 0, 0, 1.0}, r3, 50, 1);
  REQUIRE(pts.size() == 50);
  for (const auto& p : pts) CHECK(std::abs(distance(r3.space(), p, r3.point(0)) - 1) < 1e-8);

  CoordinateSystem foci(Space::euclidean(2), {{-0.5, 0}, {0.5, 0}}, {0, 0});
  const double r = 2.0, d = 1.0, alpha = r / 2, beta = std::sqrt(r * r - d * d) / 2;
  for (const auto& p : sample_locus({LocusKind::ellipsoid, 0, 1, r}, foci, 50, 2)) {
    auto c = coords_of(foci, p);
    CHECK(std::abs(c[0] + c[1] - r) < 1e-8);
    CHECK(std::abs(std::pow(p[0] / alpha, 2) + std::pow(p[1] / beta, 2) - 1) < 1e-6);
    CHECK(check_feasible(foci, c).feasible());
  }
  try {
    sample_locus({LocusKind::hyperboloid, 0, 1, 1.5}, foci, 5, 3);
    FAIL("expected empty locus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_locus);
  }
}

TEST_CASE("sampling is deterministic and feasible for every kind") {
  const auto sys = axis3();
  for (Locus L : {Locus{LocusKind::sphere, 2, 2, 0.7}, Locus{LocusKind::ellipsoid, 0, 1, 3.0},
                  Locus{LocusKind::hyperboloid, 0, 1, 1.0}, Locus{LocusKind::cylinder, 0, 1, 0.8},
                  Locus{LocusKind::cone, 0, 1, 0.6}, Locus{LocusKind::plane, 0, 1},
                  Locus{LocusKind::segment, 0, 1}, Locus{LocusKind::ray, 0, 1},
                  Locus{LocusKind::line, 0, 1}}) {
    auto a = sample_locus(L, sys, 20, 11), b = sample_locus(L, sys, 20, 11);
    CHECK(a == b);
    for (const auto& p : a) {
      auto c = coords_of(sys, p);
      CHECK(std::abs(locus_residual(L, c, sys)) <= 1e-8);
      CHECK(check_feasible(sys, c).feasible());
    }
  }
}

TEST_CASE("Heron cylinder measures distance to the axis") {
  const auto sys = axis3();
  for (const auto& p : sample_locus({LocusKind::cylinder, 0, 1, 0.8}, sys, 30, 4)) {
    auto c = coords_of(sys, p);
    const double area = locus_residual({LocusKind::cylinder, 0, 1, 0.0}, c, sys);
    CHECK(std::abs(area - 0.8) < 1e-8);
    CHECK(std::abs(2 * area / 2.0 - std::hypot(p[1], p[2])) < 1e-9);
  }
}

TEST_CASE("cone branch swap") {
  const auto sys = axis3();
  const double theta = 0.6;
  for (const auto& p : sample_locus({LocusKind::cone, 0, 1, theta}, sys, 30, 5)) {
    const SpacePoint mirrored{-p[0], p[1], p[2]};
    CHECK(std::abs(locus_residual({LocusKind::cone, 0, 1, std::numbers::pi - theta},
                                  coords_of(sys, mirrored), sys)) < 1e-8);
  }
}

TEST_CASE("sphere-space loci and implicit sets") {
  CoordinateSystem s2(Space::sphere(), {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0, 0, 1});
  for (const auto& p : sample_locus({LocusKind::hyperboloid, 0, 1, 0.5}, s2, 20, 6)) {
    CHECK(std::abs(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 1) < 1e-12);
    auto c = coords_of(s2, p);
    CHECK(std::abs(std::abs(c[0] - c[1]) - 0.5) < 1e-8);
  }
  const auto sys = plane2();
  auto set = locus_set({LocusKind::ellipsoid, 0, 1, 2.0}, sys);
  CHECK(set_distance(set, coords_of(sys, {0.5, std::sqrt(3.0) / 2}).values) < 1e-12);
  CHECK(set_distance(set, std::vector<double>{1.5, 1.0, 1.0}) == doctest::Approx(0.25));
}

}  // TEST_SUITE
