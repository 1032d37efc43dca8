#include <cmath>
#include <random>

#include <doctest.h>

#include "lpvplan/geometry.hpp"
#include "oracles.hpp"

using namespace lpvplan;

TEST_CASE("wrapAngle maps into (-pi, pi]") {
  CHECK(wrapAngle(kPi) == doctest::Approx(kPi));
  CHECK(wrapAngle(-kPi) == doctest::Approx(kPi));
  CHECK(wrapAngle(0.0) == 0.0);
  CHECK(wrapAngle(3 * kPi / 2) == doctest::Approx(-kPi / 2));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double w = wrapAngle(a);
    REQUIRE(w > -kPi);
    REQUIRE(w <= kPi);
    // same direction
    CHECK(std::cos(w) == doctest::Approx(std::cos(a)).epsilon(1e-9));
    CHECK(std::sin(w) == doctest::Approx(std::sin(a)).epsilon(1e-9));
  }
}

TEST_CASE("Pose2 normalizes its heading") {
  const Pose2 p(1.0, 2.0, 2 * kPi + 0.5);
  CHECK(p.heading == doctest::Approx(0.5));
  CHECK(Pose2(0, 0, -kPi).heading == doctest::Approx(kPi));
}

TEST_CASE("signed area and orientation") {
  const Polygon ccw{{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  CHECK(signedArea(ccw) == doctest::Approx(2.0));
  Polygon cw(ccw.rbegin(), ccw.rend());
  CHECK(signedArea(cw) == doctest::Approx(-2.0));
  CHECK(signedArea(makeCounterClockwise(cw)) == doctest::Approx(2.0));
}

TEST_CASE("point location agrees with an even-odd oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto poly = oracle::randomConvex(rng, {0, 0}, 0.5, 2.5);
    for (int i = 0; i < 100; ++i) {
      const Vec2 p(u(rng), u(rng));
      const auto loc = locatePoint(p, poly, 1e-9);
      if (loc == PointLocation::Boundary) continue;
      CHECK((loc == PointLocation::Inside) == oracle::insideEvenOdd(p, poly));
    }
  }
  const Polygon sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(locatePoint({0.5, 0.0}, sq) == PointLocation::Boundary);
  CHECK(locatePoint({1.0, 1.0}, sq) == PointLocation::Boundary);
  CHECK(locatePoint({0.5, 0.5}, sq) == PointLocation::Inside);
  CHECK(locatePoint({1.5, 0.5}, sq) == PointLocation::Outside);
}

TEST_CASE("segment predicates") {
  CHECK(segmentsCrossProperly({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK_FALSE(segmentsCrossProperly({0, 0}, {1, 1}, {1, 1}, {2, 0}));  // shared endpoint only
  CHECK(segmentsTouch({0, 0}, {1, 1}, {1, 1}, {2, 0}));
  CHECK_FALSE(segmentsTouch({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  CHECK(pointSegmentDistance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(pointSegmentDistance({3, 4}, {0, 0}, {0, 0}) == doctest::Approx(5.0));

  auto t = raySegmentHit({0, 0}, {1, 0}, {2, -1}, {2, 1});
  REQUIRE(t);
  CHECK(*t == doctest::Approx(2.0));
  CHECK_FALSE(raySegmentHit({0, 0}, {-1, 0}, {2, -1}, {2, 1}));
}

TEST_CASE("simplicity") {
  CHECK(isSimple(Polygon{{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  CHECK_FALSE(isSimple(Polygon{{0, 0}, {1, 1}, {1, 0}, {0, 1}}));  // bow tie
  CHECK_FALSE(isSimple(Polygon{{0, 0}, {1, 0}}));
}

TEST_CASE("inflation contains the Minkowski sum with the disk") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto hull = oracle::randomConvex(rng, {0, 0}, 0.5, 2.0);
    const double r = 0.1 + 0.5 * frac(rng);
    const Polygon poly(hull.begin(), hull.end());
    const Polygon grown = inflatePolygon(poly, r);
    REQUIRE(isSimple(grown));
    CHECK(signedArea(grown) > signedArea(poly));
    for (int i = 0; i < 200; ++i) {
      // point at distance <= r from a random boundary point
      const std::size_t k = static_cast<std::size_t>(frac(rng) * poly.size()) % poly.size();
      const Vec2 b = poly[k] + frac(rng) * (poly[(k + 1) % poly.size()] - poly[k]);
      const double a = ang(rng);
      const Vec2 p = b + r * frac(rng) * Vec2(std::cos(a), std::sin(a));
      CHECK(locatePoint(p, grown, 1e-9) != PointLocation::Outside);
    }
  }
}

TEST_CASE("polygon overlap matches separating axis oracle") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int overlaps = 0;
  for (int i = 0; i < 500; ++i) {
    const auto a = oracle::randomConvex(rng, {0, 0}, 0.3, 1.0);
    const auto b = oracle::randomConvex(rng, {u(rng), u(rng)}, 0.3, 1.0);
    const bool expected = oracle::satOverlap(a, b);
    overlaps += expected;
    CHECK(polygonsOverlap(Polygon(a.begin(), a.end()), Polygon(b.begin(), b.end())) == expected);
  }
  CHECK(overlaps > 50);
  CHECK(overlaps < 450);
}
