#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "geocompass/geometry.hpp"
#include "geocompass/rng.hpp"
#include "geocompass/special.hpp"

using namespace geocompass;

namespace {
double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}
}  // namespace

TEST_CASE("chart examples match hand-computed values") {
  // eta = 1 pointing along the boundary direction
  const HyperbolicPoint a = polar_to_cartesian({1.0, 0.0});
  REQUIRE(a.x == Catch::Approx(std::tanh(1.0)).epsilon(1e-15));
  REQUIRE(a.y == Catch::Approx(1.0 / std::cosh(1.0)).epsilon(1e-15));

  // the chart origin
  const HyperbolicPoint o = polar_to_cartesian({0.0, 0.3});
  REQUIRE(o.x == 0.0);
  REQUIRE(o.y == 1.0);

  // distance from the origin O = (0, 1)
  REQUIRE(cosh_distance_origin({3.0, 4.0}) == Catch::Approx(3.25).epsilon(1e-15));

  // vertical-axis points decompose through the axis tag
  const PolarPoint up = cartesian_to_polar({0.0, std::exp(1.0)});
  REQUIRE(up.on_axis);
  REQUIRE(up.axis_dir == 1);
  REQUIRE(up.eta == Catch::Approx(1.0).epsilon(1e-15));
  const PolarPoint down = cartesian_to_polar({0.0, std::exp(-2.0)});
  REQUIRE(down.on_axis);
  REQUIRE(down.axis_dir == -1);
  REQUIRE(down.eta == Catch::Approx(2.0).epsilon(1e-15));
  REQUIRE(to_cartesian(up).x == 0.0);
  REQUIRE(to_cartesian(up).y == Catch::Approx(std::exp(1.0)).epsilon(1e-15));

  // spherical right-triangle hypotenuse
  REQUIRE(spherical_pythagoras(kPi / 3, kPi / 3) == Catch::Approx(0.25).epsilon(1e-14));

  // right angle turns the law of cosines into a plain product
  REQUIRE(carnot_cosh(1.0, 2.0, kPi / 2) ==
          Catch::Approx(std::cosh(1.0) * std::cosh(2.0)).epsilon(1e-14));
}

TEST_CASE("polar round trip holds to 1e-10 over the chart and both branches") {
  SplitMix64 rng({977101, 0});
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double eta = 10.0 * rng.next_uniform();
    const double alpha = (rng.next_uniform() - 0.5) * 0.9999 * kPi;
    const int side = rng.next_uniform() < 0.5 ? -1 : 1;
    const HyperbolicPoint q = to_cartesian({eta, alpha, side, false, 0});
    const PolarPoint back = cartesian_to_polar(q);
    REQUIRE_FALSE(back.on_axis);
    REQUIRE(back.side == side);
    const double err = std::max(std::abs(back.eta - eta), std::abs(back.alpha - alpha));
    if (!(err < 1e-10)) {
      CAPTURE(eta, alpha, side, q.x, q.y, back.eta, back.alpha);
      REQUIRE(err < 1e-10);
    }
    worst = std::max(worst, err);
  }
  INFO("worst error " << worst);
  REQUIRE(worst < 1e-10);
}

TEST_CASE("round trip is stable at the angular poles and at tiny radii") {
  for (double offset : {1e-7, 1e-9, 1e-12})
    for (double sign : {-1.0, 1.0})
      for (double eta : {1e-8, 1e-4, 1.0, 5.0, 10.0}) {
        const double alpha = sign * (kPi / 2 - offset);
        const HyperbolicPoint q = to_cartesian({eta, alpha, 1, false, 0});
        const PolarPoint back = cartesian_to_polar(q);
        CAPTURE(eta, alpha, q.x, q.y);
        REQUIRE(std::abs(back.eta - eta) < 1e-10);
        REQUIRE(std::abs(back.alpha - alpha) < 1e-10);
      }
}

TEST_CASE("axis points round trip through the tagged decomposition") {
  SplitMix64 rng({977102, 0});
  for (int i = 0; i < 200; ++i) {
    const double eta = 8.0 * rng.next_uniform();
    const int dir = rng.next_uniform() < 0.5 ? -1 : 1;
    const HyperbolicPoint q{0.0, std::exp(dir * eta)};
    const PolarPoint back = cartesian_to_polar(q);
    REQUIRE(std::abs(back.eta - eta) < 1e-12);
    if (eta > 0.0) {
      REQUIRE(back.on_axis);
      REQUIRE(back.axis_dir == dir);
    }
    const HyperbolicPoint q2 = to_cartesian(back);
    REQUIRE(q2.x == 0.0);
    REQUIRE(rel_err(q2.y, q.y) < 1e-12);
  }
}

TEST_CASE("pair distance equals the polar law of cosines to 1e-10") {
  SplitMix64 rng({977103, 0});
  for (int i = 0; i < 10000; ++i) {
    const double e1 = 6.0 * rng.next_uniform(), e2 = 6.0 * rng.next_uniform();
    const double a1 = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const double a2 = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const HyperbolicPoint q1 = polar_to_cartesian({e1, a1});
    const HyperbolicPoint q2 = polar_to_cartesian({e2, a2});
    const double via_points = cosh_distance_pair(q1, q2);
    const double via_angles = carnot_cosh(e1, e2, a1 - a2);
    if (!(rel_err(via_points, via_angles) < 1e-10)) {
      CAPTURE(e1, a1, e2, a2, via_points, via_angles);
      REQUIRE(rel_err(via_points, via_angles) < 1e-10);
    }
  }
  SUCCEED("10000 pair/law-of-cosines comparisons within 1e-10");
}

TEST_CASE("right angles reduce the law of cosines to a product at ulp scale") {
  SplitMix64 rng({977104, 0});
  for (int i = 0; i < 1000; ++i) {
    const double a = 5.0 * rng.next_uniform(), b = 5.0 * rng.next_uniform();
    REQUIRE(rel_err(carnot_cosh(a, b, kPi / 2), std::cosh(a) * std::cosh(b)) < 1e-14);
  }
  // the angle argument is reduced mod 2 pi first
  REQUIRE(rel_err(carnot_cosh(1.0, 2.0, kPi / 2 + 4.0 * kPi),
                  std::cosh(1.0) * std::cosh(2.0)) < 1e-13);
  // aligned legs subtract exactly
  REQUIRE(carnot_cosh(3.0, 1.25, 0.0) == Catch::Approx(std::cosh(1.75)).epsilon(1e-15));
}

TEST_CASE("points stay on their geodesic half-circle") {
  SplitMix64 rng({977105, 0});
  for (int i = 0; i < 1000; ++i) {
    const double alpha = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const double eta = 5.0 * rng.next_uniform();
    const GeodesicCircle g = geodesic_circle_for(alpha);
    const HyperbolicPoint q = polar_to_cartesian({eta, alpha});
    const double lhs = (q.x - g.center_x) * (q.x - g.center_x) + q.y * q.y;
    REQUIRE(rel_err(lhs, g.radius * g.radius) < 1e-10);
  }
}

TEST_CASE("equidistant loci are Euclidean circles centered above the origin") {
  SplitMix64 rng({977106, 0});
  for (int i = 0; i < 1000; ++i) {
    const double eta = 5.0 * rng.next_uniform();
    const double phi = 2.0 * kPi * rng.next_uniform();
    const HyperbolicPoint q{std::sinh(eta) * std::cos(phi),
                            std::cosh(eta) + std::sinh(eta) * std::sin(phi)};
    REQUIRE(rel_err(cosh_distance_origin(q), std::cosh(eta)) < 1e-10);
  }
}
