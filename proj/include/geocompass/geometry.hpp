#pragma once

// Geometry of the upper half-plane {(x, y) : y > 0} with metric
// ds^2 = (dx^2 + dy^2)/y^2, in the geodesic polar chart around O = (0, 1),
// plus the spherical right-triangle counterpart.

#include <cmath>

#include "geocompass/special.hpp"

namespace geocompass {

// Cartesian point of the half-plane; invariant y > 0.
struct HyperbolicPoint {
  double x = 0.0;
  double y = 1.0;
};

// Polar chart proper: eta >= 0 distance from O, alpha in (-pi/2, pi/2) the
// slope angle at O of the geodesic through the point.  The chart formulas
// produce the branch of the geodesic lying in x > 0.
struct HyperbolicPolar {
  double eta = 0.0;
  double alpha = 0.0;
};

// Total polar decomposition of the half-plane.  Interior points carry the
// chart angle plus `side`, the branch of the geodesic the point lies on
// (+1: x > 0, the chart's own branch; -1: the mirrored x < 0 branch).
// Points with x = 0 sit on the vertical geodesic, outside the open chart:
// they are tagged `on_axis` with eta = |ln y| and the ray direction.
struct PolarPoint {
  double eta = 0.0;
  double alpha = 0.0;
  int side = +1;
  bool on_axis = false;
  int axis_dir = 0;  // +1 toward y > 1, -1 toward y < 1, 0 at O itself
};

// Geodesics through O are half-circles centered on the boundary axis:
// (x - tan alpha)^2 + y^2 = 1/cos^2(alpha).
struct GeodesicCircle {
  double center_x = 0.0;
  double radius = 1.0;
};

inline GeodesicCircle geodesic_circle_for(double alpha) {
  return {std::tan(alpha), 1.0 / std::cos(alpha)};
}

// (eta, alpha) -> (x, y).  Algebraically
//   x = sinh(eta) cos(alpha) / (cosh(eta) - sinh(eta) sin(alpha)),
//   y = 1 / (cosh(eta) - sinh(eta) sin(alpha));
// evaluated with e^{-eta} scaling so nothing overflows for any eta >= 0.
// Whichever of 1 -+ sin(alpha) cancels near the alpha -> +-pi/2 poles is
// recovered as cos^2(alpha)/(1 +- sin(alpha)), so both limits keep full
// precision.
inline HyperbolicPoint polar_to_cartesian(const HyperbolicPolar& p) {
  const double sina = std::sin(p.alpha);
  const double cosa = std::cos(p.alpha);
  double one_minus_sina, one_plus_sina;
  if (sina >= 0.0) {
    one_plus_sina = 1.0 + sina;
    one_minus_sina = cosa * cosa / one_plus_sina;
  } else {
    one_minus_sina = 1.0 - sina;
    one_plus_sina = cosa * cosa / one_minus_sina;
  }
  const double em = std::exp(-2.0 * p.eta);
  const double denom = one_minus_sina + em * one_plus_sina;
  return {(1.0 - em) * cosa / denom, 2.0 * std::exp(-p.eta) / denom};
}

// cosh of the hyperbolic distance from O = (0, 1).
inline double cosh_distance_origin(const HyperbolicPoint& q) {
  return (q.x * q.x + q.y * q.y + 1.0) / (2.0 * q.y);
}

// cosh of the hyperbolic distance between two points.
inline double cosh_distance_pair(const HyperbolicPoint& a, const HyperbolicPoint& b) {
  const double dx = a.x - b.x;
  return (dx * dx + a.y * a.y + b.y * b.y) / (2.0 * a.y * b.y);
}

// (x, y) -> total polar decomposition.  The angle comes from
// tan(alpha) = (x^2 + y^2 - 1) / (2x) on both sides of the axis (for x < 0
// this is the mirrored geodesic's angle, which is what makes the round trip
// through `side` exact).
inline PolarPoint cartesian_to_polar(const HyperbolicPoint& q) {
  PolarPoint out;
  if (q.x == 0.0) {
    out.eta = std::abs(std::log(q.y));
    out.on_axis = (q.y != 1.0);
    out.axis_dir = (q.y > 1.0) ? +1 : (q.y < 1.0 ? -1 : 0);
    return out;
  }
  // cosh(eta) - 1 = (x^2 + (y-1)^2) / (2y) is a pure sum of squares, so
  // eta = 2 asinh(sqrt(.../2)) keeps full precision even for eta near 0,
  // where acosh of the raw distance would lose half the digits.
  const double half = (q.x * q.x + (q.y - 1.0) * (q.y - 1.0)) / (4.0 * q.y);
  out.eta = 2.0 * std::asinh(std::sqrt(half));
  const double sgn = q.x > 0.0 ? 1.0 : -1.0;
  out.alpha = std::atan2(sgn * (q.x * q.x + q.y * q.y - 1.0), sgn * 2.0 * q.x);
  out.side = q.x > 0.0 ? +1 : -1;
  return out;
}

// Total inverse of cartesian_to_polar.
inline HyperbolicPoint to_cartesian(const PolarPoint& p) {
  if (p.on_axis || (p.eta == 0.0 && p.axis_dir == 0 && p.alpha == 0.0)) {
    const double e = p.axis_dir >= 0 ? p.eta : -p.eta;
    return {0.0, std::exp(e)};
  }
  HyperbolicPoint q = polar_to_cartesian({p.eta, p.side >= 0 ? p.alpha : -p.alpha});
  if (p.side < 0) q.x = -q.x;
  return q;
}

// Hyperbolic law of cosines around O: for legs eta1, eta2 separated by angle
// dalpha, cosh(d) = cosh(eta1) cosh(eta2) - sinh(eta1) sinh(eta2) cos(dalpha).
// Rewritten as cosh(eta1 - eta2) + 2 sinh(eta1) sinh(eta2) sin^2(dalpha/2):
// every term is nonnegative, so nearly-aligned legs (dalpha ~ 0) keep full
// precision, and dalpha = pi/2 reduces to cosh(eta1) cosh(eta2) at ulp scale.
// dalpha is first reduced mod 2 pi into [0, pi].
inline double carnot_cosh(double eta1, double eta2, double dalpha) {
  double d = std::fmod(std::abs(dalpha), 2.0 * kPi);
  if (d > kPi) d = 2.0 * kPi - d;
  const double s = std::sin(0.5 * d);
  return std::cosh(eta1 - eta2) + 2.0 * std::sinh(eta1) * std::sinh(eta2) * (s * s);
}

// Right-triangle identity on the unit sphere: the hypotenuse d of orthogonal
// legs d1, d2 satisfies cos(d) = cos(d1) cos(d2).
inline double spherical_pythagoras(double d1, double d2) {
  return std::cos(d1) * std::cos(d2);
}

}  // namespace geocompass
