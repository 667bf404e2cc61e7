#pragma once

// Roots of the depressed cubic s^3 + p s + q = 0.
//
// The discriminant p^3/27 + q^2/4 decides the branch: negative means three
// distinct real roots (casus irreducibilis), solved trigonometrically --
// radicals would force complex arithmetic and lose accuracy; nonnegative
// means one real root (Cardano) or a repeated root.  Every real root gets a
// final Newton polish.

#include <array>
#include <cmath>
#include <complex>

namespace geocompass {

namespace detail {
inline double polish_cubic_root(double s, double p, double q) {
  for (int it = 0; it < 2; ++it) {
    const double f = (s * s + p) * s + q;
    const double df = 3.0 * s * s + p;
    if (df == 0.0) break;
    const double step = f / df;
    if (!std::isfinite(step)) break;
    s -= step;
  }
  return s;
}
}  // namespace detail

inline std::array<std::complex<double>, 3> solve_depressed_cubic(double p, double q) {
  using C = std::complex<double>;
  if (p == 0.0 && q == 0.0) return {C(0.0), C(0.0), C(0.0)};

  const double third_p = p / 3.0;
  const double half_q = q / 2.0;
  const double disc = third_p * third_p * third_p + half_q * half_q;

  if (disc < 0.0) {
    // Three real roots: s_k = m cos(phi - 2 pi k / 3), cos(3 phi) = 3q/(p m).
    const double m = 2.0 * std::sqrt(-third_p);
    double cos3phi = 3.0 * q / (p * m);
    cos3phi = std::clamp(cos3phi, -1.0, 1.0);
    const double phi = std::acos(cos3phi) / 3.0;
    constexpr double two_thirds_pi = 2.0943951023931953;
    std::array<C, 3> out;
    for (int k = 0; k < 3; ++k) {
      const double s = m * std::cos(phi - two_thirds_pi * k);
      out[static_cast<std::size_t>(k)] = C(detail::polish_cubic_root(s, p, q));
    }
    return out;
  }

  if (disc == 0.0) {
    // Repeated roots: simple root 3q/p, double root -3q/(2p) (p != 0 here).
    const double simple = 3.0 * q / p;
    const double twice = -1.5 * q / p;
    return {C(detail::polish_cubic_root(simple, p, q)), C(twice), C(twice)};
  }

  // One real root; pick the large-magnitude cube root first to dodge
  // cancellation, recover the partner from u v = -p/3.
  const double sq = std::sqrt(disc);
  const double u3 = (q <= 0.0) ? (-half_q + sq) : (-half_q - sq);
  const double u = std::cbrt(u3);
  const double v = (u == 0.0) ? 0.0 : -third_p / u;
  const double real_root = detail::polish_cubic_root(u + v, p, q);
  const double re = -0.5 * (u + v);
  const double im = 0.5 * std::sqrt(3.0) * (u - v);
  return {C(real_root), C(re, im), C(re, -im)};
}

}  // namespace geocompass
