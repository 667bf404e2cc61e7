#pragma once

// Scalar numeric helpers shared across the library: stable log-domain
// hyperbolic functions, positive-series accumulation, Poisson/Erlang tails
// (via Boost.Math regularized incomplete gamma), and deterministic reductions.

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace geocompass {

// Numeric failure taxonomy: callers (and the CLI) distinguish these from
// usage errors.  Every throwing site states what diverged and why.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct truncation_error : numeric_error {
  using numeric_error::numeric_error;
};
struct quadrature_error : numeric_error {
  using numeric_error::numeric_error;
};
struct conditioning_error : numeric_error {
  using numeric_error::numeric_error;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLog2 = std::numbers::ln2;

// acos/acosh argument clamping: routes tiny negative excursions of
// 1 - cos or cosh - 1 expressions back into the domain.
inline double acosh_clamped(double x) { return std::acosh(x < 1.0 ? 1.0 : x); }

// log cosh x without overflow: |x| + log1p(e^{-2|x|}) - log 2.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - kLog2;
}

// log sinh x for x >= 0; -inf at 0.  Direct evaluation below 0.5 (sinh is
// exact there), overflow-free form above.
inline double log_sinh(double x) {
  if (x < 0.5) return std::log(std::sinh(x));
  return x + std::log1p(-std::exp(-2.0 * x)) - kLog2;
}

// sinh(x)/x with the removable singularity filled by its even Taylor series.
inline double sinhc(double x) {
  const double a = std::abs(x);
  if (a < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}

// sin(x)/x, same treatment.
inline double sinc(double x) {
  const double a = std::abs(x);
  if (a < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// m! as a double, exact table through 22!, accumulated beyond; m <= 170.
inline double factorial(int m) {
  static const auto table = [] {
    std::vector<double> f(171);
    f[0] = 1.0;
    for (int i = 1; i <= 170; ++i) f[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i - 1)] * i;
    return f;
  }();
  if (m < 0 || m > 170) throw std::invalid_argument("factorial: need 0 <= m <= 170");
  return table[static_cast<std::size_t>(m)];
}

// Integer power by repeated squaring (exponents stay small here).
template <typename Real>
Real ipow(Real base, unsigned n) {
  Real r = Real(1);
  while (n != 0) {
    if (n & 1u) r *= base;
    base *= base;
    n >>= 1u;
  }
  return r;
}

// Pr{N >= k} for N ~ Poisson(mu), evaluated as the regularized lower
// incomplete gamma P(k, mu) = Pr{Erlang(k) <= mu} -- no head-sum cancellation
// at either end of the mu range.
inline double poisson_tail_at_least(int k, double mu) {
  if (k <= 0) return 1.0;
  if (mu <= 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(k), mu);
}

// Quantile of the Erlang(k, lambda) arrival time T_k conditioned on T_k <= t:
// inverse CDF evaluated exactly through gamma_p_inv.
inline double truncated_erlang_quantile(int k, double lambda, double t, double u) {
  if (k == 1) {
    // exponential case in closed form (hot path for jump-back sampling)
    const double mass = -std::expm1(-lambda * t);
    if (!(mass > 0.0))
      throw conditioning_error("conditioning event {N(t) >= k} has zero probability");
    return -std::log1p(-u * mass) / lambda;
  }
  const double mass = poisson_tail_at_least(k, lambda * t);
  if (!(mass > 0.0))
    throw conditioning_error("conditioning event {N(t) >= k} has zero probability");
  const double x = boost::math::gamma_p_inv(static_cast<double>(k), u * mass);
  return x / lambda;
}

// Truncation policy for the explicit series: stop once two consecutive terms
// drop below rel_tol times the running sum; give up past max_terms.
struct SeriesControl {
  double rel_tol = 1e-12;
  long max_terms = 1000000;
};

// Sums first_term * prod_{j<i} ratio(j) over i = 0, 1, ... for positive-term
// series.  ratio(j) maps term j to term j+1.
template <typename RatioFn>
double accumulate_series(double first_term, RatioFn ratio, const SeriesControl& ctl,
                         const char* what) {
  double sum = first_term;
  double term = first_term;
  bool prev_small = false;
  for (long j = 0; j < ctl.max_terms; ++j) {
    term *= ratio(j);
    sum += term;
    const bool small = std::abs(term) <= ctl.rel_tol * std::abs(sum);
    if (small && prev_small) return sum;
    prev_small = small;
  }
  throw truncation_error(std::string(what) + ": series did not meet rel_tol " +
                         std::to_string(ctl.rel_tol) + " within " +
                         std::to_string(ctl.max_terms) + " terms");
}

// Pairwise (cascade) summation: a fixed reduction tree over the index range,
// so totals are independent of how work was split across threads.
inline double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

// Compensated running product (Ogita-style): tracks the rounding error of
// each multiply through an FMA so near-unit products of many factors keep
// full working precision.
class CompensatedProduct {
 public:
  void multiply(double f) {
    const double p = value_ * f;
    err_ = std::fma(value_, f, -p) + err_ * f;
    value_ = p;
  }
  double result() const { return value_ + err_; }

 private:
  double value_ = 1.0;
  double err_ = 0.0;
};

}  // namespace geocompass
