#pragma once

// Trajectory sampling for the Poisson-reoriented geodesic motion and the
// Monte Carlo estimators of its distance functionals.
//
// Every change of direction is orthogonal to the running geodesic, so the
// hyperbolic (resp. spherical) Pythagorean theorem turns the distance into a
// product over leg durations:
//
//   cosh eta(t) = prod_k cosh(c * leg_k),   cos d(t) = prod_k cos(c * leg_k),
//
// and sinh eta(t) >= prod_k sinh(c * leg_k) gives a lower bound on the
// distance.  Products are accumulated in the log domain (they grow
// exponentially); the spherical product, whose factors may vanish or change
// sign, uses compensated plain arithmetic instead.  Which direction
// (clockwise or counter-clockwise) is taken at each event does not enter any
// distance functional, so directions are not sampled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "geocompass/closed_form.hpp"
#include "geocompass/estimate.hpp"
#include "geocompass/model.hpp"
#include "geocompass/rng.hpp"
#include "geocompass/special.hpp"

namespace geocompass {

struct Trajectory {
  std::vector<double> event_times;  // increasing, inside (0, horizon]
  std::vector<double> legs;         // event_times.size() + 1 durations, sum = horizon
  double horizon = 0.0;
};

struct SampleStatistic {
  double log_cosh_eta = 0.0;   // log prod cosh(c * leg)  (>= 0)
  double sinh_bound_log = 0.0; // log prod sinh(c * leg)  (-inf if any factor vanishes)
  int n_events = 0;
};

namespace detail {

inline void rebuild_legs(Trajectory& traj) {
  traj.legs.clear();
  double prev = 0.0;
  for (double e : traj.event_times) {
    traj.legs.push_back(e - prev);
    prev = e;
  }
  traj.legs.push_back(traj.horizon - prev);
}

}  // namespace detail

// Homogeneous Poisson event times on (0, t) via exponential inter-arrivals.
inline void sample_poisson_times_into(Trajectory& traj, const ModelParams& p,
                                      SplitMix64& rng) {
  validate(p);
  traj.horizon = p.t;
  traj.event_times.clear();
  for (double s = rng.next_exponential(p.lambda); s < p.t;
       s += rng.next_exponential(p.lambda))
    traj.event_times.push_back(s);
  detail::rebuild_legs(traj);
}

inline Trajectory sample_poisson_times(const ModelParams& p, SeedSpec seed) {
  SplitMix64 rng(seed);
  Trajectory traj;
  sample_poisson_times_into(traj, p, rng);
  return traj;
}

// Exactly n events: order statistics of n uniforms on (0, t).
inline void sample_times_given_n_into(Trajectory& traj, const ModelParams& p, int n,
                                      SplitMix64& rng) {
  validate(p);
  if (n < 0) throw std::invalid_argument("sample_times_given_n: need n >= 0");
  traj.horizon = p.t;
  traj.event_times.clear();
  for (int i = 0; i < n; ++i) traj.event_times.push_back(p.t * rng.next_uniform());
  std::sort(traj.event_times.begin(), traj.event_times.end());
  detail::rebuild_legs(traj);
}

inline Trajectory sample_times_given_n(const ModelParams& p, int n, SeedSpec seed) {
  SplitMix64 rng(seed);
  Trajectory traj;
  sample_times_given_n_into(traj, p, n, rng);
  return traj;
}

// Conditioned on N(t) >= k: the k-th event time T_k is drawn from its
// truncated Erlang law by inverse CDF (never by rejection, which starves for
// small lambda t); given T_k, the earlier k-1 events are uniform order
// statistics on (0, T_k) and the process continues fresh after T_k.
inline void sample_times_given_at_least_into(Trajectory& traj, const ModelParams& p,
                                             int k, SplitMix64& rng) {
  validate(p);
  if (k < 1) throw std::invalid_argument("sample_times_given_at_least: need k >= 1");
  traj.horizon = p.t;
  traj.event_times.clear();
  const double tk = truncated_erlang_quantile(k, p.lambda, p.t, rng.next_uniform());
  for (int i = 0; i + 1 < k; ++i) traj.event_times.push_back(tk * rng.next_uniform());
  std::sort(traj.event_times.begin(), traj.event_times.end());
  traj.event_times.push_back(tk);
  for (double s = tk + rng.next_exponential(p.lambda); s < p.t;
       s += rng.next_exponential(p.lambda))
    traj.event_times.push_back(s);
  detail::rebuild_legs(traj);
}

inline Trajectory sample_times_given_at_least(const ModelParams& p, int k, SeedSpec seed) {
  SplitMix64 rng(seed);
  Trajectory traj;
  sample_times_given_at_least_into(traj, p, k, rng);
  return traj;
}

// Log-domain distance product and lower-bound product over all legs.
inline SampleStatistic cosh_eta(const Trajectory& traj, double c) {
  SampleStatistic st;
  st.n_events = static_cast<int>(traj.event_times.size());
  for (double leg : traj.legs) {
    st.log_cosh_eta += log_cosh(c * leg);
    st.sinh_bound_log += log_sinh(c * leg);
  }
  return st;
}

// Signed spherical product, compensated; factors may vanish or go negative,
// so no log trick applies.  Result always lies in [-1, 1].
inline double cos_spherical(const Trajectory& traj, double c) {
  CompensatedProduct prod;
  for (double leg : traj.legs) prod.multiply(std::cos(c * leg));
  return std::clamp(prod.result(), -1.0, 1.0);
}

// Distance of the motion restarted from the origin at the k-th event: the
// first k factors of the product are deleted (legs k+1, ..., n+1 survive).
// k = 0 is the unrestarted product.
inline SampleStatistic cosh_eta_jumpback(const Trajectory& traj, double c, int k) {
  const int n = static_cast<int>(traj.event_times.size());
  if (k < 0 || k > n)
    throw std::invalid_argument(
        "cosh_eta_jumpback: need 0 <= k <= n (condition on N(t) >= k first)");
  SampleStatistic st;
  st.n_events = n;
  for (std::size_t j = static_cast<std::size_t>(k); j < traj.legs.size(); ++j) {
    st.log_cosh_eta += log_cosh(c * traj.legs[j]);
    st.sinh_bound_log += log_sinh(c * traj.legs[j]);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Monte Carlo estimation
// ---------------------------------------------------------------------------

enum class MeanKind {
  cosh_eta,          // E{cosh eta(t)}
  cosh_eta_squared,  // E{cosh^2 eta(t)}
  cos_spherical,     // E{cos d(t)} on the unit sphere
  cosh_eta_jumpback, // E{cosh eta_k(t) | N(t) >= k}; requires at_least conditioning
  sinh_bound         // E{prod sinh(c * leg)}, the radius lower-bound functional
};

struct Conditioning {
  enum class Kind { none, exact_n, at_least_k };
  Kind kind = Kind::none;
  int value = 0;
  static Conditioning unconditioned() { return {}; }
  static Conditioning exactly(int n) { return {Kind::exact_n, n}; }
  static Conditioning at_least(int k) { return {Kind::at_least_k, k}; }
};

struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t replications = 0;
  std::optional<double> analytic;  // closed-form value when one exists
  std::optional<double> z_score;   // (mean - analytic) / std_error
  SeedSpec seed;
};

namespace detail {

// Hot-path products for the estimator.  Sum of legs is at most the horizon,
// and prod cosh(c leg) <= cosh(c t) (and the sinh product is smaller still),
// so plain multiplication is overflow-safe whenever c t < 700; the log
// domain is kept for the extreme-parameter regime.
inline double product_cosh_from(const std::vector<double>& legs, double c,
                                std::size_t first, bool plain) {
  if (plain) {
    double prod = 1.0;
    for (std::size_t j = first; j < legs.size(); ++j) prod *= std::cosh(c * legs[j]);
    return prod;
  }
  double acc = 0.0;
  for (std::size_t j = first; j < legs.size(); ++j) acc += log_cosh(c * legs[j]);
  return std::exp(acc);
}

inline double product_sinh(const std::vector<double>& legs, double c, bool plain) {
  if (plain) {
    double prod = 1.0;
    for (double leg : legs) prod *= std::sinh(c * leg);
    return prod;
  }
  double acc = 0.0;
  for (double leg : legs) acc += log_sinh(c * leg);
  return std::exp(acc);
}

inline std::optional<double> analytic_value(MeanKind kind, const ModelParams& p,
                                            const Conditioning& cond) {
  using K = Conditioning::Kind;
  switch (kind) {
    case MeanKind::cosh_eta:
      if (cond.kind == K::none) return mean_cosh(p);
      if (cond.kind == K::exact_n && cond.value <= 170)
        return conditional_mean_cosh(cond.value, p.c, p.t);
      return std::nullopt;
    case MeanKind::cosh_eta_squared:
      if (cond.kind == K::none) return second_moment(p);
      return std::nullopt;
    case MeanKind::cos_spherical:
      if (cond.kind == K::none) return spherical_mean(p);
      return std::nullopt;
    case MeanKind::cosh_eta_jumpback:
      if (cond.kind == K::at_least_k) return jumpback_mean(p, cond.value);
      return std::nullopt;
    case MeanKind::sinh_bound:
      if (cond.kind == K::none) return radius_bound_mean(p);
      if (cond.kind == K::exact_n && cond.value <= 170 && p.t > 0.0)
        return radius_bound_series(cond.value, p.c, p.t) * factorial(cond.value) /
               ipow(p.t, static_cast<unsigned>(cond.value));
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace detail

// Samples one functional value per replication and aggregates with the
// deterministic block reduction; the matching closed form (when the library
// has one) and its z-score are attached.  Zero-probability conditioning
// (e.g. N(t) >= 1 with t = 0) fails up front with conditioning_error.
inline EstimateReport estimate(MeanKind kind, const ModelParams& p, const Conditioning& cond,
                               std::uint64_t replications, SeedSpec seed, int workers = 1) {
  validate(p);
  if (kind == MeanKind::cosh_eta_jumpback && cond.kind != Conditioning::Kind::at_least_k)
    throw std::invalid_argument("estimate: jump-back mean requires at_least conditioning");
  if (cond.kind == Conditioning::Kind::exact_n && cond.value < 0)
    throw std::invalid_argument("estimate: exact_n conditioning needs n >= 0");
  if (cond.kind == Conditioning::Kind::at_least_k) {
    if (cond.value < 1) throw std::invalid_argument("estimate: at_least conditioning needs k >= 1");
    if (!(poisson_tail_at_least(cond.value, p.lambda * p.t) > 0.0))
      throw conditioning_error("estimate: Pr{N(t) >= k} vanishes; cannot condition");
  }

  // Plain products stay finite while cosh(ct) (or its square) is representable.
  const bool plain =
      p.c * p.t < (kind == MeanKind::cosh_eta_squared ? 350.0 : 700.0);
  const auto make_worker = [&, kind, cond, p, plain] {
    return [kind, cond, p, plain, scratch = Trajectory{}](SplitMix64& rng) mutable -> double {
      switch (cond.kind) {
        case Conditioning::Kind::none:
          sample_poisson_times_into(scratch, p, rng);
          break;
        case Conditioning::Kind::exact_n:
          sample_times_given_n_into(scratch, p, cond.value, rng);
          break;
        case Conditioning::Kind::at_least_k:
          sample_times_given_at_least_into(scratch, p, cond.value, rng);
          break;
      }
      switch (kind) {
        case MeanKind::cosh_eta:
          return detail::product_cosh_from(scratch.legs, p.c, 0, plain);
        case MeanKind::cosh_eta_squared: {
          const double v = detail::product_cosh_from(scratch.legs, p.c, 0, plain);
          return v * v;
        }
        case MeanKind::cos_spherical:
          return cos_spherical(scratch, p.c);
        case MeanKind::cosh_eta_jumpback:
          return detail::product_cosh_from(scratch.legs, p.c,
                                           static_cast<std::size_t>(cond.value), plain);
        case MeanKind::sinh_bound:
          return detail::product_sinh(scratch.legs, p.c, plain);
      }
      return 0.0;  // unreachable
    };
  };

  const MeanAccumulation acc = parallel_replicate(replications, seed, workers, make_worker);
  EstimateReport rep;
  rep.mean = acc.mean;
  rep.std_error = acc.std_error;
  rep.replications = acc.count;
  rep.seed = seed;
  rep.analytic = detail::analytic_value(kind, p, cond);
  if (rep.analytic) {
    if (rep.std_error > 0.0)
      rep.z_score = (rep.mean - *rep.analytic) / rep.std_error;
    else if (rep.mean == *rep.analytic)
      rep.z_score = 0.0;
  }
  return rep;
}

}  // namespace geocompass
