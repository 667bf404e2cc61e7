#pragma once

// Self-contained verification battery: every module invariant reduced to a
// fast, seeded, deterministic suite.  The CLI `verify` subcommand runs these
// and maps any failure to its exit code; tests reuse individual suites.

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geocompass/closed_form.hpp"
#include "geocompass/geometry.hpp"
#include "geocompass/model.hpp"
#include "geocompass/oracle.hpp"
#include "geocompass/rng.hpp"
#include "geocompass/sampler.hpp"
#include "geocompass/special.hpp"

namespace geocompass {

struct VerifySuiteResult {
  std::string name;
  int checks = 0;
  int failures = 0;
  double worst = 0.0;  // largest normalized error / |z| / violation observed
  std::string note;    // first failing check, or exception text
};

struct VerifyOptions {
  std::uint64_t seed = 20240817;
  int workers = 1;
};

namespace verify_detail {

class Checker {
 public:
  explicit Checker(std::string name) { res_.name = std::move(name); }
  void check(bool ok, double metric, const char* what) {
    ++res_.checks;
    if (metric > res_.worst) res_.worst = metric;
    if (!ok) {
      ++res_.failures;
      if (res_.note.empty()) res_.note = what;
    }
  }
  void check_close(double value, double reference, double rel_tol, const char* what) {
    const double scale = std::max(1.0, std::abs(reference));
    check(std::abs(value - reference) <= rel_tol * scale,
          std::abs(value - reference) / scale, what);
  }
  VerifySuiteResult take() { return std::move(res_); }

 private:
  VerifySuiteResult res_;
};

inline VerifySuiteResult geometry_round_trip(const VerifyOptions& opt) {
  Checker ck("geometry-round-trip");
  SplitMix64 rng({opt.seed, 1});
  for (int i = 0; i < 10000; ++i) {
    const double eta = 10.0 * rng.next_uniform();
    const double alpha = (rng.next_uniform() - 0.5) * 0.9999 * kPi;
    const int side = rng.next_uniform() < 0.5 ? -1 : 1;
    PolarPoint p{eta, alpha, side, false, 0};
    const HyperbolicPoint q = to_cartesian(p);
    const PolarPoint back = cartesian_to_polar(q);
    if (back.on_axis) {
      ck.check(std::abs(alpha) > kPi / 2 - 1e-6 || eta < 1e-12, 0.0,
               "unexpected axis branch on round trip");
      continue;
    }
    const double de = std::abs(back.eta - eta);
    const double da = eta < 1e-12 ? 0.0 : std::abs(back.alpha - alpha);
    const bool side_ok = eta < 1e-12 || back.side == side;
    ck.check(de < 1e-10 && da < 1e-10 && side_ok, std::max(de, da),
             "polar -> cartesian -> polar round trip drifted");
  }
  for (int i = 0; i < 100; ++i) {  // axis branch: x = 0, y = e^{+-eta}
    const double eta = 5.0 * rng.next_uniform();
    const int dir = rng.next_uniform() < 0.5 ? -1 : 1;
    const HyperbolicPoint q{0.0, std::exp(dir * eta)};
    const PolarPoint back = cartesian_to_polar(q);
    const double de = std::abs(back.eta - eta);
    ck.check(de < 1e-12 && (eta == 0.0 || (back.on_axis && back.axis_dir == dir)), de,
             "y-axis point must round-trip through the axis tag");
  }
  return ck.take();
}

inline VerifySuiteResult geometry_identities(const VerifyOptions& opt) {
  Checker ck("geometry-identities");
  SplitMix64 rng({opt.seed, 2});
  for (int i = 0; i < 10000; ++i) {
    const double e1 = 6.0 * rng.next_uniform(), e2 = 6.0 * rng.next_uniform();
    const double a1 = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const double a2 = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const HyperbolicPoint q1 = polar_to_cartesian({e1, a1});
    const HyperbolicPoint q2 = polar_to_cartesian({e2, a2});
    const double lhs = cosh_distance_pair(q1, q2);
    const double rhs = carnot_cosh(e1, e2, a1 - a2);
    ck.check(std::abs(lhs - rhs) <= 1e-10 * rhs, std::abs(lhs - rhs) / rhs,
             "pair distance must equal the polar law of cosines");
  }
  for (int i = 0; i < 1000; ++i) {  // right-angle reduction is exact
    const double a = 5.0 * rng.next_uniform(), b = 5.0 * rng.next_uniform();
    const double lhs = carnot_cosh(a, b, kPi / 2);
    const double rhs = std::cosh(a) * std::cosh(b);
    ck.check(std::abs(lhs - rhs) <= 1e-14 * rhs, std::abs(lhs - rhs) / rhs,
             "right-angle reduction drifted beyond ulp scale");
  }
  for (int i = 0; i < 1000; ++i) {  // trajectory stays on its geodesic circle
    const double alpha = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const double eta = 5.0 * rng.next_uniform();
    const GeodesicCircle g = geodesic_circle_for(alpha);
    const HyperbolicPoint q = polar_to_cartesian({eta, alpha});
    const double lhs = (q.x - g.center_x) * (q.x - g.center_x) + q.y * q.y;
    const double err = std::abs(lhs - g.radius * g.radius) / (g.radius * g.radius);
    ck.check(err < 1e-10, err, "point left its geodesic half-circle");
  }
  for (int i = 0; i < 1000; ++i) {  // equidistant locus is a Euclidean circle
    const double eta = 5.0 * rng.next_uniform();
    const double phi = 2.0 * kPi * rng.next_uniform();
    const HyperbolicPoint q{std::sinh(eta) * std::cos(phi),
                            std::cosh(eta) + std::sinh(eta) * std::sin(phi)};
    const double err = std::abs(cosh_distance_origin(q) - std::cosh(eta)) / std::cosh(eta);
    ck.check(err < 1e-10, err, "equidistant circle drifted");
  }
  return ck.take();
}

inline VerifySuiteResult mean_vs_mixture(const VerifyOptions&) {
  Checker ck("mean-vs-mixture");
  for (double lambda : {0.25, 1.0, 4.0})
    for (double c : {0.25, 1.0, 4.0})
      for (double t : {0.5, 1.0, 2.0}) {
        const ModelParams p{lambda, c, t};
        const double a = mean_cosh(p);
        const double b = mean_cosh_by_mixture(p);
        ck.check(std::abs(a - b) <= 1e-8 * a, std::abs(a - b) / a,
                 "mixture route disagrees with the closed form");
      }
  return ck.take();
}

inline VerifySuiteResult conditional_displays(const VerifyOptions&) {
  Checker ck("conditional-displays");
  for (double c : {0.5, 1.0, 2.0})
    for (double t : {0.4, 1.0, 1.7}) {
      const double z = c * t;
      const double refs[4] = {
          std::cosh(z),
          0.5 * std::cosh(z) + 0.5 * std::sinh(z) / z,
          0.25 * std::cosh(z) + 0.75 * std::sinh(z) / z,
          (0.125 + 0.375 / (z * z)) * std::cosh(z) +
              (0.75 / z - 0.375 / (z * z * z)) * std::sinh(z)};
      for (int n = 0; n <= 3; ++n)
        ck.check_close(conditional_mean_cosh(n, c, t), refs[n], 1e-10,
                       "conditional mean series drifted from its closed display");
    }
  for (int n = 1; n <= 2; ++n) {  // series vs independent quadrature
    const double o = conditional_mean_oracle(Kernel::cosh_k, n, 0.9, 1.2);
    ck.check_close(conditional_mean_cosh(n, 0.9, 1.2), o, 1e-7,
                   "conditional mean series drifted from quadrature oracle");
  }
  return ck.take();
}

inline VerifySuiteResult ode_residuals(const VerifyOptions&) {
  Checker ck("ode-residuals");
  const std::vector<double> grid{0.5, 1.0, 2.0, 5.0};
  for (double lambda : {0.5, 2.0})
    for (double c : {0.5, 2.0})
      for (OdeKind kind : {OdeKind::hyperbolic_mean, OdeKind::second_moment,
                           OdeKind::spherical_mean}) {
        const auto rep = ode_residual(kind, {lambda, c, 1.0}, grid);
        ck.check(rep.max_residual < 1e-6, rep.max_residual,
                 "closed form violates its governing equation");
      }
  return ck.take();
}

inline VerifySuiteResult cubic_special_case(const VerifyOptions&) {
  Checker ck("cubic-special-case");
  for (int i = 0; i < 20; ++i) {
    const double c = 0.3 + 0.15 * i;
    const double lambda = 3.0 * c;
    const double t = 0.3 + 0.08 * i;
    const double ref = std::exp(-2.0 * c * t) *
                       (1.0 + 6.0 * std::cosh(std::sqrt(7.0) * c * t) +
                        2.0 * std::sqrt(7.0) * std::sinh(std::sqrt(7.0) * c * t)) /
                       7.0;
    ck.check_close(second_moment({lambda, c, t}), ref, 1e-10,
                   "second moment drifted from the degenerate-cubic display");
    const CubicRoots R = second_moment_roots({lambda, c, t});
    double worst = 0.0;
    for (const auto& s : R.s) {
      double best = 1e300;
      for (double want : {0.0, std::sqrt(7.0) * c, -std::sqrt(7.0) * c})
        best = std::min(best, std::abs(s.real() - want) + std::abs(s.imag()));
      worst = std::max(worst, best);
    }
    ck.check(worst < 1e-12 * std::max(1.0, std::sqrt(7.0) * c), worst,
             "depressed-cubic roots missed {0, +-sqrt(7) c}");
  }
  return ck.take();
}

inline VerifySuiteResult jumpback_identities(const VerifyOptions&) {
  Checker ck("jumpback-identities");
  for (double lambda : {0.5, 1.0, 2.5})
    for (double c : {0.3, 1.0, 2.0})
      for (double t : {0.7, 1.5, 3.0}) {
        const ModelParams p{lambda, c, t};
        const double w = std::hypot(lambda, 2.0 * c);
        const double k1_ref = (lambda / w) * std::sinh(0.5 * w * t) / std::sinh(0.5 * lambda * t);
        ck.check_close(jumpback_mean(p, 1), k1_ref, 1e-9,
                       "k=1 restart mean drifted from its display");
        const double p2 = poisson_tail_at_least(2, lambda * t);
        const double k2_ref = lambda * lambda * std::exp(-0.5 * lambda * t) / (c * c * p2) *
                              (std::cosh(0.5 * w * t) - (lambda / w) * std::sinh(0.5 * w * t) -
                               std::exp(-0.5 * lambda * t));
        ck.check_close(jumpback_mean(p, 2), k2_ref, 1e-9,
                       "k=2 restart mean drifted from its display");
        const double decomposition =
            (c * c) / (lambda * lambda) * p2 * jumpback_mean(p, 2) +
            poisson_tail_at_least(1, lambda * t) * jumpback_mean(p, 1) +
            std::exp(-lambda * t);
        ck.check_close(mean_cosh(p), decomposition, 1e-8,
                       "restart decomposition of the mean failed");
      }
  const ModelParams q{1.2, 0.8, 1.6};
  for (int k : {1, 2, 3})
    ck.check_close(gamma_mixture_mean(q, static_cast<double>(k)), jumpback_mean(q, k), 1e-6,
                   "fractional-order mean disagrees at integer order");
  return ck.take();
}

inline VerifySuiteResult spherical_identities(const VerifyOptions&) {
  Checker ck("spherical-identities");
  for (double c : {0.4, 1.0, 2.2})
    for (double t : {0.5, 1.3, 2.4}) {
      const double lambda = 2.0 * c;
      const double ref = std::exp(-0.5 * lambda * t) * (1.0 + 0.5 * lambda * t);
      ck.check_close(spherical_mean({lambda, c, t}), ref, 1e-12,
                     "critical spherical mean drifted");
    }
  // supercritical values equal the hyperbolic formula continued to imaginary
  // speed: w = sqrt(lambda^2 + 4 (i c)^2) makes cosh/sinh turn into cos/sin.
  for (double lambda : {0.3, 1.0, 2.0})
    for (double c : {1.1, 2.0, 3.5})
      for (double t : {0.6, 1.4}) {
        if (!(lambda * lambda < 4.0 * c * c)) continue;
        const std::complex<double> w = std::sqrt(std::complex<double>(
            lambda * lambda - 4.0 * c * c, 0.0));
        const std::complex<double> half_wt = 0.5 * t * w;
        const std::complex<double> value =
            std::exp(-0.5 * lambda * t) *
            (std::cosh(half_wt) + (lambda / w) * std::sinh(half_wt));
        ck.check_close(spherical_mean({lambda, c, t}), value.real(), 1e-10,
                       "imaginary-speed continuation mismatch");
        ck.check(std::abs(value.imag()) < 1e-12, std::abs(value.imag()),
                 "imaginary-speed continuation has nonreal value");
      }
  const double big = spherical_mean({1000.0, 1.0, 1.0});
  ck.check(std::abs(big - 1.0) < 1e-2, std::abs(big - 1.0),
           "high-rate spherical mean must pin near 1");
  return ck.take();
}

inline VerifySuiteResult sinh_bound_paths(const VerifyOptions& opt) {
  Checker ck("sinh-bound-paths");
  const ModelParams p{1.0, 0.8, 2.0};
  int violations = 0;
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    const Trajectory traj = sample_poisson_times(p, SeedSpec{opt.seed, 3'000'000 + r});
    const SampleStatistic st = cosh_eta(traj, p.c);
    // log sinh eta from log cosh eta, in the log domain throughout
    const double m = st.log_cosh_eta;
    const double log_sinh_eta =
        m + 0.5 * std::log1p(-std::exp(-2.0 * m));  // -inf when eta = 0
    const double gap = st.sinh_bound_log - log_sinh_eta;  // must be <= 0
    if (std::isnan(gap)) continue;                        // both -inf: 0-event path
    worst = std::max(worst, gap);
    if (gap > 1e-10) ++violations;
  }
  ck.check(violations == 0, worst, "sampled path violated the sinh lower bound");
  // partial generating sums reach the closed generating-function value
  for (double lambda : {0.5, 1.5})
    for (double c : {0.4, 1.2}) {
      const double t = 1.3;
      double sum = 0.0;
      for (int n = 0; n <= 40; ++n) {
        const double term = ipow(lambda, static_cast<unsigned>(n)) * radius_bound_series(n, c, t);
        sum += term;
        if (n > 4 && term < 1e-14 * sum) break;
      }
      ck.check_close(sum, radius_bound_generating(lambda, c, t), 1e-6,
                     "generating-function partial sums failed to converge");
      ck.check_close(std::exp(-lambda * t) * sum, radius_bound_mean({lambda, c, t}), 1e-6,
                     "radius-bound mean disagrees with its series route");
    }
  return ck.take();
}

inline VerifySuiteResult monte_carlo_z(const VerifyOptions& opt) {
  Checker ck("monte-carlo-z");
  const ModelParams p{1.0, 0.5, 2.0};
  const std::uint64_t reps = 30000;
  const auto run = [&](MeanKind kind, Conditioning cond, const char* what) {
    const EstimateReport rep =
        estimate(kind, p, cond, reps, {opt.seed, 4'000'000}, opt.workers);
    ck.check(rep.z_score && std::abs(*rep.z_score) <= 4.0,
             rep.z_score ? std::abs(*rep.z_score) : 1e300, what);
  };
  run(MeanKind::cosh_eta, Conditioning::unconditioned(), "distance mean z-score blew up");
  run(MeanKind::cos_spherical, Conditioning::unconditioned(), "spherical mean z-score blew up");
  run(MeanKind::cosh_eta_jumpback, Conditioning::at_least(1), "restart mean z-score blew up");
  run(MeanKind::cosh_eta, Conditioning::exactly(2), "conditional mean z-score blew up");
  run(MeanKind::cosh_eta_squared, Conditioning::unconditioned(), "second moment z-score blew up");
  run(MeanKind::sinh_bound, Conditioning::unconditioned(), "radius bound z-score blew up");
  return ck.take();
}

inline VerifySuiteResult determinism(const VerifyOptions& opt) {
  Checker ck("determinism");
  const ModelParams p{1.0, 0.7, 1.5};
  const auto a = estimate(MeanKind::cosh_eta, p, Conditioning::unconditioned(), 20000,
                          {opt.seed, 5'000'000}, 1);
  const auto b = estimate(MeanKind::cosh_eta, p, Conditioning::unconditioned(), 20000,
                          {opt.seed, 5'000'000}, 4);
  ck.check(a.mean == b.mean && a.std_error == b.std_error,
           std::abs(a.mean - b.mean), "estimates depend on worker count");
  const Trajectory t1 = sample_poisson_times(p, {opt.seed, 6'000'000});
  const Trajectory t2 = sample_poisson_times(p, {opt.seed, 6'000'000});
  ck.check(t1.event_times == t2.event_times && t1.legs == t2.legs, 0.0,
           "trajectory replay is not bitwise identical");
  return ck.take();
}

}  // namespace verify_detail

inline std::vector<VerifySuiteResult> run_verification(const VerifyOptions& opt = {}) {
  using Suite = VerifySuiteResult (*)(const VerifyOptions&);
  constexpr std::pair<const char*, Suite> suites[] = {
      {"geometry-round-trip", &verify_detail::geometry_round_trip},
      {"geometry-identities", &verify_detail::geometry_identities},
      {"mean-vs-mixture", &verify_detail::mean_vs_mixture},
      {"conditional-displays", &verify_detail::conditional_displays},
      {"ode-residuals", &verify_detail::ode_residuals},
      {"cubic-special-case", &verify_detail::cubic_special_case},
      {"jumpback-identities", &verify_detail::jumpback_identities},
      {"spherical-identities", &verify_detail::spherical_identities},
      {"sinh-bound-paths", &verify_detail::sinh_bound_paths},
      {"monte-carlo-z", &verify_detail::monte_carlo_z},
      {"determinism", &verify_detail::determinism},
  };
  std::vector<VerifySuiteResult> out;
  for (const auto& [name, fn] : suites) {
    try {
      out.push_back(fn(opt));
    } catch (const std::exception& e) {
      VerifySuiteResult res;
      res.name = name;
      res.checks = 1;
      res.failures = 1;
      res.note = std::string("exception: ") + e.what();
      out.push_back(std::move(res));
    }
  }
  return out;
}

inline bool all_passed(const std::vector<VerifySuiteResult>& results) {
  for (const auto& r : results)
    if (r.failures != 0) return false;
  return true;
}

}  // namespace geocompass
