// Acceptance battery: every agreed deliverable property, one line of output
// per criterion, nonzero exit when any fails.  Tolerances and case counts are
// the contract values; runtime budgets are enforced alongside correctness.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "geocompass/closed_form.hpp"
#include "geocompass/geometry.hpp"
#include "geocompass/model.hpp"
#include "geocompass/oracle.hpp"
#include "geocompass/rng.hpp"
#include "geocompass/sampler.hpp"
#include "geocompass/special.hpp"

using namespace geocompass;

namespace {

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

struct Tally {
  int checks = 0;
  double worst = 0.0;
  std::string failure;  // first failure description; empty = all good

  void check(bool ok, double metric, const std::string& what) {
    ++checks;
    if (metric > worst) worst = metric;
    if (!ok && failure.empty()) {
      std::ostringstream os;
      os << what << " (metric " << metric << ")";
      failure = os.str();
    }
  }
  void check_close(double value, double reference, double tol, const std::string& what) {
    check(rel_err(value, reference) < tol, rel_err(value, reference), what);
  }
};

// ---------------------------------------------------------------------- 1
Tally criterion_geometry() {
  Tally t;
  SplitMix64 rng({424242, 0});
  for (int i = 0; i < 10000; ++i) {  // chart round trip, both branches
    const double eta = 10.0 * rng.next_uniform();
    const double alpha = (rng.next_uniform() - 0.5) * 0.9999 * kPi;
    const int side = rng.next_uniform() < 0.5 ? -1 : 1;
    const HyperbolicPoint q = to_cartesian({eta, alpha, side, false, 0});
    const PolarPoint back = cartesian_to_polar(q);
    const double err =
        std::max(std::abs(back.eta - eta), std::abs(back.alpha - alpha));
    t.check(!back.on_axis && back.side == side && err < 1e-10, err,
            "polar round trip drifted");
  }
  for (int i = 0; i < 10000; ++i) {  // two-point distance vs law of cosines
    const double e1 = 6.0 * rng.next_uniform(), e2 = 6.0 * rng.next_uniform();
    const double a1 = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const double a2 = (rng.next_uniform() - 0.5) * 0.999 * kPi;
    const double lhs = cosh_distance_pair(polar_to_cartesian({e1, a1}),
                                          polar_to_cartesian({e2, a2}));
    const double rhs = carnot_cosh(e1, e2, a1 - a2);
    t.check(std::abs(lhs - rhs) <= 1e-10 * rhs, std::abs(lhs - rhs) / rhs,
            "pair distance disagrees with the law of cosines");
  }
  for (int i = 0; i < 10000; ++i) {  // right-angle product reduction
    const double a = 5.0 * rng.next_uniform(), b = 5.0 * rng.next_uniform();
    const double lhs = carnot_cosh(a, b, kPi / 2);
    const double rhs = std::cosh(a) * std::cosh(b);
    t.check(std::abs(lhs - rhs) <= 1e-13 * rhs, std::abs(lhs - rhs) / rhs,
            "right-angle reduction drifted");
  }
  return t;
}

// ---------------------------------------------------------------------- 2
Tally criterion_mixture() {
  Tally t;
  const double grid[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  for (double lambda : grid)
    for (double c : grid)
      for (double time : grid) {
        const ModelParams p{lambda, c, time};
        t.check_close(mean_cosh_by_mixture(p), mean_cosh(p), 1e-8,
                      "mixture route disagrees with the closed-form mean");
      }
  return t;
}

// ---------------------------------------------------------------------- 3
Tally criterion_conditional() {
  Tally t;
  for (double c : {0.25, 0.6, 1.0, 1.7, 2.5})
    for (double time : {0.3, 0.8, 1.6, 3.0}) {
      const double z = c * time;
      const double refs[4] = {
          std::cosh(z),
          0.5 * std::cosh(z) + 0.5 * std::sinh(z) / z,
          0.25 * std::cosh(z) + 0.75 * std::sinh(z) / z,
          (0.125 + 0.375 / (z * z)) * std::cosh(z) +
              (0.75 / z - 0.375 / (z * z * z)) * std::sinh(z)};
      for (int n = 0; n <= 3; ++n)
        t.check_close(conditional_mean_cosh(n, c, time), refs[n], 1e-10,
                      "conditional mean misses its closed display");
    }
  for (int n = 0; n <= 3; ++n)
    for (auto [c, time] : {std::pair{0.9, 1.3}, std::pair{0.5, 2.0},
                           std::pair{1.5, 0.7}, std::pair{2.0, 1.6}})
      t.check_close(conditional_mean_cosh(n, c, time),
                    conditional_mean_oracle(Kernel::cosh_k, n, c, time), 1e-7,
                    "conditional mean disagrees with the quadrature oracle");
  return t;
}

// ---------------------------------------------------------------------- 4
Tally criterion_ode() {
  Tally t;
  const std::vector<double> tgrid{0.5, 1.0, 2.0, 5.0};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double lambda = 0.25 + i * (4.0 - 0.25) / 4.0;
      const double c = 0.25 + j * (4.0 - 0.25) / 4.0;
      for (OdeKind kind : {OdeKind::hyperbolic_mean, OdeKind::second_moment,
                           OdeKind::spherical_mean}) {
        const auto rep = ode_residual(kind, {lambda, c, 1.0}, tgrid);
        t.check(rep.max_residual < 1e-6, rep.max_residual,
                "closed form violates its differential equation");
      }
    }
  return t;
}

// ---------------------------------------------------------------------- 5
Tally criterion_cubic() {
  Tally t;
  for (int i = 0; i < 20; ++i) {
    const double c = 0.3 + 0.15 * i;
    const double time = 0.3 + 0.08 * i;
    const double s7 = std::sqrt(7.0);
    const double ref =
        std::exp(-2.0 * c * time) *
        (1.0 + 6.0 * std::cosh(s7 * c * time) + 2.0 * s7 * std::sinh(s7 * c * time)) / 7.0;
    t.check_close(second_moment({3.0 * c, c, time}), ref, 1e-10,
                  "second moment misses the degenerate-cubic display");
    const CubicRoots R = second_moment_roots({3.0 * c, c, time});
    for (const auto& s : R.s) {
      double best = 1e300;
      for (double want : {0.0, s7 * c, -s7 * c})
        best = std::min(best, std::abs(s - std::complex<double>(want, 0.0)));
      t.check(best < 1e-12 * std::max(1.0, s7 * c), best,
              "cubic roots missed {0, +-sqrt(7) c}");
    }
  }
  return t;
}

// ---------------------------------------------------------------------- 6
Tally criterion_jumpback() {
  Tally t;
  for (double lambda : {0.5, 1.0, 2.5})
    for (double c : {0.3, 1.0, 2.0})
      for (double time : {0.7, 1.5, 3.0}) {
        const ModelParams p{lambda, c, time};
        const double w = std::hypot(lambda, 2.0 * c);
        const double k1 =
            (lambda / w) * std::sinh(0.5 * w * time) / std::sinh(0.5 * lambda * time);
        t.check_close(jumpback_mean(p, 1), k1, 1e-9,
                      "first-restart mean misses its closed display");
        const double p2 = poisson_tail_at_least(2, lambda * time);
        const double k2 =
            lambda * lambda * std::exp(-0.5 * lambda * time) / (c * c * p2) *
            (std::cosh(0.5 * w * time) - (lambda / w) * std::sinh(0.5 * w * time) -
             std::exp(-0.5 * lambda * time));
        t.check_close(jumpback_mean(p, 2), k2, 1e-9,
                      "second-restart mean misses its closed display");
        const double decomposition =
            (c * c) / (lambda * lambda) * p2 * jumpback_mean(p, 2) +
            poisson_tail_at_least(1, lambda * time) * jumpback_mean(p, 1) +
            std::exp(-lambda * time);
        t.check_close(mean_cosh(p), decomposition, 1e-8,
                      "restart decomposition of the mean fails");
      }
  const ModelParams q{1.2, 0.8, 1.6};
  for (int k : {1, 2, 3})
    t.check_close(gamma_mixture_mean(q, static_cast<double>(k)), jumpback_mean(q, k),
                  1e-6, "fractional-order mean disagrees at integer order");
  return t;
}

// ---------------------------------------------------------------------- 7
Tally criterion_spherical() {
  Tally t;
  for (double c : {0.4, 1.0, 2.2})
    for (double time : {0.5, 1.3, 2.4}) {
      const double lambda = 2.0 * c;
      t.check_close(spherical_mean({lambda, c, time}),
                    std::exp(-0.5 * lambda * time) * (1.0 + 0.5 * lambda * time), 1e-12,
                    "critical spherical mean misses its display");
    }
  for (double lambda : {0.3, 1.0, 2.0})
    for (double c : {1.1, 2.0, 3.5})
      for (double time : {0.6, 1.4}) {
        if (!(lambda < 2.0 * c)) continue;
        const std::complex<double> w =
            std::sqrt(std::complex<double>(lambda * lambda - 4.0 * c * c, 0.0));
        const std::complex<double> value =
            std::exp(-0.5 * lambda * time) *
            (std::cosh(0.5 * time * w) + (lambda / w) * std::sinh(0.5 * time * w));
        t.check(std::abs(value.imag()) < 1e-12, std::abs(value.imag()),
                "imaginary-speed continuation is not real");
        t.check_close(spherical_mean({lambda, c, time}), value.real(), 1e-10,
                      "supercritical mean disagrees with the continued formula");
      }
  const double big = spherical_mean({1000.0, 1.0, 1.0});
  t.check(std::abs(big - 1.0) < 1e-2, std::abs(big - 1.0),
          "high-rate spherical mean does not pin near 1");
  return t;
}

// ---------------------------------------------------------------------- 8
Tally criterion_monte_carlo() {
  Tally t;
  const ModelParams p{1.0, 0.5, 2.0};
  const std::uint64_t reps = 100000;
  struct Setup {
    const char* name;
    MeanKind kind;
    Conditioning cond;
  };
  const Setup setups[] = {
      {"distance mean", MeanKind::cosh_eta, Conditioning::unconditioned()},
      {"spherical mean", MeanKind::cos_spherical, Conditioning::unconditioned()},
      {"first-restart mean", MeanKind::cosh_eta_jumpback, Conditioning::at_least(1)},
      {"two-event conditional mean", MeanKind::cosh_eta, Conditioning::exactly(2)},
  };
  for (const Setup& s : setups) {
    int exceed = 0;
    double worst_z = 0.0;
    for (std::uint64_t seedval = 0; seedval < 100; ++seedval) {
      const EstimateReport rep = estimate(s.kind, p, s.cond, reps, {seedval, 0}, 1);
      const double z = rep.z_score ? std::abs(*rep.z_score) : 1e300;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++exceed;
    }
    t.check(exceed <= 2, static_cast<double>(exceed),
            std::string(s.name) + ": more than 2 of 100 seeds beyond 3 standard errors");
    t.check(worst_z < 6.0, worst_z, std::string(s.name) + ": implausibly large z-score");
  }
  return t;
}

// ---------------------------------------------------------------------- 9
Tally criterion_radius_bound() {
  Tally t;
  for (int n = 1; n <= 3; ++n)
    for (auto [c, time] : {std::pair{0.9, 1.3}, std::pair{1.5, 0.8}})
      t.check_close(conditional_mean_oracle(Kernel::sinh_k, n, c, time),
                    radius_bound_series(n, c, time) * factorial(n) /
                        ipow(time, static_cast<unsigned>(n)),
                    1e-7, "radius-bound series disagrees with the quadrature oracle");
  for (double lambda : {0.5, 1.5})
    for (double c : {0.4, 1.2}) {
      const double time = 1.3;
      double sum = 0.0;
      for (int n = 0; n <= 60; ++n) {
        const double term =
            ipow(lambda, static_cast<unsigned>(n)) * radius_bound_series(n, c, time);
        sum += term;
        if (n > 4 && term < 1e-15 * sum) break;
      }
      t.check_close(sum, radius_bound_generating(lambda, c, time), 1e-6,
                    "weighted series misses the generating-function value");
    }
  const ModelParams p{1.0, 0.8, 2.0};
  int violations = 0;
  double worst_gap = 0.0;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    const SampleStatistic st = cosh_eta(sample_poisson_times(p, {777, r}), p.c);
    const double log_sinh_eta =
        st.log_cosh_eta + 0.5 * std::log1p(-std::exp(-2.0 * st.log_cosh_eta));
    const double gap = st.sinh_bound_log - log_sinh_eta;
    if (std::isnan(gap)) continue;
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-10) ++violations;
  }
  t.check(violations == 0, worst_gap,
          "a sampled path violated the pathwise radius lower bound");
  return t;
}

// --------------------------------------------------------------------- 10
struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd =
      std::string(GEOCOMPASS_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  CliRun res;
  if (pipe == nullptr) return res;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

Tally criterion_cli() {
  Tally t;
  const std::string flags =
      "simulate --kind cosh --lambda 1 --c 0.5 --t 2 --reps 50000 --seed 42";
  const CliRun a = run_cli(flags);
  const CliRun b = run_cli(flags);
  t.check(a.exit_code == 0 && b.exit_code == 0, std::abs(a.exit_code) + std::abs(b.exit_code),
          "simulate run failed");
  t.check(a.out == b.out && !a.out.empty(), a.out == b.out ? 0.0 : 1.0,
          "identical seeds did not reproduce byte-identical output");
  const CliRun c = run_cli(flags + " --workers 4");
  t.check(c.out == a.out, c.out == a.out ? 0.0 : 1.0,
          "worker count changed the output bytes");
  const CliRun sweep1 = run_cli("mean --c 0.5 --t 2 --sweep lambda:0.25:4:25");
  const CliRun sweep2 = run_cli("mean --c 0.5 --t 2 --sweep lambda:0.25:4:25");
  t.check(sweep1.exit_code == 0 && sweep1.out == sweep2.out, 0.0,
          "sweep output is not reproducible");
  const CliRun verify = run_cli("verify --seed 20240817");
  t.check(verify.exit_code == 0, static_cast<double>(verify.exit_code),
          "verification subcommand did not exit cleanly");
  return t;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* label;
    double budget_seconds;
    std::function<Tally()> run;
  };
  const Criterion criteria[] = {
      {1, "geometry round trip and triangle identities", 1.0, &criterion_geometry},
      {2, "closed-form mean vs event-count mixture (125-point grid)", 5.0,
       &criterion_mixture},
      {3, "conditional means vs displays and quadrature oracle", 30.0,
       &criterion_conditional},
      {4, "closed forms satisfy their differential equations", 10.0, &criterion_ode},
      {5, "degenerate-cubic second moment and its roots", 5.0, &criterion_cubic},
      {6, "restart means, decomposition, fractional order", 10.0, &criterion_jumpback},
      {7, "spherical regimes and the high-rate limit", 5.0, &criterion_spherical},
      {8, "Monte Carlo seed battery (4 functionals x 100 seeds x 1e5 reps)", 60.0,
       &criterion_monte_carlo},
      {9, "radius lower bound: series, generating function, pathwise", 30.0,
       &criterion_radius_bound},
      {10, "command-line determinism and clean verification", 120.0, &criterion_cli},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Tally t;
    try {
      t = c.run();
    } catch (const std::exception& e) {
      t.failure = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds < c.budget_seconds;
    const bool pass = t.failure.empty() && in_budget;
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d: %s — %d checks, worst %.3g, %.2f s%s%s\n",
                pass ? "PASS" : "FAIL", c.number, c.label, t.checks, t.worst, seconds,
                t.failure.empty() ? "" : " — ",
                t.failure.empty()
                    ? (in_budget ? "" : " — exceeded runtime budget")
                    : t.failure.c_str());
  }
  std::printf("acceptance: %d of 10 criteria failing\n", failures);
  return failures;
}
