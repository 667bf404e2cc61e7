#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "geocompass/closed_form.hpp"
#include "geocompass/oracle.hpp"

using namespace geocompass;

namespace {

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace

TEST_CASE("iterated integrals match hand-reduced values") {
  // one interior node, cosh kernel: I_1(t) = (t/2)(cosh ct + sinh(ct)/c) at c=1
  const double i1 = nested_integral({Kernel::cosh_k, 1, 1.0, 1.0}).value;
  REQUIRE(rel_err(i1, 0.5 * (std::cosh(1.0) + std::sinh(1.0))) < 1e-12);

  // same reduction for the circular kernel: (t/2)(cos ct + sin(ct)/c)
  const double h1 = nested_integral({Kernel::cos_k, 1, 1.0, 1.0}).value;
  REQUIRE(rel_err(h1, 0.5 * (std::cos(1.0) + std::sin(1.0))) < 1e-12);

  // n = 0 needs no quadrature at all
  REQUIRE(nested_integral({Kernel::cosh_k, 0, 0.7, 1.3}).value ==
          Catch::Approx(std::cosh(0.91)).epsilon(1e-14));
  REQUIRE(nested_integral({Kernel::sinh_k, 0, 0.7, 1.3}).value ==
          Catch::Approx(std::sinh(0.91)).epsilon(1e-14));

  // squared kernels at n = 0
  REQUIRE(nested_integral({Kernel::cosh_squared, 0, 0.7, 1.3}).value ==
          Catch::Approx(std::pow(std::cosh(0.91), 2)).epsilon(1e-14));

  // the power kernel generalizes the squared one
  REQUIRE(nested_integral({Kernel::cosh_power, 1, 0.8, 1.1, 16, 2}).value ==
          Catch::Approx(nested_integral({Kernel::cosh_squared, 1, 0.8, 1.1}).value)
              .epsilon(1e-13));
}

TEST_CASE("quadrature oracle agrees with the series route for n <= 3") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    REQUIRE(rel_err(conditional_mean_oracle(Kernel::cosh_k, n, 0.9, 1.3),
                    conditional_mean_cosh(n, 0.9, 1.3)) < 1e-7);
    REQUIRE(rel_err(conditional_mean_oracle(Kernel::sinh_k, n, 0.9, 1.3),
                    radius_bound_series(n, 0.9, 1.3) * factorial(n) /
                        ipow(1.3, static_cast<unsigned>(n))) < 1e-7);
  }
}

TEST_CASE("iterated integration is symmetric under Fubini reordering") {
  // Two-node nested integral, written out as a raw double quadrature in both
  // integration orders; the library value must match both.
  const double c = 0.9, t = 1.4;
  const auto& rule = detail::gauss_legendre_rule(10);
  const int kPanels = 24;

  const auto integrate = [&](double lo, double hi, const auto& f) {
    const double width = (hi - lo) / kPanels;
    double acc = 0.0;
    for (int p = 0; p < kPanels; ++p) {
      const double mid = lo + (p + 0.5) * width;
      for (const auto& [node, weight] : rule)
        acc += 0.5 * width * weight * f(mid + 0.5 * width * node);
    }
    return acc;
  };

  // inner-first: for each first node u, integrate the second node v in (u, t)
  const double order_uv = integrate(0.0, t, [&](double u) {
    return std::cosh(c * u) * integrate(u, t, [&](double v) {
             return std::cosh(c * (v - u)) * std::cosh(c * (t - v));
           });
  });
  // outer-first: for each second node v, integrate the first node u in (0, v)
  const double order_vu = integrate(0.0, t, [&](double v) {
    return std::cosh(c * (t - v)) * integrate(0.0, v, [&](double u) {
             return std::cosh(c * u) * std::cosh(c * (v - u));
           });
  });
  REQUIRE(rel_err(order_uv, order_vu) < 1e-12);

  const double library = nested_integral({Kernel::cosh_k, 2, c, t}).value;
  REQUIRE(rel_err(library, order_uv) < 1e-10);
}

TEST_CASE("reported quadrature accuracy is honest under refinement") {
  const NestedIntegralSpec coarse{Kernel::cosh_k, 3, 1.1, 1.6, 16};
  const NestedIntegralSpec fine{Kernel::cosh_k, 3, 1.1, 1.6, 32};
  const QuadratureResult a = nested_integral(coarse);
  const QuadratureResult b = nested_integral(fine);
  REQUIRE(a.accuracy >= 0.0);
  // doubling panels moves the value by no more than the coarser error report
  REQUIRE(std::abs(a.value - b.value) <= std::max(a.accuracy, 1e-14));
  REQUIRE(b.accuracy <= std::max(a.accuracy, 1e-14));
}

TEST_CASE("difference-differential residuals vanish on the oracle sequences") {
  const std::vector<double> grid{0.8, 1.2, 1.6};
  for (int n : {1, 2}) {
    for (RecursionKind kind : {RecursionKind::I_rec, RecursionKind::J_rec,
                               RecursionKind::H_rec}) {
      const OracleResidual res =
          difference_differential_residual(kind, n, 0.9, grid);
      CAPTURE(static_cast<int>(kind), n);
      REQUIRE(res.max_residual < 1e-8);
      REQUIRE_FALSE(res.discretization_limited);
    }
    for (RecursionKind kind : {RecursionKind::U_rec, RecursionKind::V_rec}) {
      const OracleResidual res =
          difference_differential_residual(kind, n, 0.9, grid);
      CAPTURE(static_cast<int>(kind), n);
      REQUIRE(res.max_residual < 1e-4);
    }
  }
}

TEST_CASE("third-order residuals detect an under-resolved step") {
  const std::vector<double> grid{0.8, 1.2, 1.6};
  // At h = 1e-2 the third-derivative stencil's truncation error dominates the
  // squared-kernel recursions and the residual report must say so.
  const OracleResidual coarse =
      difference_differential_residual(RecursionKind::V_rec, 1, 0.9, grid, 1e-2);
  REQUIRE(coarse.max_residual > 1e-4);
  REQUIRE(coarse.discretization_limited);
  // the default step resolves it
  const OracleResidual fine =
      difference_differential_residual(RecursionKind::V_rec, 1, 0.9, grid);
  REQUIRE(fine.max_residual < 1e-4);
}

TEST_CASE("oracle input validation") {
  REQUIRE_THROWS_AS(nested_integral({Kernel::cosh_k, 5, 1.0, 1.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(nested_integral({Kernel::cosh_k, -1, 1.0, 1.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(nested_integral({Kernel::cosh_k, 2, 1.0, 1.0, 4}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(conditional_mean_oracle(Kernel::cosh_k, 1, 1.0, 0.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(nested_integral({Kernel::cosh_power, 1, 1.0, 1.0, 16, 0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(nested_integral({Kernel::cosh_power, 1, 1.0, 1.0, 16, 7}),
                    std::invalid_argument);
  // residual grid points must keep clear of the left endpoint
  REQUIRE_THROWS_AS(
      difference_differential_residual(RecursionKind::I_rec, 1, 1.0, {1e-4}),
      std::invalid_argument);
}
