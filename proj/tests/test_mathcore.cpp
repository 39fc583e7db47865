#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "kwidth/check.hpp"
#include "kwidth/mathcore.hpp"

using namespace kwidth;

namespace {

// 2F1 by its power series, |z| < 1.
double series_2f1(double a, double b, double c, double z) {
  double term = 1.0, sum = 1.0;
  for (int n = 0; n < 200000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

TEST(LogGamma, KnownValues) {
  EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-15);
  EXPECT_NEAR(log_gamma(5.0), std::log(24.0), 1e-14);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-15);
}

TEST(LogGamma, RelativeAccuracyAgainstProducts) {
  // Gamma(n + 1) = n! accumulated in log space.
  double lf = 0.0;
  for (int n = 1; n <= 170; ++n) {
    lf += std::log(static_cast<double>(n));
    EXPECT_NEAR(log_gamma(n + 1.0), lf, 1e-12 * std::max(1.0, lf)) << n;
  }
  // Recurrence Gamma(x+1) = x Gamma(x) across the tested range.
  for (double x : {1e-3, 0.37, 2.5, 17.25, 1e3, 1e6}) {
    const double lhs = log_gamma(x + 1.0);
    const double rhs = std::log(x) + log_gamma(x);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs))) << x;
  }
}

TEST(LogGamma, RejectsNonPositive) {
  EXPECT_THROW(log_gamma(0.0), DomainError);
  EXPECT_THROW(log_gamma(-1.5), DomainError);
}

TEST(SurfaceArea, Examples) {
  EXPECT_NEAR(surface_area(2), 2 * std::numbers::pi, 1e-13);
  EXPECT_NEAR(surface_area(3), 4 * std::numbers::pi, 1e-13);
  EXPECT_NEAR(surface_area(2) / surface_area(3), 0.5, 1e-15);
  EXPECT_NEAR(std::exp(log_density_norm(3)), surface_area(3) / surface_area(2), 1e-14);
}

TEST(Gauss2F1, Examples) {
  EXPECT_EQ(gauss_2f1(0.7, 1.3, 2.9, 0.0), 1.0);
  EXPECT_NEAR(gauss_2f1(1, 1, 2, 0.5), 2 * std::log(2.0), 1e-13);
  // 2F1(1/2, 1; 2; z) = 2 (1 - sqrt(1 - z)) / z
  const double oracle = 2 * (std::sqrt(2.0) - 1);
  EXPECT_NEAR(gauss_2f1(0.5, 1, 2, -1), oracle, 1e-10 * oracle);
}

TEST(Gauss2F1, MatchesSeriesInsideUnitDisk) {
  for (double p : {0.5, 1.0, 2.5, 7.0}) {
    for (double z : {-0.9, -0.3, 0.2, 0.6}) {
      const double q = 1.5, u = 4.0;
      const double oracle = series_2f1(p, q, u, z);
      EXPECT_NEAR(gauss_2f1(p, q, u, z), oracle, 1e-10 * std::abs(oracle)) << p << " " << z;
    }
  }
}

TEST(Gauss2F1, DomainErrors) {
  EXPECT_THROW(gauss_2f1(1, 0, 2, 0.1), DomainError);
  EXPECT_THROW(gauss_2f1(1, 2, 2, 0.1), DomainError);
  EXPECT_THROW(gauss_2f1(1, 1, 2, 1.0), DomainError);
}

TEST(Legendre, Examples) {
  const LegendreEvaluator<double> ev3(3, 4);
  EXPECT_EQ(legendre_eval(ev3, 1, 0.37), 0.37);
  EXPECT_NEAR(legendre_eval(ev3, 2, 0.5), -0.125, 1e-16);
  const LegendreEvaluator<double> ev7(7, 4);
  EXPECT_EQ(legendre_eval(ev7, 4, -0.3), legendre_eval(ev7, 4, 0.3));
  EXPECT_EQ(legendre_eval(ev7, 0, 0.2), 1.0);
}

TEST(Legendre, ExactlyOneAtOne) {
  for (int d : {2, 3, 5, 10, 50, 300}) {
    const LegendreEvaluator<double> ev(d, 200);
    std::vector<double> p(201);
    ev.fill(1.0, p);
    for (int k = 0; k <= 200; ++k) {
      EXPECT_EQ(ev(k, 1.0), 1.0);
      EXPECT_EQ(p[k], 1.0);
    }
  }
}

TEST(Legendre, Errors) {
  const LegendreEvaluator<double> ev(3, 5);
  EXPECT_THROW(ev(6, 0.1), DomainError);
  EXPECT_THROW(ev(-1, 0.1), DomainError);
  EXPECT_THROW(ev(2, 1.5), DomainError);
  EXPECT_THROW(LegendreEvaluator<double>(1, 3), DomainError);
}

TEST(Legendre, ChebyshevAtDimensionTwo) {
  const LegendreEvaluator<double> ev(2, 12);
  for (double t : {-0.9, -0.2, 0.3, 0.8}) {
    for (int k = 0; k <= 12; ++k) EXPECT_NEAR(ev(k, t), std::cos(k * std::acos(t)), 1e-13);
  }
}

TEST(Legendre, OrthogonalityRodriguesBounds) {
  EXPECT_TRUE(check::orthogonality({3, 5, 10, 20}, 30, 1e-10).passed);
  const auto r = check::rodrigues_crosscheck({3, 5}, 6, 1e-9);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_TRUE(check::legendre_bounded({3, 5, 10, 20}, 30).passed);
}

TEST(HarmonicDim, Examples) {
  for (int d : {2, 3, 7, 40}) {
    EXPECT_EQ(harmonic_dim(d, 0), 1u);
    EXPECT_EQ(harmonic_dim(d, 1), static_cast<std::uint64_t>(d));
  }
  for (int k = 0; k < 50; ++k) EXPECT_EQ(harmonic_dim(3, k), static_cast<std::uint64_t>(2 * k + 1));
  EXPECT_EQ(harmonic_dim(2, 9), 2u);
  EXPECT_EQ(harmonic_dim(4, 3), 16u);  // (k+1)^2
  EXPECT_EQ(harmonic_dim(10, 2), 54u);
}

TEST(HarmonicDim, CumulativeCountMatchesPolynomialDimension) {
  // sum_{j<=k} N(d,j) over j of one parity = binom(k+d-1, d-1) (homogeneous degree k).
  for (int d : {3, 5, 12}) {
    for (int k = 0; k < 30; ++k) {
      std::uint64_t sum = 0;
      for (int j = k % 2; j <= k; j += 2) sum += harmonic_dim(d, j);
      EXPECT_EQ(sum, detail::exact_binomial(k + d - 1, d - 1)) << d << " " << k;
    }
  }
}

TEST(HarmonicDim, OverflowIsExplicit) {
  EXPECT_THROW(harmonic_dim(200, 400), OverflowError);
  EXPECT_GT(log_harmonic_dim(200, 400), std::log(1.8e19));
}

TEST(GaussJacobi, Examples) {
  auto total = [](const QuadratureRule& r) {
    double s = 0;
    for (double w : r.weights) s += w;
    return s;
  };
  EXPECT_NEAR(total(gauss_jacobi(8, 3, false)), 2.0, 1e-14);
  EXPECT_NEAR(gauss_jacobi(8, 3, false).integrate([](double t) { return t * t; }), 2.0 / 3, 1e-14);
  EXPECT_NEAR(total(gauss_jacobi(8, 5, false)), 4.0 / 3, 1e-14);
  EXPECT_NEAR(total(gauss_jacobi(17, 40, true)), 1.0, 1e-12);
}

TEST(GaussJacobi, InvariantsAndExactness) {
  for (int d : {2, 3, 4, 9, 30}) {
    for (int n : {1, 2, 5, 33}) {
      const auto r = gauss_jacobi(n, d);
      for (int i = 0; i < n; ++i) {
        EXPECT_GT(r.weights[i], 0.0);
        if (i) EXPECT_GT(r.nodes[i], r.nodes[i - 1]);
      }
    }
  }
  EXPECT_TRUE(check::gauss_exactness({2, 3, 5, 10, 20}, 12, 1e-12).passed);
}

TEST(GaussJacobi, Errors) {
  EXPECT_THROW(gauss_jacobi(0, 3), DomainError);
  EXPECT_THROW(gauss_jacobi(4, 1), DomainError);
}

TEST(GaussLegendre, IntegratesPolynomials) {
  const GaussLegendre<double> gl(10);
  double s = 0;
  for (int i = 0; i < 10; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 18);
  EXPECT_NEAR(s, 2.0 / 19, 1e-15);
}

TEST(IntegrateWeighted, Examples) {
  const std::vector<double> none;
  const std::vector<double> zero{0.0};
  EXPECT_NEAR(integrate_weighted([](double) { return 1.0; }, 3, none, 8).value, 2.0, 1e-13);
  EXPECT_NEAR(integrate_weighted([](double t) { return t >= 0 ? 1.0 : 0.0; }, 3, zero, 8).value, 1.0, 1e-13);
  EXPECT_NEAR(integrate_weighted([](double t) { return std::abs(t); }, 3, zero, 8).value, 1.0, 1e-13);
}

TEST(IntegrateWeighted, ErrorEstimateCoversDoubling) {
  const std::vector<double> kink{-0.3};
  auto f = [](double t) { return std::max(0.0, 2 * t + 0.6) * std::exp(t); };
  for (int d : {3, 6, 21}) {
    const auto a = integrate_weighted(f, d, kink, 16);
    const auto b = integrate_weighted(f, d, kink, 2 * a.nodes);
    EXPECT_LE(std::abs(a.value - b.value), a.error_estimate + 1e-15) << d;
  }
  EXPECT_THROW(integrate_weighted(f, 3, std::vector<double>{0.5, 0.1}, 8), DomainError);
  EXPECT_THROW(integrate_weighted(f, 3, std::vector<double>{1.0}, 8), DomainError);
}

TEST(LegendreMoments, StepExactValues) {
  const std::vector<double> zero{0.0};
  const auto m = legendre_moments<double>([](double t) { return t >= 0 ? 1.0 : 0.0; }, 3, 3, zero, 32);
  EXPECT_NEAR(m[0], 0.5, 1e-15);
  EXPECT_NEAR(m[1], 0.25, 1e-15);
  EXPECT_NEAR(m[2], 0.0, 1e-15);
  EXPECT_NEAR(m[3], -1.0 / 16, 1e-15);
}

TEST(CompensatedSum, RecoversCancellation) {
  CompensatedSum<double> s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}
