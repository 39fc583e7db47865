#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "kwidth/check.hpp"
#include "kwidth/spectrum.hpp"

using namespace kwidth;

namespace {

const double pi = std::numbers::pi;

std::vector<std::uint64_t> range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (auto m = lo; m <= hi; ++m) out.push_back(m);
  return out;
}

}  // namespace

TEST(EtaK, Examples) {
  const auto step = ActivationSpec::step();
  EXPECT_NEAR(eta_k(step, 3, 0), 0.5, 1e-10);
  EXPECT_NEAR(eta_k(step, 3, 1), 0.25, 1e-10);
  EXPECT_NEAR(eta_k(step, 3, 3), -1.0 / 16, 1e-10);
  EXPECT_NEAR(eta_k(ActivationSpec::relu(1), 3, 3), 0.0, 1e-10);
  EXPECT_NEAR(eta_k(ActivationSpec::smooth(Kind::arctan), 3, 1), (pi / 2 - 1) / 2, 1e-10);
}

TEST(EtaK, Errors) {
  EXPECT_THROW(eta_k(ActivationSpec::step(), 1, 0), DomainError);
  EXPECT_THROW(eta_k(ActivationSpec::step(), 3, -1), DomainError);
}

// Funk-Hecke: kappa(t) = sum_k N(d, k) mu_k P_k(t) must reproduce the
// arc-cosine kernel of the ReLU.
TEST(EtaBatch, ReproducesArcCosineKernel) {
  for (int d : {3, 6}) {
    const int K = 400;
    const auto b = eta_batch(ActivationSpec::relu(1), d, K);
    const LegendreEvaluator<double> ev(d, K);
    for (double t : {-0.5, 0.0, 0.3, 0.9}) {
      CompensatedSum<double> s;
      for (int k = 0; k <= K; ++k) {
        s.add(static_cast<double>(harmonic_dim(d, k)) * b.eta[k] * b.eta[k] * ev(k, t));
      }
      EXPECT_NEAR(s.value(), closed_form_kappa(1, d, t), 1e-6) << d << " " << t;
    }
  }
}

TEST(MuReluAnalytic, Examples) {
  EXPECT_EQ(mu_relu_alpha_analytic(3, 2, 0), 0.0);
  EXPECT_EQ(mu_relu_alpha_analytic(3, 3, 1), 0.0);
  EXPECT_GT(mu_relu_alpha_analytic(3, 1, 0), 0.0);
  EXPECT_THROW(mu_relu_alpha_analytic(3, 1, 1), DomainError);
  EXPECT_THROW(mu_relu_alpha_analytic(3, 0, 0), DomainError);
  // Calibration against the quadrature value mu_1 = 1/16.
  EXPECT_NEAR((1.0 / 16) / mu_relu_alpha_analytic(3, 1, 0), 2.0, 1e-12);
}

TEST(MuReluAnalytic, ConstantRatio) {
  const auto r = check::relu_analytic_ratio({3, 10}, {0, 1, 2}, 40, 1e-6);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(EtaArctan, Examples) {
  EXPECT_NEAR(eta_arctan_hypergeometric(3, 1, 1.0), 0.5 * (pi / 2 - 1), 1e-8 * 0.2853982);
  for (int d : {3, 7, 20}) EXPECT_EQ(eta_arctan_hypergeometric(d, 4, 2.0), 0.0);
  const double q = eta_k(ActivationSpec::smooth(Kind::arctan, 2.0), 10, 5);
  EXPECT_NEAR(eta_arctan_hypergeometric(10, 5, 2.0), q, 1e-8 * std::abs(q));
  EXPECT_THROW(eta_arctan_hypergeometric(ActivationSpec::smooth(Kind::arctan, 1.0, 0.2), 3, 1), DomainError);
}

TEST(EtaArctan, AgreesWithQuadrature) {
  const auto r = check::arctan_route({3, 10}, {1.0, 4.0}, 11, 1e-8);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Trace, Examples) {
  for (int d : {2, 3, 17}) EXPECT_DOUBLE_EQ(kernel_trace(ActivationSpec::step(), d).value, 0.5);
  for (int d : {2, 3, 17}) EXPECT_NEAR(kernel_trace(ActivationSpec::relu(1), d).value, 1.0 / (2 * d), 1e-15);
  // Gamma(d/2) / (2 Gamma(d/2 + alpha)) agrees with the alpha = 1 value d/2 * ... only at alpha = 1;
  // the general closed form is confirmed by quadrature.
  for (int alpha : {2, 3}) {
    for (int d : {3, 10}) {
      const auto s = ActivationSpec::relu(alpha, 1.3);
      EXPECT_NEAR(*closed_form_trace(s, d), quadrature_trace(s, d), 1e-13 * quadrature_trace(s, d));
    }
  }
  EXPECT_EQ(kernel_trace(ActivationSpec::smooth(Kind::sin), 5).method, TraceMethod::quadrature);
}

TEST(Trace, MonteCarloCrossCheck) {
  const auto s = ActivationSpec::smooth(Kind::sigmoid, 2.0, -0.4);
  const auto est = kernel_trace(s, 7, 100000, 5);
  EXPECT_NEAR(est.mc_value, est.value, 5 * est.mc_stderr);
}

TEST(Trace, IdentitiesAndConsistency) {
  const auto a = check::trace_identities({2, 3, 5, 10, 50}, 1e-12, 1.0);
  EXPECT_TRUE(a.passed) << a.detail;
  const auto b = check::trace_consistency({3, 10});
  EXPECT_TRUE(b.passed) << b.detail;
  const auto c = check::low_degree_mu();
  EXPECT_TRUE(c.passed) << c.detail;
}

TEST(BuildSpectrum, StepExample) {
  const auto ks = build_spectrum(ActivationSpec::step(), 3, 4);
  ASSERT_GE(ks.max_degree(), 3);
  EXPECT_NEAR(ks.mu[0], 0.25, 1e-14);
  EXPECT_NEAR(ks.mu[1], 1.0 / 16, 1e-14);
  EXPECT_LE(ks.mu[2], 1e-18);
  EXPECT_NEAR(ks.mu[3], 1.0 / 256, 1e-14);
  for (int k = 0; k <= ks.max_degree(); ++k) EXPECT_EQ(ks.mult[k], static_cast<std::uint64_t>(2 * k + 1));
  EXPECT_EQ(ks.trace, 0.5);
  EXPECT_GE(ks.residual, -1e-8);
}

TEST(BuildSpectrum, ReluExample) {
  const auto ks = build_spectrum(ActivationSpec::relu(1), 3, 4);
  EXPECT_NEAR(ks.mu[0], 1.0 / 16, 1e-14);
  EXPECT_NEAR(ks.mu[1], 1.0 / 36, 1e-14);
  EXPECT_NEAR(ks.mu[2], 1.0 / 256, 1e-14);
}

TEST(BuildSpectrum, TailSafetyRecorded) {
  const auto ks = build_spectrum(ActivationSpec::smooth(Kind::sigmoid), 5, 200);
  EXPECT_GE(ks.expanded_count(), 200u);
  const double tail = std::max({ks.mu[ks.max_degree()], ks.mu[ks.max_degree() - 1], ks.mu[ks.max_degree() - 2]});
  EXPECT_LE(tail, std::max(ks.tail_ratio * ks.selected_threshold, ks.noise_floor));
  EXPECT_EQ(ks.degree_cap, 2000);
  EXPECT_DOUBLE_EQ(ks.tail_ratio, 1e-3);
}

TEST(BuildSpectrum, Errors) {
  EXPECT_THROW(build_spectrum(ActivationSpec::step(), 3, 0), DomainError);
  SpectrumOptions opts;
  opts.degree_cap = 10;
  EXPECT_THROW(build_spectrum(ActivationSpec::step(), 3, 10000, opts), ResourceError);
}

TEST(BuildSpectrum, ParityZeros) {
  const auto ks = build_spectrum(ActivationSpec::smooth(Kind::sin), 7, 100);
  for (int k = 0; k <= ks.max_degree(); k += 2) EXPECT_LE(ks.mu[k], 1e-18) << k;
  const auto r = check::parity_zeros({3, 10}, 30);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(TraceDecay, StepExamples) {
  const auto ks = build_spectrum(ActivationSpec::step(), 3, 4);
  const auto td = trace_decay(ks, {0, 1, 4});
  EXPECT_DOUBLE_EQ(td.lambda_values[0], 0.5);
  EXPECT_NEAR(td.lambda_values[1], 0.25, 1e-13);
  EXPECT_NEAR(td.lambda_values[2], 1.0 / 16, 1e-13);
}

TEST(TraceDecay, ReluExample) {
  const auto ks = build_spectrum(ActivationSpec::relu(1), 3, 4);
  const auto td = trace_decay(ks, {0, 1});
  EXPECT_NEAR(td.lambda_values[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(td.lambda_values[1], 5.0 / 48, 1e-13);
}

TEST(TraceDecay, IncrementsReproduceSortedEigenvalues) {
  const auto ks = build_spectrum(ActivationSpec::smooth(Kind::arctan, 2.0, 0.5), 4, 300);
  const auto ms = range(0, 300);
  const auto td = trace_decay(ks, ms);
  const auto eig = expanded_eigenvalues(ks, 300);
  EXPECT_DOUBLE_EQ(td.lambda_values[0], ks.trace);
  for (std::size_t i = 1; i < ms.size(); ++i) {
    EXPECT_LE(td.lambda_values[i], td.lambda_values[i - 1]);
    EXPECT_NEAR(td.lambda_values[i - 1] - td.lambda_values[i], eig[i - 1], 1e-14);
    if (i > 1) EXPECT_LE(eig[i - 1], eig[i - 2]);
  }
}

TEST(TraceDecay, Errors) {
  const auto ks = build_spectrum(ActivationSpec::step(), 3, 4);
  EXPECT_THROW(trace_decay(ks, {5, 3}), DomainError);
  EXPECT_THROW(trace_decay(ks, {ks.expanded_count() + 1}), StaleSpectrumError);
}

TEST(TraceDecay, ReluScaling) {
  const auto r = check::relu_scaling(5, 2000);
  EXPECT_TRUE(r.passed) << r.detail;
  const auto p = check::decay_properties({3, 10}, 1000);
  EXPECT_TRUE(p.passed) << p.detail;
}

TEST(ScaleBiasGrid, Shape) {
  const auto g = scale_bias_grid(2.0, 4);
  EXPECT_EQ(g.front(), (ScaleBias{2.0, 0.0}));
  for (const auto& p : g) {
    EXPECT_GT(p.gamma, 0.0);
    EXPECT_LE(p.gamma + std::abs(p.bias), 2.0 + 1e-15);
  }
  EXPECT_EQ(g.size(), 1u + 3u * 9u);
  EXPECT_THROW(scale_bias_grid(0.0, 4), DomainError);
}

TEST(SupTraceDecay, ReluHomogeneityAndDominance) {
  const std::vector<std::uint64_t> ms{0, 1, 10, 100};
  const auto sup = sup_trace_decay(Kind::relu_alpha, 1, 3.0, 5, 3, ms);
  const auto base = trace_decay(build_spectrum(ActivationSpec::relu(1), 5, 100), ms);
  const auto at_r = trace_decay(build_spectrum(ActivationSpec::relu(1, 3.0), 5, 100), ms);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    EXPECT_NEAR(at_r.lambda_values[i], 9.0 * base.lambda_values[i], 1e-10 * at_r.lambda_values[i]);
    EXPECT_GE(sup.sup_curve[i], at_r.lambda_values[i]);
  }
  // With a bias the m = 0 supremum sits off (r, 0): relu(b)^2 can exceed the unbiased trace.
  EXPECT_GT(sup.sup_curve[0], at_r.lambda_values[0]);
  const auto r = check::sup_properties(5, 2.0, 3, 200);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(FourierOracle, Examples) {
  // cos(cos th) = J0(1) + 2 sum (-1)^j J_{2j}(1) cos(2j th)
  const auto c = fourier_coefficients_d2(ActivationSpec::smooth(Kind::cos), 6, 1024);
  EXPECT_NEAR(c[0], std::cyl_bessel_j(0.0, 1.0), 1e-14);
  EXPECT_NEAR(c[2], -std::cyl_bessel_j(2.0, 1.0), 1e-14);
  EXPECT_NEAR(c[1], 0.0, 1e-15);
  const auto a = fourier_oracle_d2(ActivationSpec::smooth(Kind::arctan, 2.0), 20, 4096);
  for (int k = 0; k <= 20; k += 2) EXPECT_LE(a[k], 1e-28);
  EXPECT_THROW(fourier_oracle_d2(ActivationSpec::step(), 40, 100), DomainError);
}

TEST(FourierOracle, MatchesQuadrature) {
  const auto r = check::oracle_d2(20, 1 << 20, 1e-8);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(CurveHelpers, LogSpacedAndSlope) {
  const auto ms = log_spaced_m(1000, 10);
  EXPECT_EQ(ms.front(), 0u);
  EXPECT_EQ(ms.back(), 1000u);
  for (std::size_t i = 1; i < ms.size(); ++i) EXPECT_GT(ms[i], ms[i - 1]);
  std::vector<double> v;
  for (auto m : ms) v.push_back(m == 0 ? 1.0 : 3.0 / std::pow(static_cast<double>(m), 0.75));
  EXPECT_NEAR(loglog_slope(ms, v, 1, 1000), -0.75, 1e-12);
  EXPECT_NEAR(top_decade_slope(ms, v), -0.75, 1e-12);
}

TEST(SmoothDerivativeForm, MatchesDirectRoute) {
  const auto r = check::smooth_derivative_form(5, 12);
  EXPECT_TRUE(r.passed) << r.detail;
}
