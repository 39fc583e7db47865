#pragma once

// Invariant suite. Every check is a named, parameterized function returning a
// pass/fail verdict with a one-line detail; the CLI runs a reduced-scale
// profile and the acceptance binary runs the full-scale one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "kwidth/activation.hpp"
#include "kwidth/bounds.hpp"
#include "kwidth/experiment.hpp"
#include "kwidth/mathcore.hpp"
#include "kwidth/spectrum.hpp"

namespace kwidth::check {

using quad = boost::multiprecision::cpp_bin_float_quad;

struct Result {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Accumulates the worst case seen across a check.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && first_failure_.empty()) first_failure_ = what;
    passed_ = passed_ && ok;
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  bool passed() const { return passed_; }
  std::string detail() const {
    if (passed_) return notes_;
    return "FAILED at " + first_failure_ + (notes_.empty() ? "" : " | " + notes_);
  }

 private:
  bool passed_ = true;
  std::string first_failure_;
  std::string notes_;
};

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

template <class F>
Result timed(const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Result r;
  r.name = name;
  try {
    Verdict v;
    body(v);
    r.passed = v.passed();
    r.detail = v.detail();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------------------
// mathcore
// ---------------------------------------------------------------------------

/// int P_j P_k (1 - t^2)^{(d-3)/2} dt against delta_jk (omega_{d-1}/omega_{d-2}) / N(d,k).
inline Result orthogonality(const std::vector<int>& dims, int K, double tol) {
  return timed("orthogonality", [&](Verdict& v) {
    double worst = 0.0;
    for (int d : dims) {
      const auto rule = gauss_jacobi(K + 2, d, false);
      const LegendreEvaluator<double> ev(d, K);
      const double ratio = surface_area(d) / surface_area(d - 1);
      std::vector<std::vector<double>> p(rule.size(), std::vector<double>(K + 1));
      for (std::size_t i = 0; i < rule.size(); ++i) ev.fill(rule.nodes[i], p[i]);
      for (int j = 0; j <= K; ++j) {
        for (int k = j; k <= K; ++k) {
          CompensatedSum<double> acc;
          for (std::size_t i = 0; i < rule.size(); ++i) acc.add(rule.weights[i] * p[i][j] * p[i][k]);
          const double expect = j == k ? ratio / static_cast<double>(harmonic_dim(d, k)) : 0.0;
          const double err = std::abs(acc.value() - expect);
          worst = std::max(worst, err);
          v.require(err <= tol, "d=" + std::to_string(d) + " j=" + std::to_string(j) +
                                    " k=" + std::to_string(k) + " err=" + fmt(err));
        }
      }
    }
    v.note("max abs err " + fmt(worst, 3));
  });
}

/// Rodrigues form (-1/2)^k Gamma((d-1)/2)/Gamma(k+(d-1)/2) (1-t^2)^{(3-d)/2}
/// D^k (1-t^2)^{k+(d-3)/2}, for odd d where the inner power is a polynomial.
inline double rodrigues(int d, int k, double t) {
  if (d % 2 == 0) throw DomainError("rodrigues: odd d only");
  const int e = (d - 3) / 2;
  const int N = k + e;
  std::vector<double> c(2 * N + 1, 0.0);  // (1 - t^2)^N
  for (int i = 0; i <= N; ++i) {
    c[2 * i] = (i % 2 ? -1.0 : 1.0) * std::exp(log_binomial(N, i));
  }
  for (int r = 0; r < k; ++r) {
    for (std::size_t j = 0; j + 1 < c.size(); ++j) c[j] = c[j + 1] * static_cast<double>(j + 1);
    c.back() = 0.0;
  }
  double val = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) val = val * t + c[j];
  const double pref = std::pow(-0.5, k) * std::exp(log_gamma(0.5 * (d - 1)) - log_gamma(k + 0.5 * (d - 1)));
  return pref * val / std::pow(1.0 - t * t, e);
}

inline Result rodrigues_crosscheck(const std::vector<int>& dims, int K, double tol) {
  return timed("rodrigues", [&](Verdict& v) {
    double worst = 0.0;
    for (int d : dims) {
      const LegendreEvaluator<double> ev(d, K);
      for (int k = 0; k <= K; ++k) {
        for (int i = 0; i < 20; ++i) {
          const double t = -0.95 + 1.9 * i / 19.0;
          const double err = std::abs(ev(k, t) - rodrigues(d, k, t));
          worst = std::max(worst, err);
          v.require(err <= tol, "d=" + std::to_string(d) + " k=" + std::to_string(k) + " t=" + fmt(t));
        }
      }
    }
    v.note("max abs err " + fmt(worst, 3));
  });
}

/// Monomials t^j, j <= 2n - 1, against B((j+1)/2, e+1).
inline Result gauss_exactness(const std::vector<int>& dims, int n, double tol) {
  return timed("gauss_exactness", [&](Verdict& v) {
    double worst = 0.0;
    for (int d : dims) {
      const auto rule = gauss_jacobi(n, d, false);
      const double e = 0.5 * (d - 3);
      for (int j = 0; j <= 2 * n - 1; ++j) {
        const double expect = j % 2 ? 0.0 : std::exp(log_beta(0.5 * (j + 1), e + 1.0));
        const double got = rule.integrate([&](double t) { return std::pow(t, j); });
        const double err = std::abs(got - expect) / std::max(1.0, std::abs(expect));
        worst = std::max(worst, err);
        v.require(err <= tol, "d=" + std::to_string(d) + " j=" + std::to_string(j));
      }
      const auto normalized = gauss_jacobi(n, d, true);
      CompensatedSum<double> total;
      for (double w : normalized.weights) total.add(w);
      v.require(std::abs(total.value() - 1.0) <= 1e-12, "normalized mass d=" + std::to_string(d));
    }
    v.note("max rel err " + fmt(worst, 3));
  });
}

inline Result legendre_bounded(const std::vector<int>& dims, int K) {
  return timed("legendre_bounded", [&](Verdict& v) {
    for (int d : dims) {
      const LegendreEvaluator<double> ev(d, K);
      std::vector<double> p(K + 1);
      for (int i = 0; i <= 400; ++i) {
        const double t = -1.0 + 2.0 * i / 400.0;
        ev.fill(t, p);
        for (int k = 0; k <= K; ++k) {
          v.require(std::abs(p[k]) <= 1.0 + 1e-12, "d=" + std::to_string(d) + " k=" + std::to_string(k));
          v.require(std::abs(ev(k, -t) - (k % 2 ? -1.0 : 1.0) * p[k]) <= 1e-12, "parity");
        }
      }
      v.require(ev(K, 1.0) == 1.0, "P_K(1) = 1 at d=" + std::to_string(d));
    }
  });
}

// ---------------------------------------------------------------------------
// activation
// ---------------------------------------------------------------------------

inline Result kappa_monotone() {
  return timed("kappa_monotone", [](Verdict& v) {
    for (int a : {0, 1}) {
      for (int d : {2, 3, 10}) {
        double prev = closed_form_kappa(a, d, -1.0);
        for (int i = 1; i <= 1000; ++i) {
          const double cur = closed_form_kappa(a, d, -1.0 + 2.0 * i / 1000.0);
          v.require(cur >= prev - 1e-15, "alpha=" + std::to_string(a) + " d=" + std::to_string(d));
          prev = cur;
        }
      }
    }
  });
}

/// Flipping the step value at exactly 0 changes no eta_k beyond quadrature tolerance.
inline Result step_convention(int d, int K) {
  return timed("step_convention", [&](Verdict& v) {
    const auto spec = ActivationSpec::step();
    const auto kinks = kink_points(spec);
    auto closed = [](double t) { return t >= 0.0 ? 1.0 : 0.0; };
    auto open = [](double t) { return t > 0.0 ? 1.0 : 0.0; };
    const auto a = legendre_moments<double>(closed, d, K, kinks, 2 * K + 64);
    const auto b = legendre_moments<double>(open, d, K, kinks, 2 * K + 64);
    double worst = 0.0;
    for (int k = 0; k <= K; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    v.require(worst <= 1e-14, "max diff " + fmt(worst));
    v.note("max diff " + fmt(worst, 3));
  });
}

inline Result activation_bounded() {
  return timed("activation_bounded", [](Verdict& v) {
    for (Kind k : {Kind::step, Kind::relu_alpha, Kind::sigmoid, Kind::arctan, Kind::softplus, Kind::silu,
                   Kind::sin, Kind::cos}) {
      const ActivationSpec s(k, k == Kind::relu_alpha ? 2 : 0, 3.0, -0.5);
      double prev = eval<double>(s, -1.0);
      for (int i = 1; i <= 2000; ++i) {
        const double cur = eval<double>(s, -1.0 + i / 1000.0);
        v.require(std::isfinite(cur) && std::abs(cur) < 1e6, std::string(kind_name(k)) + " bounded");
        if (!is_nonsmooth(k)) v.require(std::abs(cur - prev) < 0.05, std::string(kind_name(k)) + " continuity");
        prev = cur;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

/// kappa(1) = 1/2 (step) and 1/(2d) (ReLU) by the reported route and by
/// quadrature, each under `max_seconds`.
inline Result trace_identities(const std::vector<int>& dims, double tol, double max_seconds) {
  return timed("trace_identities", [&](Verdict& v) {
    double worst_err = 0.0, worst_secs = 0.0;
    for (int d : dims) {
      for (int a : {0, 1}) {
        const auto spec = a == 0 ? ActivationSpec::step() : ActivationSpec::relu(1);
        const double expect = a == 0 ? 0.5 : 0.5 / d;
        const auto t0 = std::chrono::steady_clock::now();
        const auto est = kernel_trace(spec, d);
        const double quad_value = quadrature_trace(spec, d);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string tag = std::string(a == 0 ? "step" : "relu") + " d=" + std::to_string(d);
        v.require(std::abs(est.value - expect) <= tol, tag + " trace " + fmt(est.value, 17));
        v.require(std::abs(quad_value - expect) <= tol, tag + " quadrature " + fmt(quad_value, 17));
        v.require(secs < max_seconds, tag + " runtime " + fmt(secs));
        worst_err = std::max({worst_err, std::abs(est.value - expect), std::abs(quad_value - expect)});
        worst_secs = std::max(worst_secs, secs);
      }
    }
    v.note("max abs err " + fmt(worst_err, 3) + ", slowest " + fmt(worst_secs, 3) + " s");
  });
}

inline Result low_degree_mu() {
  return timed("low_degree_mu", [](Verdict& v) {
    const auto st = build_spectrum(ActivationSpec::step(), 3, 4);
    const auto re = build_spectrum(ActivationSpec::relu(1), 3, 4);
    auto near = [&](double got, double want, const std::string& tag) {
      v.require(std::abs(got - want) <= 1e-10, tag + " = " + fmt(got, 17));
    };
    near(st.mu[0], 0.25, "step mu_0");
    near(st.mu[1], 1.0 / 16, "step mu_1");
    v.require(st.mu[2] <= 1e-12, "step mu_2 = " + fmt(st.mu[2]));
    near(st.mu[3], 1.0 / 256, "step mu_3");
    near(re.mu[0], 1.0 / 16, "relu mu_0");
    near(re.mu[1], 1.0 / 36, "relu mu_1");
    near(re.mu[2], 1.0 / 256, "relu mu_2");
    v.require(re.mu[3] <= 1e-12, "relu mu_3 = " + fmt(re.mu[3]));
  });
}

inline std::vector<ActivationSpec> trace_probe_specs() {
  return {ActivationSpec::step(),
          ActivationSpec::relu(1),
          ActivationSpec::relu(2, 1.5, 0.3),
          ActivationSpec::smooth(Kind::sigmoid, 2.0, -0.5),
          ActivationSpec::smooth(Kind::arctan, 1.0),
          ActivationSpec::smooth(Kind::softplus),
          ActivationSpec::smooth(Kind::silu, 1.0, 0.25),
          ActivationSpec::smooth(Kind::sin),
          ActivationSpec::smooth(Kind::cos)};
}

/// Residual kappa(1) - sum_{k<=K} N mu_k stays >= -1e-8 and shrinks with K.
inline Result trace_consistency(const std::vector<int>& dims) {
  return timed("trace_consistency", [&](Verdict& v) {
    for (int d : dims) {
      for (const auto& spec : trace_probe_specs()) {
        const double trace = kernel_trace(spec, d).value;
        const auto eta = eta_batch<double>(spec, d, 40, std::sqrt(trace)).eta;
        CompensatedSum<double> partial;
        double prev = trace;
        for (int k = 0; k <= 40; ++k) {
          partial.add(static_cast<double>(harmonic_dim(d, k)) * eta[k] * eta[k]);
          const double resid = trace - partial.value();
          const std::string tag = spec.to_string() + " d=" + std::to_string(d) + " K=" + std::to_string(k);
          v.require(resid >= -1e-8, tag + " residual " + fmt(resid));
          v.require(resid <= prev + 1e-14, tag + " residual grew");
          prev = resid;
        }
      }
    }
  });
}

inline Result parity_zeros(const std::vector<int>& dims, int K) {
  return timed("parity_zeros", [&](Verdict& v) {
    for (int d : dims) {
      for (Kind k : {Kind::arctan, Kind::sin}) {
        const auto spec = ActivationSpec::smooth(k, 1.5);
        const auto eta = eta_batch<double>(spec, d, K).eta;
        for (int j = 0; j <= K; j += 2) {
          v.require(eta[j] * eta[j] <= 1e-18, std::string(kind_name(k)) + " d=" + std::to_string(d) +
                                                  " k=" + std::to_string(j));
        }
      }
      const auto eta = eta_batch<double>(ActivationSpec::step(), d, K).eta;
      for (int j = 2; j <= K; j += 2) {
        v.require(eta[j] * eta[j] <= 1e-18, "step d=" + std::to_string(d) + " k=" + std::to_string(j));
      }
      const auto c = eta_batch<double>(ActivationSpec::smooth(Kind::cos, 1.5), d, K).eta;
      for (int j = 1; j <= K; j += 2) {
        v.require(c[j] * c[j] <= 1e-18, "cos d=" + std::to_string(d) + " k=" + std::to_string(j));
      }
    }
  });
}

/// Fourier route against the Legendre route on the circle.
inline Result oracle_d2(int K, int n_grid, double tol) {
  return timed("oracle_d2", [&](Verdict& v) {
    double worst = 0.0;
    for (const auto& spec : {ActivationSpec::step(), ActivationSpec::relu(1), ActivationSpec::smooth(Kind::arctan),
                             ActivationSpec::smooth(Kind::sigmoid)}) {
      const auto fourier = fourier_oracle_d2(spec, K, n_grid);
      const auto eta = eta_batch<double>(spec, 2, K).eta;
      for (int k = 0; k <= K; ++k) {
        const double mu = eta[k] * eta[k];
        if (mu <= 1e-12) continue;
        const double err = rel_diff(fourier[k], mu);
        worst = std::max(worst, err);
        v.require(err <= tol, spec.to_string() + " k=" + std::to_string(k) + " rel " + fmt(err));
      }
    }
    v.note("max rel diff " + fmt(worst, 3));
  });
}

/// Hypergeometric route against quadrature carried out in 113-bit precision:
/// at gamma = 1 the high-degree eta_k sit far below double rounding of the
/// oscillating integrand.
inline Result arctan_route(const std::vector<int>& dims, const std::vector<double>& gammas, int K, double tol) {
  return timed("arctan_route", [&](Verdict& v) {
    double worst = 0.0;
    for (int d : dims) {
      for (double g : gammas) {
        const auto spec = ActivationSpec::smooth(Kind::arctan, g);
        const auto eta = eta_batch<quad>(spec, d, K, std::sqrt(kernel_trace(spec, d).value)).eta;
        for (int k = 1; k <= K; k += 2) {
          const double hyp = eta_arctan_hypergeometric(d, k, g);
          const double err = rel_diff(hyp, static_cast<double>(eta[k]));
          worst = std::max(worst, err);
          v.require(err <= tol, "d=" + std::to_string(d) + " gamma=" + fmt(g) + " k=" + std::to_string(k) +
                                    " rel " + fmt(err));
        }
      }
    }
    v.note("max rel diff " + fmt(worst, 3));
  });
}

/// Ratio quadrature mu_k / analytic mu_k over contributing degrees.
inline double relu_ratio_cv(int d, int alpha, int K, double* mean_out = nullptr) {
  const auto spec = ActivationSpec::relu(alpha);
  const auto eta = eta_batch<double>(spec, d, K).eta;
  std::vector<double> ratios;
  for (int k = alpha + 1; k <= K; ++k) {
    if ((k - alpha) % 2 == 0) continue;
    const double mu = eta[k] * eta[k];
    if (mu < 1e-18) continue;
    ratios.push_back(mu / mu_relu_alpha_analytic(d, k, alpha));
  }
  if (ratios.size() < 2) throw NumericError("relu_ratio_cv: fewer than two contributing degrees");
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= static_cast<double>(ratios.size() - 1);
  if (mean_out) *mean_out = mean;
  return std::sqrt(var) / mean;
}

inline Result relu_analytic_ratio(const std::vector<int>& dims, const std::vector<int>& alphas, int K, double tol) {
  return timed("relu_analytic_ratio", [&](Verdict& v) {
    for (int d : dims) {
      for (int a : alphas) {
        double mean = 0.0;
        const double cv = relu_ratio_cv(d, a, K, &mean);
        v.require(cv <= tol, "d=" + std::to_string(d) + " alpha=" + std::to_string(a) + " cv " + fmt(cv));
        v.note("d=" + std::to_string(d) + ",a=" + std::to_string(a) + ": ratio " + fmt(mean, 10) + " cv " +
               fmt(cv, 2));
      }
    }
  });
}

/// Lambda at gamma = c equals c^2 Lambda at gamma = 1 for ReLU.
inline Result relu_scaling(int d, std::uint64_t m_max) {
  return timed("relu_scaling", [&](Verdict& v) {
    const auto ms = log_spaced_m(m_max, 10);
    const auto base = trace_decay(build_spectrum(ActivationSpec::relu(1), d, m_max), ms);
    for (double c : {0.5, 2.0, 3.0}) {
      const auto scaled = trace_decay(build_spectrum(ActivationSpec::relu(1, c), d, m_max), ms);
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const double want = c * c * base.lambda_values[i];
        v.require(rel_diff(scaled.lambda_values[i], want) <= 1e-10,
                  "c=" + fmt(c) + " m=" + std::to_string(ms[i]) + " rel " +
                      fmt(rel_diff(scaled.lambda_values[i], want)));
      }
    }
  });
}

/// Lambda(0) = trace, non-increasing, non-negative, increments equal the
/// sorted expanded eigenvalues.
inline Result decay_properties(const std::vector<int>& dims, std::uint64_t m_max) {
  return timed("decay_properties", [&](Verdict& v) {
    for (int d : dims) {
      for (const auto& spec : trace_probe_specs()) {
        const auto ks = build_spectrum(spec, d, m_max);
        std::vector<std::uint64_t> all(m_max + 1);
        std::iota(all.begin(), all.end(), std::uint64_t{0});
        const auto td = trace_decay(ks, all);
        const auto lam = expanded_eigenvalues(ks, m_max);
        const std::string tag = spec.to_string() + " d=" + std::to_string(d);
        v.require(td.lambda_values[0] >= ks.trace - 1e-15 && td.lambda_values[0] <= ks.trace + 1e-12,
                  tag + " Lambda(0)");
        for (std::uint64_t m = 1; m <= m_max; ++m) {
          const double inc = td.lambda_values[m - 1] - td.lambda_values[m];
          v.require(td.lambda_values[m] >= 0.0, tag + " negative");
          v.require(td.lambda_values[m] <= td.lambda_values[m - 1], tag + " increasing");
          v.require(std::abs(inc - lam[m - 1]) <= 1e-14 * std::max(1.0, ks.trace),
                    tag + " increment m=" + std::to_string(m));
        }
      }
    }
  });
}

/// Sup over the grid dominates every member; for ReLU it is r^2 times the
/// unit-scale curve at every m >= 1.
inline Result sup_properties(int d, double r, int grid, std::uint64_t m_max) {
  return timed("sup_properties", [&](Verdict& v) {
    const auto ms = log_spaced_m(m_max, 10);
    for (Kind k : {Kind::relu_alpha, Kind::arctan}) {
      const auto sup = sup_trace_decay(k, k == Kind::relu_alpha ? 1 : 0, r, d, grid, ms);
      for (std::size_t g = 0; g < sup.grid.size(); ++g) {
        v.require(sup.grid[g].gamma > 0.0 && sup.grid[g].gamma + std::abs(sup.grid[g].bias) <= r * (1 + 1e-15),
                  "grid point outside the r-ball");
        for (std::size_t i = 0; i < ms.size(); ++i) {
          // Same 1e-12 relative tie rule as the argmax selection.
          v.require(sup.sup_curve[i] * (1 + 1e-12) >= sup.per_point[g].lambda_values[i], "sup below a member");
        }
      }
      if (k == Kind::relu_alpha) {
        // (r, 0) is on the grid, so the sup dominates r^2 times the unit-scale
        // curve; biased points may exceed it.
        const auto base = trace_decay(build_spectrum(ActivationSpec::relu(1), d, ms.back()), ms);
        std::size_t equal = 0;
        for (std::size_t i = 0; i < ms.size(); ++i) {
          const double scaled = r * r * base.lambda_values[i];
          v.require(sup.sup_curve[i] >= scaled * (1 - 1e-12), "relu sup below r^2 base at m=" + std::to_string(ms[i]));
          equal += rel_diff(sup.sup_curve[i], scaled) <= 1e-9 ? 1 : 0;
        }
        v.note("relu: sup equals r^2 base at " + std::to_string(equal) + "/" + std::to_string(ms.size()) +
               " m values");
      }
      std::size_t off = 0;
      for (std::size_t i = 0; i < ms.size(); ++i) off += sup.argmax_is_r0(i) ? 0 : 1;
      v.note(std::string(kind_name(k)) + ": argmax off (r,0) at " + std::to_string(off) + "/" +
             std::to_string(ms.size()) + " m values");
    }
    const auto one = scale_bias_grid(r, 1);
    v.require(one.size() == 1 && one[0] == ScaleBias{r, 0.0}, "grid_size=1 is the single point (r,0)");
  });
}

/// Circle: Parseval average error with the m leading Fourier modes equals Lambda(m).
inline Result harmonic_average(const std::vector<int>& m_values, int n_grid, double tol) {
  return timed("harmonic_average", [&](Verdict& v) {
    for (const auto& spec : {ActivationSpec::step(), ActivationSpec::relu(1), ActivationSpec::smooth(Kind::arctan)}) {
      const int K = *std::max_element(m_values.begin(), m_values.end()) + 8;
      const auto eta = eta_batch<double>(spec, 2, K).eta;
      const double trace = kernel_trace(spec, 2).value;
      KernelSpectrum ks;
      ks.dimension = 2;
      ks.spec = spec;
      ks.trace = trace;
      CompensatedSum<double> partial;
      for (int k = 0; k <= K; ++k) {
        ks.mu.push_back(eta[k] * eta[k]);
        ks.mult.push_back(harmonic_dim(2, k));
        partial.add(static_cast<double>(ks.mult.back()) * ks.mu.back());
      }
      ks.residual = trace - partial.value();
      std::vector<std::uint64_t> ms(m_values.begin(), m_values.end());
      std::sort(ms.begin(), ms.end());
      const auto td = trace_decay(ks, ms);
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const double h = harmonic_average_error(2, spec, static_cast<int>(ms[i]), n_grid);
        const double err = std::abs(h - td.lambda_values[i]);
        v.require(err <= tol, spec.to_string() + " m=" + std::to_string(ms[i]) + " diff " + fmt(err));
      }
    }
  });
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

/// Step: Lambda(m) >= (1/d) m^{-1/(d-1)} for 1 <= m <= min(2^d, m_cap).
inline Result prop4_lower(const std::vector<int>& dims, std::uint64_t m_cap) {
  return timed("prop4_lower", [&](Verdict& v) {
    for (int d : dims) {
      const std::uint64_t m_top = std::min<std::uint64_t>(m_cap, std::uint64_t{1} << std::min(d, 62));
      const auto ks = build_spectrum(ActivationSpec::step(), d, m_top);
      std::vector<std::uint64_t> ms;
      for (auto m : log_spaced_m(m_top, 40)) {
        if (m >= 1) ms.push_back(m);
      }
      for (std::uint64_t m = 1; m <= std::min<std::uint64_t>(m_top, 64); ++m) ms.push_back(m);
      std::sort(ms.begin(), ms.end());
      ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
      const auto td = trace_decay(ks, ms);
      const auto bound = relu_alpha_lower(d, 0, ms);
      double worst = std::numeric_limits<double>::infinity();
      std::uint64_t first_bad = 0;
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const double ratio = td.lambda_values[i] / bound.values[i];
        worst = std::min(worst, ratio);
        if (ratio < 1.0 && first_bad == 0) first_bad = ms[i];
      }
      v.require(first_bad == 0, "d=" + std::to_string(d) + " m=" + std::to_string(first_bad));
      v.note("d=" + std::to_string(d) + ": min Lambda/bound " + fmt(worst, 4) +
             (first_bad ? ", first violation m=" + std::to_string(first_bad) : ""));
    }
  });
}

/// Lambda(m) m <= slack over [m_lo, m_hi] for smooth activations at gamma = 1, b = 0.
inline Result smooth_rate(const std::vector<Kind>& kinds, const std::vector<int>& dims, std::uint64_t m_lo,
                          std::uint64_t m_hi, double slack) {
  return timed("smooth_rate", [&](Verdict& v) {
    for (Kind k : kinds) {
      for (int d : dims) {
        const auto ks = build_spectrum(ActivationSpec::smooth(k), d, m_hi);
        std::vector<std::uint64_t> ms;
        for (auto m : log_spaced_m(m_hi, 20)) {
          if (m >= m_lo) ms.push_back(m);
        }
        const auto td = trace_decay(ks, ms);
        double worst = 0.0;
        for (std::size_t i = 0; i < ms.size(); ++i) {
          const double prod = td.lambda_values[i] * static_cast<double>(ms[i]);
          worst = std::max(worst, prod);
          v.require(prod <= slack, std::string(kind_name(k)) + " d=" + std::to_string(d) + " m=" +
                                       std::to_string(ms[i]) + " Lambda*m=" + fmt(prod));
        }
        v.note(std::string(kind_name(k)) + " d=" + std::to_string(d) + ": max " + fmt(worst, 3));
      }
    }
  });
}

/// mu_k <= B_k^2 / 4^k Gamma(d/2)^2 / Gamma(k + d/2)^2 with B_k = 1. The
/// direct route is checked up to its rounding floor; the derivative form
/// resolves the tiny high-degree values and is checked without slack.
inline Result lemma4_domination(const std::vector<int>& dims, int K) {
  return timed("lemma4_domination", [&](Verdict& v) {
    for (Kind k : {Kind::sin, Kind::cos}) {
      for (int d : dims) {
        const auto spec = ActivationSpec::smooth(k);
        const double scale = std::sqrt(kernel_trace(spec, d).value);
        const double floor = std::pow(256.0 * std::numeric_limits<double>::epsilon() * scale, 2);
        const auto eta = eta_batch<double>(spec, d, K, scale).eta;
        for (int j = 0; j <= K; ++j) {
          const double ub = smooth_mu_upper(d, j, 1.0);
          const double alt = eta_smooth_derivative<double>(spec, d, j);
          const std::string tag = std::string(kind_name(k)) + " d=" + std::to_string(d) + " k=" + std::to_string(j);
          v.require(eta[j] * eta[j] <= ub * (1 + 1e-12) + floor, tag + " direct");
          v.require(alt * alt <= ub * (1 + 1e-12), tag + " derivative form");
        }
      }
    }
  });
}

/// Derivative form of eta_k for sin/cos agrees with the direct route.
inline Result smooth_derivative_form(int d, int K) {
  return timed("smooth_derivative_form", [&](Verdict& v) {
    for (Kind k : {Kind::sin, Kind::cos}) {
      const auto spec = ActivationSpec::smooth(k, 1.3, 0.2);
      const auto eta = eta_batch<double>(spec, d, K).eta;
      for (int j = 0; j <= K; ++j) {
        const double alt = eta_smooth_derivative<double>(spec, d, j);
        v.require(std::abs(alt - eta[j]) <= 1e-12 * std::max(1.0, std::abs(eta[0])),
                  std::string(kind_name(k)) + " k=" + std::to_string(j));
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Figures
// ---------------------------------------------------------------------------

struct SlopeCheck {
  int d = 0;
  double slope = 0.0;
  double target = 0.0;
  double min_ratio_to_bound = 0.0;
  std::uint64_t first_violation = 0;
};

/// Step decay up to m_max: top-decade slope against -1/(d-1) and the
/// pointwise (1/d) m^{-1/(d-1)} lower bound.
inline SlopeCheck figure1_curve(int d, std::uint64_t m_max) {
  const auto ms = log_spaced_m(m_max, 20);
  const auto td = trace_decay(build_spectrum(ActivationSpec::step(), d, m_max), ms);
  SlopeCheck s;
  s.d = d;
  s.slope = top_decade_slope(ms, td.lambda_values);
  s.target = -1.0 / (d - 1);
  const auto bound = relu_alpha_lower(d, 0, ms);
  s.min_ratio_to_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i] == 0) continue;
    const double ratio = td.lambda_values[i] / bound.values[i];
    s.min_ratio_to_bound = std::min(s.min_ratio_to_bound, ratio);
    if (ratio < 1.0 && s.first_violation == 0) s.first_violation = ms[i];
  }
  return s;
}

inline Result figure1(const std::vector<int>& dims, std::uint64_t m_max, double slope_tol) {
  return timed("figure1", [&](Verdict& v) {
    for (int d : dims) {
      const auto s = figure1_curve(d, m_max);
      const double ratio = s.slope / s.target;
      v.require(std::abs(ratio - 1.0) <= slope_tol, "d=" + std::to_string(d) + " slope " + fmt(s.slope, 4));
      v.require(s.first_violation == 0, "d=" + std::to_string(d) + " bound at m=" + std::to_string(s.first_violation));
      v.note("d=" + std::to_string(d) + ": slope " + fmt(s.slope, 4) + " vs " + fmt(s.target, 4) + " (ratio " +
             fmt(ratio, 3) + "), min Lambda/bound " + fmt(s.min_ratio_to_bound, 4));
    }
  });
}

/// Arctan: |slope| non-increasing in r at fixed d, and r = 1 slopes across
/// dimensions within `spread` of each other (max/min - 1).
inline Result figure2(int d_trend, const std::vector<double>& rs, const std::vector<int>& dims, std::uint64_t m_probe,
                      int grid, double spread) {
  return timed("figure2", [&](Verdict& v) {
    const auto trend = r_trend_study(Kind::arctan, d_trend, rs, m_probe, grid);
    std::string slopes;
    for (const auto& row : trend.rows) slopes += (slopes.empty() ? "" : ", ") + fmt(row.slope, 4);
    v.require(trend.slope_magnitude_nonincreasing(), "trend in r: slopes " + slopes);
    v.note("d=" + std::to_string(d_trend) + " slopes over r: " + slopes);

    std::vector<double> s1;
    std::string across;
    for (int d : dims) {
      const auto st = r_trend_study(Kind::arctan, d, {1.0}, m_probe, grid);
      s1.push_back(st.rows[0].slope);
      across += (across.empty() ? "" : ", ") + std::to_string(d) + ":" + fmt(st.rows[0].slope, 4);
      for (const auto& w : st.warnings) v.note("warning " + w);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double s : s1) {
      lo = std::min(lo, std::abs(s));
      hi = std::max(hi, std::abs(s));
    }
    v.require(hi / lo - 1.0 <= spread, "d-independence at r=1: " + across);
    v.note("r=1 slopes by d: " + across);
    for (const auto& w : trend.warnings) v.note("warning " + w);
    std::size_t r0 = 0;
    for (const auto& row : trend.rows) r0 += row.argmax_all_r0 ? 1 : 0;
    v.note("argmax at (r,0) for " + std::to_string(r0) + "/" + std::to_string(trend.rows.size()) + " r values");
  });
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

inline Result sphere_sampling(int d, int n) {
  return timed("sphere_sampling", [&](Verdict& v) {
    const auto x = sample_sphere(d, n, std::uint64_t{12345});
    const double tol = 5.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) v.require(std::abs(x.row(i).norm() - 1.0) <= 1e-12, "unit norm");
    for (int j = 0; j < d; ++j) v.require(std::abs(x.col(j).mean()) <= tol, "coordinate mean");
    v.require(std::abs(x.col(0).squaredNorm() / n - 1.0 / d) <= tol, "E x_1^2 = 1/d");
  });
}

struct SeparationStudy {
  std::vector<SeparationReport> e1;
  std::vector<SeparationReport> random_dir;
};

inline SeparationStudy separation_study(int d, const std::vector<int>& ms, int trials, std::uint64_t seed,
                                        bool with_rotation) {
  SeparationStudy st;
  for (int m : ms) {
    SeparationConfig cfg;
    cfg.dimension = d;
    cfg.feature_count = m;
    cfg.trials = trials;
    cfg.seed = seed;
    st.e1.push_back(random_feature_fit(cfg));
    if (with_rotation) {
      cfg.direction = DirectionChoice::random;
      st.random_dir.push_back(random_feature_fit(cfg));
    }
  }
  return st;
}

inline Result separation(int d, const std::vector<int>& ms, int trials, std::uint64_t seed, double max_seconds) {
  return timed("separation", [&](Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto st = separation_study(d, ms, trials, seed, true);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const auto& r = st.e1[i];
      const std::string tag = "m=" + std::to_string(ms[i]);
      v.require(r.respects_lower_bound(3.0), tag + " mean " + fmt(r.mean_error) + " < Lambda " + fmt(r.lambda_m));
      v.note(tag + ": err " + fmt(r.mean_error, 4) + " +- " + fmt(r.std_error, 2) + ", Lambda " + fmt(r.lambda_m, 4));
      if (i > 0) {
        const auto& p = st.e1[i - 1];
        const double se = std::hypot(r.std_error, p.std_error);
        v.require(r.mean_error <= p.mean_error + 2.0 * se, tag + " error increased beyond 2 SE");
      }
      const auto& q = st.random_dir[i];
      const double se = std::hypot(r.std_error, q.std_error);
      v.require(std::abs(r.mean_error - q.mean_error) <= 3.0 * se,
                tag + " rotation: e1 " + fmt(r.mean_error) + " vs random " + fmt(q.mean_error));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs < max_seconds, "runtime " + fmt(secs));
  });
}

inline Result separation_diagnostics(int d) {
  return timed("separation_diagnostics", [&](Verdict& v) {
    SeparationConfig cfg;
    cfg.dimension = d;
    cfg.trials = 3;
    cfg.feature_count = 1;
    cfg.force_direction = true;
    cfg.ridge = 0.0;
    const auto forced = random_feature_fit(cfg);
    v.require(forced.mean_error <= 1e-20, "forced direction error " + fmt(forced.mean_error));
    cfg.feature_count = 0;
    cfg.force_direction = false;
    cfg.train_samples = 4000;
    const auto empty = random_feature_fit(cfg);
    v.require(std::abs(empty.mean_error - 0.5) <= 0.05, "m=0 error " + fmt(empty.mean_error));
    cfg.feature_count = 16;
    cfg.train_samples = 400;
    cfg.feature_kind = FeatureKind::spherical_harmonic_proxy;
    const auto proxy = random_feature_fit(cfg);
    v.require(proxy.mean_error >= proxy.lambda_m - 3.0 * proxy.std_error - 0.02, "harmonic proxy below Lambda");
    v.note("harmonic proxy m=16: " + fmt(proxy.mean_error, 4) + " vs Lambda " + fmt(proxy.lambda_m, 4));
  });
}

inline Result determinism(int d) {
  return timed("determinism", [&](Verdict& v) {
    SeparationConfig cfg;
    cfg.dimension = d;
    cfg.feature_count = 32;
    cfg.trials = 3;
    cfg.seed = 99;
    cfg.direction = DirectionChoice::random;
    const auto a = random_feature_fit(cfg);
    const auto b = random_feature_fit(cfg);
    v.require(a.errors == b.errors, "separation errors differ between identical runs");
    const auto s1 = build_spectrum(ActivationSpec::smooth(Kind::sigmoid, 2.0, 0.5), d, 500);
    const auto s2 = build_spectrum(ActivationSpec::smooth(Kind::sigmoid, 2.0, 0.5), d, 500);
    v.require(s1.mu == s2.mu, "spectrum differs between identical runs");
  });
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct Entry {
  std::string name;
  std::string module;
  std::function<Result()> run;
};

/// Reduced-scale profile; `d_stress` adds that dimension to the
/// dimension-parameterized checks.
inline std::vector<Entry> default_suite(int d_stress = 0) {
  auto dims = [d_stress](std::vector<int> base) {
    if (d_stress > 0 && std::find(base.begin(), base.end(), d_stress) == base.end()) base.push_back(d_stress);
    return base;
  };
  return {
      {"orthogonality", "mathcore", [=] { return orthogonality(dims({3, 5, 10, 20}), 30, 1e-10); }},
      {"rodrigues", "mathcore", [] { return rodrigues_crosscheck({3, 5}, 6, 1e-9); }},
      {"gauss_exactness", "mathcore", [=] { return gauss_exactness(dims({3, 5, 10}), 12, 1e-12); }},
      {"legendre_bounded", "mathcore", [=] { return legendre_bounded(dims({3, 5, 10, 20}), 30); }},
      {"kappa_monotone", "activation", [] { return kappa_monotone(); }},
      {"step_convention", "activation", [] { return step_convention(5, 20); }},
      {"activation_bounded", "activation", [] { return activation_bounded(); }},
      {"trace_identities", "spectrum", [=] { return trace_identities(dims({3, 5, 10, 20, 50}), 1e-8, 1.0); }},
      {"low_degree_mu", "spectrum", [] { return low_degree_mu(); }},
      {"trace_consistency", "spectrum", [=] { return trace_consistency(dims({3, 10})); }},
      {"parity_zeros", "spectrum", [=] { return parity_zeros(dims({3, 10}), 20); }},
      {"oracle_d2", "spectrum", [] { return oracle_d2(20, 1 << 20, 1e-8); }},
      {"arctan_route", "spectrum", [] { return arctan_route({3, 10}, {1.0, 4.0}, 11, 1e-8); }},
      {"relu_analytic_ratio", "spectrum", [] { return relu_analytic_ratio({3, 10}, {0, 1, 2}, 30, 1e-6); }},
      {"relu_scaling", "spectrum", [] { return relu_scaling(5, 2000); }},
      {"decay_properties", "spectrum", [=] { return decay_properties(dims({3, 10}), 300); }},
      {"sup_properties", "spectrum", [] { return sup_properties(10, 2.0, 3, 1000); }},
      {"harmonic_average", "experiment", [] { return harmonic_average({0, 1, 2, 5, 10}, 1 << 20, 1e-8); }},
      {"smooth_derivative_form", "spectrum", [] { return smooth_derivative_form(5, 15); }},
      {"prop4_lower", "bounds", [] { return prop4_lower({5, 10, 20}, 20000); }},
      {"smooth_rate", "bounds",
       [] { return smooth_rate({Kind::sin, Kind::cos, Kind::sigmoid}, {3, 10}, 10, 10000, 10.0); }},
      {"lemma4_domination", "bounds", [=] { return lemma4_domination(dims({3, 10}), 30); }},
      {"sphere_sampling", "experiment", [] { return sphere_sampling(7, 20000); }},
      {"separation", "experiment", [] { return separation(10, {16, 32, 64}, 10, 2024, 300.0); }},
      {"separation_diagnostics", "experiment", [] { return separation_diagnostics(10); }},
      {"determinism", "experiment", [] { return determinism(8); }},
  };
}

}  // namespace kwidth::check
