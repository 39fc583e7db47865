#pragma once

// Mercer spectrum of the dot-product kernel
//   k(x, x') = E_{v ~ tau_{d-1}} [ sigma(gamma v.x + b) sigma(gamma v.x' + b) ]
// on S^{d-1}: degree-wise eigenvalues mu_k = eta_k^2 with multiplicity N(d, k),
// the trace kappa(1), the trace decay Lambda(m) and its sup over scale/bias.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "kwidth/activation.hpp"
#include "kwidth/errors.hpp"
#include "kwidth/mathcore.hpp"
#include "kwidth/random.hpp"

namespace kwidth {

// ---------------------------------------------------------------------------
// Trace kappa(1)
// ---------------------------------------------------------------------------

enum class TraceMethod { closed_form, quadrature, monte_carlo, degree_sum };

inline const char* trace_method_name(TraceMethod m) {
  switch (m) {
    case TraceMethod::closed_form: return "closed_form";
    case TraceMethod::quadrature: return "quadrature";
    case TraceMethod::monte_carlo: return "monte_carlo";
    case TraceMethod::degree_sum: return "degree_sum";
  }
  return "?";
}

struct TraceEstimate {
  double value = 0.0;
  TraceMethod method = TraceMethod::quadrature;
  int mc_samples = 0;  ///< 0 when no Monte-Carlo cross-check was run
  double mc_value = std::numeric_limits<double>::quiet_NaN();
  double mc_stderr = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

/// E[sigma(gamma t)^2] under p_d for step and ReLU^alpha without bias:
/// gamma^{2 alpha} Gamma(alpha + 1/2) Gamma(d/2) / (2 sqrt(pi) Gamma(d/2 + alpha)).
inline std::optional<double> closed_form_trace(const ActivationSpec& spec, int d) {
  if (spec.bias != 0.0) return std::nullopt;
  if (spec.kind != Kind::step && spec.kind != Kind::relu_alpha) return std::nullopt;
  const int a = spec.kind == Kind::step ? 0 : spec.alpha;
  const double log_moment = log_gamma(a + 0.5) + log_gamma(0.5 * d) - log_gamma(0.5) -
                            log_gamma(0.5 * d + a);
  return 0.5 * std::pow(spec.gamma, 2 * a) * std::exp(log_moment);
}

/// int sigma(gamma t + b)^2 p_d(t) dt by kink-aware quadrature.
inline double quadrature_trace(const ActivationSpec& spec, int d) {
  const auto kinks = kink_points(spec);
  auto sq = [&](double t) {
    const double v = eval<double>(spec, t);
    return v * v;
  };
  const double rough = legendre_moments<double>(sq, d, 0, kinks, 64)[0];
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() *
                    std::max(std::abs(rough), std::numeric_limits<double>::min());
  auto res = legendre_moments_adaptive<double>(sq, d, 0, kinks, tol, 64);
  return res.values[0];
}

/// Monte-Carlo estimate of E_v[sigma(gamma v_1 + b)^2] with its standard error.
inline std::pair<double, double> monte_carlo_trace(const ActivationSpec& spec, int d,
                                                   int samples, std::uint64_t seed) {
  if (samples < 2) throw DomainError("monte_carlo_trace: need at least 2 samples");
  auto rng = make_stream(seed, 0, 7);
  const auto v = sample_sphere(d, samples, rng);
  CompensatedSum<double> s1;
  CompensatedSum<double> s2;
  for (int i = 0; i < samples; ++i) {
    const double f = eval<double>(spec, v(i, 0));
    s1.add(f * f);
    s2.add(f * f * f * f);
  }
  const double mean = s1.value() / samples;
  const double var = std::max(0.0, (s2.value() / samples - mean * mean)) * samples / (samples - 1);
  return {mean, std::sqrt(var / samples)};
}

/// kappa(1) by closed form when available, else 1-D quadrature; optionally
/// cross-checked by Monte Carlo over the sphere.
inline TraceEstimate kernel_trace(const ActivationSpec& spec, int d, int mc_samples = 0,
                                  std::uint64_t seed = 0) {
  if (d < 2) throw DomainError("kernel_trace: d must be >= 2");
  spec.validate();
  TraceEstimate est;
  if (auto cf = closed_form_trace(spec, d)) {
    est.value = *cf;
    est.method = TraceMethod::closed_form;
  } else {
    est.value = quadrature_trace(spec, d);
    est.method = TraceMethod::quadrature;
  }
  if (mc_samples > 0) {
    const auto [m, se] = monte_carlo_trace(spec, d, mc_samples, seed);
    est.mc_samples = mc_samples;
    est.mc_value = m;
    est.mc_stderr = se;
    est.seed = seed;
  }
  return est;
}

// ---------------------------------------------------------------------------
// eta_k
// ---------------------------------------------------------------------------

template <class Real = double>
struct EtaBatch {
  std::vector<Real> eta;  ///< signed eta_0 .. eta_K
  int nodes_per_piece = 0;
  Real max_change = Real(0);
};

/// eta_k = int sigma(gamma t + b) P_k(t) p_d(t) dt for k = 0..K, with node
/// doubling until every degree is stable to 256 eps * scale. `scale` should
/// be of the order of sqrt(kappa(1)).
template <class Real = double>
EtaBatch<Real> eta_batch(const ActivationSpec& spec, int d, int K, double scale) {
  if (d < 2) throw DomainError("eta: d must be >= 2");
  if (K < 0) throw DomainError("eta: degree must be >= 0");
  spec.validate();
  const auto kinks = kink_points(spec);
  auto f = [&](const Real& t) { return eval<Real>(spec, t); };
  const Real tol = Real(256) * std::numeric_limits<Real>::epsilon() *
                   Real(std::max(scale, std::numeric_limits<double>::min()));
  const int n_start = std::max(64, 2 * K + d);
  auto res = legendre_moments_adaptive<Real>(f, d, K, kinks, tol, n_start);
  return {std::move(res.values), res.nodes_per_piece, res.max_change};
}

template <class Real = double>
EtaBatch<Real> eta_batch(const ActivationSpec& spec, int d, int K) {
  return eta_batch<Real>(spec, d, K, std::sqrt(kernel_trace(spec, d).value));
}

/// Signed eta_k of the kernel of sigma^{(gamma, b)} on S^{d-1}.
inline double eta_k(const ActivationSpec& spec, int d, int k) {
  return eta_batch<double>(spec, d, k).eta[k];
}

/// eta_k through the k-th-derivative form
///   Gamma(d/2) / (2^k Gamma(k + d/2)) int sigma^{(k)}(t) p_{d+2k}(t) dt,
/// available for sin and cos only; used as a cross-check.
template <class Real = double>
Real eta_smooth_derivative(const ActivationSpec& spec, int d, int k) {
  using std::exp;
  if (spec.kind != Kind::sin && spec.kind != Kind::cos) {
    throw DomainError("eta_smooth_derivative: only sin and cos have closed-form derivatives");
  }
  if (d < 2 || k < 0) throw DomainError("eta_smooth_derivative: need d >= 2, k >= 0");
  auto f = [&](const Real& t) { return eval_derivative<Real>(spec, k, t); };
  const double lead = std::pow(spec.gamma, k);
  const Real tol = Real(256) * std::numeric_limits<Real>::epsilon() * Real(std::max(lead, 1.0));
  const std::vector<double> none;
  auto res = legendre_moments_adaptive<Real>(f, d + 2 * k, 0, none, tol, 64);
  const double log_pref = log_gamma(0.5 * d) - k * std::log(2.0) - log_gamma(k + 0.5 * d);
  return Real(std::exp(log_pref)) * res.values[0];
}

/// Squared closed-form eta_k of ReLU^alpha for k >= alpha + 1 (zero when
/// k and alpha have the same parity). Known only up to a k-independent factor.
inline double mu_relu_alpha_analytic(int d, int k, int alpha) {
  if (d < 2 || alpha < 0) throw DomainError("mu_relu_alpha_analytic: need d >= 2, alpha >= 0");
  if (k < alpha + 1) {
    throw DomainError("mu_relu_alpha_analytic: closed form only for k >= alpha + 1");
  }
  if ((k - alpha) % 2 == 0) return 0.0;
  const double log_eta = log_gamma(alpha + 1.0) - 0.5 * std::log(2.0 * boost::math::constants::pi<double>()) -
                         k * std::log(2.0) + log_gamma(0.5 * d) + log_gamma(k - alpha) -
                         log_gamma(0.5 * (k - alpha + 1)) - log_gamma(0.5 * (k + d + alpha));
  return std::exp(2.0 * log_eta);
}

/// eta_k of arctan(gamma t) through the Gauss hypergeometric representation
///   eta_k = (-1)^{(k-1)/2} Q_{d,k} gamma^k B((k+1)/2, (k+d-1)/2)
///           2F1(k/2, (k+1)/2; k + d/2; -gamma^2),
///   Q_{d,k} = Gamma(k) Gamma(d/2) / (2^k Gamma((k+1)/2) Gamma((k+d-1)/2)).
/// Zero at even k (odd activation against even P_k).
inline double eta_arctan_hypergeometric(int d, int k, double gamma) {
  if (d < 2 || k < 0) throw DomainError("eta_arctan_hypergeometric: need d >= 2, k >= 0");
  if (!(gamma > 0.0)) throw DomainError("eta_arctan_hypergeometric: gamma must be positive");
  if (k % 2 == 0) return 0.0;
  const double a = 0.5 * (k + 1);
  const double c = 0.5 * (k + d - 1);
  const double log_q = log_gamma(k) + log_gamma(0.5 * d) - k * std::log(2.0) - log_gamma(a) -
                       log_gamma(c);
  const double log_mag = log_q + k * std::log(gamma) + log_beta(a, c);
  const double f = gauss_2f1(0.5 * k, a, k + 0.5 * d, -gamma * gamma);
  const double sign = ((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * std::exp(log_mag) * f;
}

inline double eta_arctan_hypergeometric(const ActivationSpec& spec, int d, int k) {
  if (spec.kind != Kind::arctan) throw DomainError("eta_arctan_hypergeometric: arctan only");
  if (spec.bias != 0.0) {
    throw DomainError("eta_arctan_hypergeometric: equality holds only for zero bias");
  }
  return eta_arctan_hypergeometric(d, k, spec.gamma);
}

// ---------------------------------------------------------------------------
// KernelSpectrum and trace decay
// ---------------------------------------------------------------------------

struct SpectrumOptions {
  int degree_cap = 2000;
  double tail_ratio = 1e-3;  ///< trailing mu must drop below this times the m-th eigenvalue
  int mc_samples = 0;        ///< Monte-Carlo cross-check of the trace; 0 disables
  std::uint64_t seed = 0;
};

struct KernelSpectrum {
  int dimension = 0;
  ActivationSpec spec;
  std::vector<double> eta;
  std::vector<double> mu;
  std::vector<std::uint64_t> mult;
  double trace = 0.0;
  TraceEstimate trace_info;
  double residual = 0.0;  ///< trace - sum_k N(d,k) mu_k, unclamped
  std::uint64_t m_max = 0;
  double selected_threshold = 0.0;  ///< m_max-th largest eigenvalue
  double noise_floor = 0.0;         ///< eigenvalues below this are quadrature noise
  int degree_cap = 0;
  double tail_ratio = 0.0;
  int nodes_per_piece = 0;
  double quadrature_change = 0.0;

  int max_degree() const { return static_cast<int>(mu.size()) - 1; }
  std::uint64_t expanded_count() const {
    return std::accumulate(mult.begin(), mult.end(), std::uint64_t{0});
  }
};

namespace detail {

/// Degrees sorted by mu descending, lower degree first among ties.
inline std::vector<int> degree_order(const std::vector<double>& mu) {
  std::vector<int> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mu[a] > mu[b]; });
  return order;
}

inline double mth_largest(const std::vector<double>& mu, const std::vector<std::uint64_t>& mult,
                          std::uint64_t m) {
  std::uint64_t seen = 0;
  for (int k : degree_order(mu)) {
    seen += mult[k];
    if (seen >= m) return mu[k];
  }
  return 0.0;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    throw OverflowError("cumulative multiplicity exceeds 64-bit range");
  }
  return a + b;
}

}  // namespace detail

/// Eigenvalues mu_0..mu_K where K is the first degree with cumulative
/// multiplicity >= m_max, extended until the trailing three mu fall below
/// tail_ratio times the m_max-th largest eigenvalue (or the noise floor).
inline KernelSpectrum build_spectrum(const ActivationSpec& spec, int d, std::uint64_t m_max,
                                     const SpectrumOptions& opts = {}) {
  if (d < 2) throw DomainError("build_spectrum: d must be >= 2");
  if (m_max < 1) throw DomainError("build_spectrum: m_max must be >= 1");
  spec.validate();

  KernelSpectrum ks;
  ks.dimension = d;
  ks.spec = spec;
  ks.m_max = m_max;
  ks.degree_cap = opts.degree_cap;
  ks.tail_ratio = opts.tail_ratio;
  ks.trace_info = kernel_trace(spec, d, opts.mc_samples, opts.seed);
  ks.trace = ks.trace_info.value;
  const double scale = std::sqrt(std::max(ks.trace, std::numeric_limits<double>::min()));
  ks.noise_floor = std::pow(1e-13 * scale, 2);

  int K = 0;
  std::uint64_t cum = 1;
  while (cum < m_max) {
    ++K;
    if (K > opts.degree_cap) {
      throw ResourceError("build_spectrum: m_max=" + std::to_string(m_max) +
                          " needs more than the degree cap " + std::to_string(opts.degree_cap));
    }
    cum = detail::checked_add(cum, harmonic_dim(d, K));
  }

  for (;;) {
    auto batch = eta_batch<double>(spec, d, K, scale);
    std::vector<double> mu(K + 1);
    std::vector<std::uint64_t> mult(K + 1);
    for (int k = 0; k <= K; ++k) {
      mu[k] = batch.eta[k] * batch.eta[k];
      mult[k] = harmonic_dim(d, k);
    }
    const double tau = detail::mth_largest(mu, mult, m_max);
    double trailing = 0.0;
    for (int k = std::max(0, K - 2); k <= K; ++k) trailing = std::max(trailing, mu[k]);
    const bool ok = trailing <= std::max(opts.tail_ratio * tau, ks.noise_floor);
    if (ok || K >= opts.degree_cap) {
      if (!ok) {
        std::ostringstream msg;
        msg << "build_spectrum: tail rule unmet at the degree cap " << opts.degree_cap
            << " (" << spec.to_string() << ", d=" << d << ", m_max=" << m_max
            << ", trailing mu=" << trailing << ", m-th eigenvalue=" << tau << ")";
        throw ResourceError(msg.str());
      }
      ks.eta = std::move(batch.eta);
      ks.mu = std::move(mu);
      ks.mult = std::move(mult);
      ks.selected_threshold = tau;
      ks.nodes_per_piece = batch.nodes_per_piece;
      ks.quadrature_change = batch.max_change;
      break;
    }
    K = std::min(opts.degree_cap, std::max(K + 3, K + K / 4));
  }

  CompensatedSum<double> total;
  std::uint64_t count = 0;
  for (int k = 0; k <= ks.max_degree(); ++k) {
    total.add(static_cast<double>(ks.mult[k]) * ks.mu[k]);
    count = detail::checked_add(count, ks.mult[k]);
  }
  ks.residual = ks.trace - total.value();
  return ks;
}

struct TraceDecay {
  int dimension = 0;
  ActivationSpec spec;
  std::vector<std::uint64_t> m_values;
  std::vector<double> lambda_values;
  std::uint64_t top_eigen_count_used = 0;  ///< expanded eigenvalues available
  double trace = 0.0;
};

/// Lambda(m) = kappa(1) - (sum of the m largest eigenvalues), evaluated as the
/// clamped residual plus the tail of the sorted multiplicity-expanded list.
inline TraceDecay trace_decay(const KernelSpectrum& ks, const std::vector<std::uint64_t>& m_values) {
  for (std::size_t i = 1; i < m_values.size(); ++i) {
    if (!(m_values[i] > m_values[i - 1])) {
      throw DomainError("trace_decay: m values must be strictly increasing");
    }
  }
  const auto order = detail::degree_order(ks.mu);
  const std::size_t blocks = order.size();
  std::vector<std::uint64_t> cum(blocks + 1, 0);
  for (std::size_t i = 0; i < blocks; ++i) cum[i + 1] = cum[i] + ks.mult[order[i]];
  std::vector<double> suffix(blocks + 1, 0.0);
  {
    CompensatedSum<double> acc;
    for (std::size_t i = blocks; i-- > 0;) {
      acc.add(static_cast<double>(ks.mult[order[i]]) * ks.mu[order[i]]);
      suffix[i] = acc.value();
    }
  }
  const double residual = std::max(0.0, ks.residual);

  TraceDecay out;
  out.dimension = ks.dimension;
  out.spec = ks.spec;
  out.m_values = m_values;
  out.top_eigen_count_used = cum[blocks];
  out.trace = ks.trace;
  out.lambda_values.reserve(m_values.size());
  for (std::uint64_t m : m_values) {
    if (m > cum[blocks]) {
      std::ostringstream msg;
      msg << "trace_decay: m=" << m << " exceeds the " << cum[blocks]
          << " eigenvalues computed; rebuild the spectrum with m_max >= " << m;
      throw StaleSpectrumError(msg.str());
    }
    // Block i holds eigenvalue ranks cum[i] + 1 .. cum[i + 1].
    const auto it = std::upper_bound(cum.begin(), cum.end(), m);
    const std::size_t i = static_cast<std::size_t>(it - cum.begin()) - 1;
    double lambda = residual;
    if (i < blocks) {
      lambda += static_cast<double>(cum[i + 1] - m) * ks.mu[order[i]] + suffix[i + 1];
    }
    out.lambda_values.push_back(lambda);
  }
  return out;
}

/// The first `count` eigenvalues with multiplicity, in descending order.
inline std::vector<double> expanded_eigenvalues(const KernelSpectrum& ks, std::uint64_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (int k : detail::degree_order(ks.mu)) {
    for (std::uint64_t j = 0; j < ks.mult[k] && out.size() < count; ++j) out.push_back(ks.mu[k]);
    if (out.size() >= count) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sup over scale and bias
// ---------------------------------------------------------------------------

struct ScaleBias {
  double gamma = 1.0;
  double bias = 0.0;
  friend bool operator==(const ScaleBias&, const ScaleBias&) = default;
};

/// Triangular grid over {gamma > 0, gamma + |b| <= r}: gamma = r i / G,
/// b = +-(r - gamma) j / G, with (r, 0) first.
inline std::vector<ScaleBias> scale_bias_grid(double r, int grid_size) {
  if (!(r > 0.0)) throw DomainError("scale_bias_grid: r must be positive");
  if (grid_size < 1) throw DomainError("scale_bias_grid: grid size must be >= 1");
  const int G = grid_size;
  std::vector<ScaleBias> grid{{r, 0.0}};
  for (int i = G - 1; i >= 1; --i) {
    const double g = r * i / G;
    for (int j = 0; j <= G; ++j) {
      const double b = (r - g) * j / G;
      grid.push_back({g, b});
      if (j > 0) grid.push_back({g, -b});
    }
  }
  return grid;
}

struct SupTraceDecay {
  Kind kind = Kind::step;
  int alpha = 0;
  int dimension = 0;
  double r = 1.0;
  int grid_size = 0;
  std::vector<ScaleBias> grid;
  std::vector<TraceDecay> per_point;
  std::vector<std::uint64_t> m_values;
  std::vector<double> sup_curve;  ///< grid maximum: a lower bound on the true sup
  std::vector<std::size_t> argmax;  ///< index into grid per m

  bool argmax_is_r0(std::size_t i) const { return argmax[i] == 0; }
};

inline SupTraceDecay sup_trace_decay(Kind kind, int alpha, double r, int d, int grid_size,
                                     const std::vector<std::uint64_t>& m_values,
                                     const SpectrumOptions& opts = {}) {
  if (m_values.empty()) throw DomainError("sup_trace_decay: no m values");
  SupTraceDecay out;
  out.kind = kind;
  out.alpha = alpha;
  out.dimension = d;
  out.r = r;
  out.grid_size = grid_size;
  out.grid = scale_bias_grid(r, grid_size);
  out.m_values = m_values;
  const std::uint64_t m_max = std::max<std::uint64_t>(1, m_values.back());
  for (const auto& p : out.grid) {
    const ActivationSpec spec(kind, alpha, p.gamma, p.bias);
    out.per_point.push_back(trace_decay(build_spectrum(spec, d, m_max, opts), m_values));
  }
  out.sup_curve.assign(m_values.size(), 0.0);
  out.argmax.assign(m_values.size(), 0);
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    double best = out.per_point[0].lambda_values[i];
    std::size_t arg = 0;
    for (std::size_t g = 1; g < out.grid.size(); ++g) {
      const double v = out.per_point[g].lambda_values[i];
      // Mirror-image biases give equal spectra up to rounding; keep the earlier point.
      if (v > best * (1.0 + 1e-12) && v > best + 1e-300) {
        best = v;
        arg = g;
      }
    }
    out.sup_curve[i] = best;
    out.argmax[i] = arg;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Circle oracle (d = 2)
// ---------------------------------------------------------------------------

/// Cosine coefficients a_k = (1/n) sum_j sigma(gamma cos th_j + b) cos(k th_j)
/// on the uniform grid th_j = 2 pi j / n. Jump nodes of the step take the
/// midpoint value 1/2. On S^1 these equal the per-harmonic eta_k.
inline std::vector<double> fourier_coefficients_d2(const ActivationSpec& spec, int K,
                                                   int n_grid) {
  if (K < 0) throw DomainError("fourier_oracle_d2: K must be >= 0");
  if (n_grid < 4 * std::max(K, 1)) {
    throw DomainError("fourier_oracle_d2: n_grid must be >= 4K to avoid aliasing");
  }
  spec.validate();
  const double two_pi = 2.0 * boost::math::constants::pi<double>();
  std::vector<double> cos_table(n_grid);
  for (int j = 0; j < n_grid; ++j) cos_table[j] = std::cos(two_pi * j / n_grid);
  const bool jumps = spec.kind == Kind::step || (spec.kind == Kind::relu_alpha && spec.alpha == 0);
  const double jump_tol = 1e-12 * (spec.gamma + std::abs(spec.bias));
  std::vector<double> values(n_grid);
  for (int j = 0; j < n_grid; ++j) {
    const double z = spec.gamma * cos_table[j] + spec.bias;
    values[j] = jumps && std::abs(z) <= jump_tol ? 0.5 : eval<double>(spec, cos_table[j]);
  }
  std::vector<double> a(K + 1);
  for (int k = 0; k <= K; ++k) {
    CompensatedSum<double> acc;
    std::uint64_t idx = 0;
    for (int j = 0; j < n_grid; ++j) {
      acc.add(values[j] * cos_table[idx]);
      idx += static_cast<std::uint64_t>(k);
      if (idx >= static_cast<std::uint64_t>(n_grid)) idx -= n_grid;
    }
    a[k] = acc.value() / n_grid;
  }
  return a;
}

/// Per-harmonic eigenvalues mu_k on S^1 from the discrete cosine transform.
inline std::vector<double> fourier_oracle_d2(const ActivationSpec& spec, int K, int n_grid) {
  auto a = fourier_coefficients_d2(spec, K, n_grid);
  for (auto& v : a) v *= v;
  return a;
}

// ---------------------------------------------------------------------------
// Curve utilities
// ---------------------------------------------------------------------------

/// 0, then integers round(10^{i / per_decade}) up to m_max, then m_max.
inline std::vector<std::uint64_t> log_spaced_m(std::uint64_t m_max, int per_decade = 20) {
  if (per_decade < 1) throw DomainError("log_spaced_m: per_decade must be >= 1");
  std::vector<std::uint64_t> out{0};
  for (int i = 0;; ++i) {
    const double v = std::round(std::pow(10.0, static_cast<double>(i) / per_decade));
    if (v > static_cast<double>(m_max)) break;
    const auto m = static_cast<std::uint64_t>(v);
    if (m > out.back()) out.push_back(m);
  }
  if (m_max > out.back()) out.push_back(m_max);
  return out;
}

/// Least-squares slope of log(value) against log(m) over m in [m_lo, m_hi].
inline double loglog_slope(const std::vector<std::uint64_t>& m_values,
                           const std::vector<double>& values, double m_lo, double m_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    const double m = static_cast<double>(m_values[i]);
    if (m < m_lo || m > m_hi || m <= 0.0 || !(values[i] > 0.0)) continue;
    const double x = std::log(m);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw DomainError("loglog_slope: fewer than two positive points in range");
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw DomainError("loglog_slope: degenerate m range");
  return (n * sxy - sx * sy) / den;
}

/// Slope over the top decade [m_max / 10, m_max] of a curve.
inline double top_decade_slope(const std::vector<std::uint64_t>& m_values,
                               const std::vector<double>& values) {
  const double hi = static_cast<double>(m_values.back());
  return loglog_slope(m_values, values, hi / 10.0, hi);
}

}  // namespace kwidth
