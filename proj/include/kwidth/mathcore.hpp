#pragma once

// Special functions, d-dimensional Legendre polynomials, harmonic multiplicities
// and quadrature against the sphere-marginal weight (1 - t^2)^{(d-3)/2}.
//
// Everything that can reasonably run in extended precision is templated on the
// scalar type; double is the default everywhere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kwidth/errors.hpp"

namespace kwidth {

/// Neumaier-compensated running sum. Order-dependent, hence deterministic for
/// a fixed summation order.
template <class Real = double>
class CompensatedSum {
 public:
  void add(const Real& x) {
    using std::abs;
    Real t = sum_ + x;
    if (abs(sum_) >= abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = Real(0);
  Real comp_ = Real(0);
};

// ---------------------------------------------------------------------------
// Gamma family
// ---------------------------------------------------------------------------

inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite");
  }
  return std::lgamma(x);
}

inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// log of binom(n, k) for real n >= k >= 0.
inline double log_binomial(double n, double k) {
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

/// log of the surface area of S^{d-1}, 2 pi^{d/2} / Gamma(d/2).
inline double log_surface_area(int d) {
  if (d < 1) throw DomainError("surface_area: dimension must be >= 1");
  return std::log(2.0) + 0.5 * d * std::log(boost::math::constants::pi<double>()) -
         log_gamma(0.5 * d);
}

inline double surface_area(int d) { return std::exp(log_surface_area(d)); }

/// Normalizing constant of p_d: B(1/2, (d-1)/2) = omega_{d-1} / omega_{d-2}.
inline double log_density_norm(int d) {
  if (d < 2) throw DomainError("sphere-marginal density needs d >= 2");
  return log_beta(0.5, 0.5 * (d - 1));
}

/// B(1/2, (d-1)/2) directly in the working precision. Going through
/// exp(log B) costs a few ulps, visible in eta_0 of the step.
template <class Real = double>
Real density_norm(int d) {
  if (d < 2) throw DomainError("sphere-marginal density needs d >= 2");
  return boost::math::beta(Real(1) / Real(2), Real(d - 1) / Real(2));
}

// ---------------------------------------------------------------------------
// Harmonic multiplicities
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t exact_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    // c * (n - i) / (i + 1) stays integral at every step.
    c = c * (n - i) / (i + 1);
    if (c > std::numeric_limits<std::uint64_t>::max()) {
      throw OverflowError("binomial coefficient exceeds 64-bit range");
    }
  }
  return static_cast<std::uint64_t>(c);
}

}  // namespace detail

/// log N(d, k) from ((2k+d-2)/k) * binom(k+d-3, d-2); valid far beyond the
/// integer range.
inline double log_harmonic_dim(int d, int k) {
  if (d < 2 || k < 0) throw DomainError("harmonic_dim: need d >= 2 and k >= 0");
  if (k == 0) return 0.0;
  if (d == 2) return std::log(2.0);
  return std::log((2.0 * k + d - 2.0) / k) + log_binomial(k + d - 3.0, d - 2.0);
}

/// Dimension N(d, k) of the degree-k spherical harmonics on S^{d-1}.
inline std::uint64_t harmonic_dim(int d, int k) {
  if (d < 2 || k < 0) throw DomainError("harmonic_dim: need d >= 2 and k >= 0");
  if (k == 0) return 1;
  if (k == 1) return static_cast<std::uint64_t>(d);
  if (d == 2) return 2;
  // N(d,k) = binom(k+d-1, d-1) - binom(k+d-3, d-1), exact in integers.
  const auto hi = detail::exact_binomial(k + d - 1, d - 1);
  const auto lo = detail::exact_binomial(k + d - 3, d - 1);
  const std::uint64_t n = hi - lo;
  const double rel = std::abs(std::log(static_cast<double>(n)) - log_harmonic_dim(d, k));
  if (rel > 1e-6) {
    throw NumericError("harmonic_dim: integer and log-space routes disagree");
  }
  return n;
}

// ---------------------------------------------------------------------------
// Legendre polynomials in d dimensions
// ---------------------------------------------------------------------------

/// P_k for the sphere S^{d-1}, normalized by P_k(1) = 1, through the three-term
/// recursion with P_0 = 1, P_1 = t.
template <class Real = double>
class LegendreEvaluator {
 public:
  LegendreEvaluator(int dimension, int max_degree) : d_(dimension), max_degree_(max_degree) {
    if (d_ < 2) throw DomainError("LegendreEvaluator: dimension must be >= 2");
    if (max_degree_ < 0) throw DomainError("LegendreEvaluator: max_degree must be >= 0");
    a_.resize(std::max(max_degree_ + 1, 2));
    b_.resize(std::max(max_degree_ + 1, 2));
    for (int k = 2; k <= max_degree_; ++k) {
      const Real den = Real(k + d_ - 3);
      a_[k] = Real(2 * k + d_ - 4) / den;
      b_[k] = Real(k - 1) / den;
    }
  }

  int dimension() const { return d_; }
  int max_degree() const { return max_degree_; }

  Real operator()(int k, const Real& t) const {
    check_degree(k);
    check_argument(t);
    if (k == 0 || t == Real(1)) return Real(1);
    if (t == Real(-1)) return k % 2 ? Real(-1) : Real(1);
    Real p0 = Real(1);
    Real p1 = t;
    for (int j = 2; j <= k; ++j) {
      Real p2 = a_[j] * t * p1 - b_[j] * p0;
      p0 = p1;
      p1 = p2;
    }
    return p1;
  }

  /// Fills out[0..max_degree] with P_0(t) .. P_K(t).
  void fill(const Real& t, std::span<Real> out) const {
    if (static_cast<int>(out.size()) < max_degree_ + 1) {
      throw DomainError("LegendreEvaluator::fill: output span too small");
    }
    out[0] = Real(1);
    if (max_degree_ == 0) return;
    if (t == Real(1) || t == Real(-1)) {
      for (int k = 1; k <= max_degree_; ++k) out[k] = t == Real(1) || k % 2 == 0 ? Real(1) : Real(-1);
      return;
    }
    out[1] = t;
    for (int k = 2; k <= max_degree_; ++k) {
      out[k] = a_[k] * t * out[k - 1] - b_[k] * out[k - 2];
    }
  }

 private:
  void check_degree(int k) const {
    if (k < 0 || k > max_degree_) {
      throw DomainError("LegendreEvaluator: degree " + std::to_string(k) + " outside [0, " +
                        std::to_string(max_degree_) + "]");
    }
  }
  static void check_argument(const Real& t) {
    using std::abs;
    if (!(abs(t) <= Real(1))) throw DomainError("LegendreEvaluator: |t| must be <= 1");
  }

  int d_;
  int max_degree_;
  std::vector<Real> a_;
  std::vector<Real> b_;
};

template <class Real = double>
Real legendre_eval(const LegendreEvaluator<Real>& ev, int k, const Real& t) {
  return ev(k, t);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double exponent = 0.0;  ///< e in (1 - t^2)^e
  bool normalized = false;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    CompensatedSum<double> acc;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc.add(weights[i] * f(nodes[i]));
    return acc.value();
  }
};

/// n-point Gauss rule for the weight (1 - t^2)^{(d-3)/2} on [-1, 1] by the
/// Golub-Welsch eigenvalue method. With `normalized` the weights integrate p_d.
inline QuadratureRule gauss_jacobi(int n, int d, bool normalized = true) {
  if (n < 1) throw DomainError("gauss_jacobi: n must be >= 1");
  if (d < 2) throw DomainError("gauss_jacobi: d must be >= 2");
  const double e = 0.5 * (d - 3);
  const double log_mu0 = log_density_norm(d);

  QuadratureRule rule;
  rule.exponent = e;
  rule.normalized = normalized;
  const double mass = normalized ? 1.0 : std::exp(log_mu0);

  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {mass};
    return rule;
  }

  // Monic recurrence coefficients of the symmetric Jacobi family.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) {
    double beta;
    if (k == 1) {
      beta = 1.0 / (2.0 * e + 3.0);
    } else {
      beta = k * (k + 2.0 * e) / ((2.0 * k + 2.0 * e + 1.0) * (2.0 * k + 2.0 * e - 1.0));
    }
    sub[k - 1] = std::sqrt(beta);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "gauss_jacobi: tridiagonal eigen-solver did not converge (n=" << n << ", d=" << d
        << ", exponent=" << e << ")";
    throw NumericError(msg.str());
  }

  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mass * v0 * v0;
  }
  // Exact symmetry of the weight; removes eigen-solver noise on the odd moments.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

  for (int i = 0; i < n; ++i) {
    const bool inside = rule.nodes[i] > -1.0 && rule.nodes[i] < 1.0;
    const bool ordered = i == 0 || rule.nodes[i] > rule.nodes[i - 1];
    if (!inside || !ordered || !(rule.weights[i] > 0.0)) {
      std::ostringstream msg;
      msg << "gauss_jacobi: invalid rule at node " << i << " (n=" << n << ", d=" << d
          << ", node=" << rule.nodes[i] << ", weight=" << rule.weights[i] << ")";
      throw NumericError(msg.str());
    }
  }
  return rule;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence, in any floating type.
template <class Real = double>
struct GaussLegendre {
  std::vector<Real> nodes;
  std::vector<Real> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    using std::abs;
    using std::cos;
    // Doubles are built in long double so the weights land within an ulp.
    using W = std::conditional_t<std::is_same_v<Real, double>, long double, Real>;
    if (n < 1) throw DomainError("GaussLegendre: n must be >= 1");
    const W pi = boost::math::constants::pi<W>();
    const W tol = W(64) * std::numeric_limits<W>::epsilon();
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
      W x = cos(pi * W(4 * i + 3) / W(4 * n + 2));
      W dp = W(1);
      bool converged = false;
      for (int iter = 0; iter < 100; ++iter) {
        W p0 = W(1);
        W p1 = x;
        for (int j = 2; j <= n; ++j) {
          W p2 = (W(2 * j - 1) * x * p1 - W(j - 1) * p0) / W(j);
          p0 = p1;
          p1 = p2;
        }
        dp = W(n) * (x * p1 - p0) / (x * x - W(1));
        const W dx = p1 / dp;
        x -= dx;
        if (abs(dx) <= tol) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        throw NumericError("GaussLegendre: Newton iteration stalled for n=" + std::to_string(n));
      }
      // Weight needs P_n' at the final node, not the last Newton iterate.
      {
        W p0 = W(1);
        W p1 = x;
        for (int j = 2; j <= n; ++j) {
          W p2 = (W(2 * j - 1) * x * p1 - W(j - 1) * p0) / W(j);
          p0 = p1;
          p1 = p2;
        }
        dp = n == 1 ? W(1) : W(n) * (x * p1 - p0) / (x * x - W(1));
      }
      const W w = W(2) / ((W(1) - x * x) * dp * dp);
      nodes[i] = Real(-x);
      nodes[n - 1 - i] = Real(x);
      weights[i] = weights[n - 1 - i] = Real(w);
    }
    if (n % 2 == 1) nodes[n / 2] = Real(0);
  }
};

/// Shared immutable rules keyed by size. Building a rule costs O(n^2), which
/// dominates extended-precision runs when the same sizes recur.
template <class Real = double>
const GaussLegendre<Real>& gauss_legendre_cached(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const GaussLegendre<Real>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<const GaussLegendre<Real>>(n);
  return *slot;
}

namespace detail {

template <class Real>
Real int_pow(const Real& x, int p) {
  Real r = Real(1);
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

/// Angle edges 0 = th_0 < ... < th_J = pi for t = cos(th) split at breakpoints.
template <class Real>
std::vector<Real> angle_edges(std::span<const double> breakpoints) {
  using std::acos;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > -1.0 && breakpoints[i] < 1.0)) {
      throw DomainError("breakpoints must lie strictly inside (-1, 1)");
    }
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) {
      throw DomainError("breakpoints must be sorted and distinct");
    }
  }
  std::vector<Real> edges;
  edges.reserve(breakpoints.size() + 2);
  edges.push_back(Real(0));
  for (auto it = breakpoints.rbegin(); it != breakpoints.rend(); ++it) {
    edges.push_back(acos(Real(*it)));
  }
  edges.push_back(boost::math::constants::pi<Real>());
  return edges;
}

}  // namespace detail

/// Values of int f(t) P_k(t) p_d(t) dt for k = 0..K (normalized density),
/// using n Gauss-Legendre nodes in the angle t = cos(theta) on each piece
/// between breakpoints. The angular integrand f(cos th) sin^{d-2}(th) is
/// smooth on every piece whenever f is.
template <class Real = double, class F>
std::vector<Real> legendre_moments(F&& f, int d, int K, std::span<const double> breakpoints,
                                   int n) {
  using std::cos;
  using std::exp;
  using std::sin;
  if (K < 0) throw DomainError("legendre_moments: K must be >= 0");
  const LegendreEvaluator<Real> ev(d, K);
  const auto& gl = gauss_legendre_cached<Real>(n);
  const auto edges = detail::angle_edges<Real>(breakpoints);
  const Real norm = Real(1) / density_norm<Real>(d);

  std::vector<CompensatedSum<Real>> acc(K + 1);
  std::vector<Real> p(K + 1);
  for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece) {
    const Real a = edges[piece];
    const Real b = edges[piece + 1];
    const Real half = (b - a) / Real(2);
    const Real mid = (a + b) / Real(2);
    for (int i = 0; i < n; ++i) {
      const Real th = mid + half * gl.nodes[i];
      const Real t = cos(th);
      const Real w = half * gl.weights[i] * detail::int_pow(sin(th), d - 2);
      const Real fw = w * Real(f(t));
      ev.fill(t, p);
      for (int k = 0; k <= K; ++k) acc[k].add(fw * p[k]);
    }
  }
  std::vector<Real> out(K + 1);
  for (int k = 0; k <= K; ++k) out[k] = norm * acc[k].value();
  return out;
}

template <class Real = double>
struct MomentResult {
  std::vector<Real> values;
  Real max_change = Real(0);  ///< max_k |I_{2n} - I_n| at acceptance
  int nodes_per_piece = 0;
};

/// legendre_moments with node doubling until every degree changes by at most
/// `tol`. Throws NumericError when `n_cap` is reached first.
template <class Real = double, class F>
MomentResult<Real> legendre_moments_adaptive(F&& f, int d, int K,
                                             std::span<const double> breakpoints,
                                             const Real& tol, int n_start, int n_cap = 1 << 16) {
  using std::abs;
  int n = std::max(n_start, 8);
  auto prev = legendre_moments<Real>(f, d, K, breakpoints, n);
  Real change = Real(0);
  while (2 * n <= n_cap) {
    auto cur = legendre_moments<Real>(f, d, K, breakpoints, 2 * n);
    change = Real(0);
    for (int k = 0; k <= K; ++k) {
      const Real c = abs(cur[k] - prev[k]);
      if (c > change) change = c;
    }
    n *= 2;
    if (change <= tol) return {std::move(cur), change, n};
    prev = std::move(cur);
  }
  std::ostringstream msg;
  msg << "legendre_moments: no convergence at " << n << " nodes per piece (d=" << d
      << ", K=" << K << ", last change=" << static_cast<double>(change)
      << ", tol=" << static_cast<double>(tol) << ")";
  throw NumericError(msg.str());
}

struct WeightedIntegral {
  double value = 0.0;
  double error_estimate = 0.0;
  int nodes = 0;
};

/// int_{-1}^{1} f(t) (1 - t^2)^{(d-3)/2} dt (unnormalized weight). Without
/// breakpoints a Gauss-Jacobi rule is used; with breakpoints each piece is
/// integrated in the angle variable. Nodes are doubled until two successive
/// results agree to 1e-12 relative.
template <class F>
WeightedIntegral integrate_weighted(F&& f, int d, std::span<const double> breakpoints, int n) {
  if (n < 1) throw DomainError("integrate_weighted: n must be >= 1");
  if (d < 2) throw DomainError("integrate_weighted: d must be >= 2");
  const double eps = std::numeric_limits<double>::epsilon();
  const double mass = density_norm(d);

  auto angle_rule = [&](int nodes, double& scale) {
    const auto& gl = gauss_legendre_cached<double>(nodes);
    const auto edges = detail::angle_edges<double>(breakpoints);
    CompensatedSum<double> acc;
    CompensatedSum<double> abs_acc;
    for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece) {
      const double half = 0.5 * (edges[piece + 1] - edges[piece]);
      const double mid = 0.5 * (edges[piece + 1] + edges[piece]);
      for (int i = 0; i < nodes; ++i) {
        const double th = mid + half * gl.nodes[i];
        const double w = half * gl.weights[i] * detail::int_pow(std::sin(th), d - 2);
        const double v = w * f(std::cos(th));
        acc.add(v);
        abs_acc.add(std::abs(v));
      }
    }
    scale = abs_acc.value();
    return acc.value();
  };
  auto jacobi_rule = [&](int nodes, double& scale) {
    const auto rule = gauss_jacobi(nodes, d, false);
    CompensatedSum<double> acc;
    CompensatedSum<double> abs_acc;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double v = rule.weights[i] * f(rule.nodes[i]);
      acc.add(v);
      abs_acc.add(std::abs(v));
    }
    scale = abs_acc.value();
    return acc.value();
  };

  const bool use_jacobi = breakpoints.empty();
  const int cap = use_jacobi ? 512 : (1 << 16);
  int m = std::min(n, cap / 2);
  double scale = mass;
  double prev = use_jacobi ? jacobi_rule(m, scale) : angle_rule(m, scale);
  while (2 * m <= cap) {
    const double cur = use_jacobi ? jacobi_rule(2 * m, scale) : angle_rule(2 * m, scale);
    const double change = std::abs(cur - prev);
    m *= 2;
    if (change <= 1e-12 * std::max(1.0, std::abs(cur))) {
      return {cur, std::max(change, 16.0 * eps * scale), m};
    }
    prev = cur;
  }
  if (use_jacobi) {
    // Smooth-weight rule did not settle; fall back to the angular rule.
    const double a = angle_rule(1024, scale);
    const double b = angle_rule(2048, scale);
    return {b, std::max(std::abs(b - a), 16.0 * eps * scale), 2048};
  }
  throw NumericError("integrate_weighted: no convergence within node cap");
}

// ---------------------------------------------------------------------------
// Gauss hypergeometric function
// ---------------------------------------------------------------------------

/// 2F1(p, q; u; z) from the Euler integral representation
///   Gamma(u) / (Gamma(q) Gamma(u-q)) int_0^1 t^{q-1} (1-t)^{u-q-1} (1-zt)^{-p} dt,
/// valid for u > q > 0 and z < 1. No analytic continuation outside that domain.
inline double gauss_2f1(double p, double q, double u, double z) {
  if (!(q > 0.0) || !(u > q) || !(z < 1.0) || !std::isfinite(p) || !std::isfinite(u) ||
      !std::isfinite(z)) {
    throw DomainError("gauss_2f1: integral representation needs u > q > 0 and z < 1");
  }
  if (z == 0.0 || p == 0.0) return 1.0;
  // Gamma(u) / (Gamma(q) Gamma(u-q)) = 1 / B(q, u-q): the value is the mean of
  // (1 - zt)^{-p} under the Beta(q, u-q) density, which keeps the integrand O(1).
  const double log_beta_qu = log_beta(q, u - q);
  auto integrand = [&](double t, double xc) {
    // Past the midpoint tanh-sinh passes xc = 1 - t exactly; before it xc = -t.
    const double tc = t < 0.5 ? 1.0 - t : xc;
    if (t <= 0.0 || tc <= 0.0) return 0.0;
    const double lt = std::log(t);
    const double ltc = std::log(tc);
    return std::exp((q - 1.0) * lt + (u - q - 1.0) * ltc - p * std::log1p(-z * t) -
                    log_beta_qu);
  };
  boost::math::quadrature::tanh_sinh<double> integrator(15);
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(integrand, 0.0, 1.0, 1e-15, &error, &l1);
  if (!(error <= 1e-11 * std::max(std::abs(value), 1e-300)) && !(error <= 1e-11 * l1)) {
    std::ostringstream msg;
    msg << "gauss_2f1: quadrature error " << error << " too large for (" << p << ", " << q
        << "; " << u << "; " << z << ")";
    throw NumericError(msg.str());
  }
  return value;
}

}  // namespace kwidth
