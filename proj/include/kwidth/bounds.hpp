#pragma once

// Reference rate curves to overlay on computed trace-decay curves. Unless a
// constant is stated as certified, the hidden constants are set to 1 and the
// curve only fixes the slope.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "kwidth/errors.hpp"
#include "kwidth/mathcore.hpp"

namespace kwidth {

enum class BoundDirection { lower, upper };

inline const char* direction_name(BoundDirection d) {
  return d == BoundDirection::lower ? "lower" : "upper";
}

struct BoundCurve {
  std::string label;
  int dimension = 0;
  double alpha_or_r = 0.0;
  std::vector<std::uint64_t> m_values;
  std::vector<double> values;
  BoundDirection direction = BoundDirection::lower;
  std::string validity;
};

namespace detail {

inline double positive_m(std::uint64_t m) { return static_cast<double>(std::max<std::uint64_t>(m, 1)); }

}  // namespace detail

/// C m^{-(2 alpha + 1)/(d - 1)} with C = 1/d at alpha = 0 (certified) and
/// C = 1 otherwise. m = 0 is evaluated at m = 1.
inline BoundCurve relu_alpha_lower(int d, int alpha, const std::vector<std::uint64_t>& m_values) {
  if (d < 3) throw DomainError("relu_alpha_lower: d must be >= 3");
  if (alpha < 0) throw DomainError("relu_alpha_lower: alpha must be >= 0");
  BoundCurve c;
  c.label = "relu_alpha_lower";
  c.dimension = d;
  c.alpha_or_r = alpha;
  c.m_values = m_values;
  c.direction = BoundDirection::lower;
  const double s = (2.0 * alpha + 1.0) / (d - 1.0);
  const double constant = alpha == 0 ? 1.0 / d : 1.0;
  c.validity = alpha == 0 ? "constant 1/d certified; m <= 2^d"
                          : "reference slope; constant uncertified; m <= 2^d";
  for (auto m : m_values) c.values.push_back(constant * std::pow(detail::positive_m(m), -s));
  return c;
}

/// d / m for smooth activations, constant 1.
inline BoundCurve smooth_upper(int d, const std::vector<std::uint64_t>& m_values) {
  if (d < 2) throw DomainError("smooth_upper: d must be >= 2");
  BoundCurve c;
  c.label = "smooth_upper";
  c.dimension = d;
  c.alpha_or_r = 0.0;
  c.m_values = m_values;
  c.direction = BoundDirection::upper;
  c.validity = "reference slope; absolute constant hidden; smooth sigma with derivative growth <= k!";
  for (auto m : m_values) c.values.push_back(d / detail::positive_m(m));
  return c;
}

inline double arctan_upper_exponent(double r) {
  if (!(r > 0.0)) throw DomainError("arctan_upper: r must be positive");
  return std::min(0.5, 1.0 / (r * r));
}

/// d^4 r^2 / m^{min(1/2, r^-2)}, constant 1.
inline BoundCurve arctan_upper(int d, double r, const std::vector<std::uint64_t>& m_values) {
  if (d < 2) throw DomainError("arctan_upper: d must be >= 2");
  const double s = arctan_upper_exponent(r);
  BoundCurve c;
  c.label = "arctan_upper";
  c.dimension = d;
  c.alpha_or_r = r;
  c.m_values = m_values;
  c.direction = BoundDirection::upper;
  c.validity = "reference slope; absolute constant hidden; gamma + |b| <= r";
  const double lead = std::pow(static_cast<double>(d), 4) * r * r;
  for (auto m : m_values) c.values.push_back(lead * std::pow(detail::positive_m(m), -s));
  return c;
}

/// sup_k L(k) / L((d + 1) k) for the power law L(m) = m^{-s}: exactly (d + 1)^s.
inline double q_factor(double power_s, int d) {
  if (!(power_s >= 0.0)) throw DomainError("q_factor: s must be non-negative");
  if (d < 1) throw DomainError("q_factor: d must be >= 1");
  return std::pow(d + 1.0, power_s);
}

/// B_k^2 / 2^{2k} * Gamma(d/2)^2 / Gamma(k + d/2)^2.
inline double smooth_mu_upper(int d, int k, double b_k) {
  if (d < 2 || k < 0) throw DomainError("smooth_mu_upper: need d >= 2 and k >= 0");
  if (!(b_k > 0.0)) throw DomainError("smooth_mu_upper: B_k must be positive");
  const double log_v = 2.0 * (std::log(b_k) - k * std::log(2.0) + log_gamma(0.5 * d) -
                              log_gamma(k + 0.5 * d));
  return std::exp(log_v);
}

/// Default derivative envelope B_k = Gamma(k + 1).
inline double smooth_mu_upper(int d, int k) {
  return smooth_mu_upper(d, k, std::exp(log_gamma(k + 1.0)));
}

/// Large-r lower bounds for smooth activations carry only existential
/// constants; they are reported as regime notes, never as curves.
struct RegimeNote {
  std::string label;
  std::string regime;
  std::string claim;
};

inline std::vector<RegimeNote> smooth_large_r_regimes() {
  return {
      {"smooth_large_r_lower", "m <= 2^d and r >= d^{C_1(beta)}",
       "omega_m >= d^{-C_2}: curse of dimensionality for smooth sigma at polynomially large r"},
      {"arctan_large_r_lower", "sigma = arctan, r = d^a with a > 1/2, m <= d^{-C_1} 2^{C_2(a) d^{2a-1}}",
       "omega_m >= d^{-3}"},
  };
}

}  // namespace kwidth
