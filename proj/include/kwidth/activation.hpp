#pragma once

// Activation catalog with the scale/bias transform sigma(gamma * t + b).

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "kwidth/errors.hpp"

namespace kwidth {

enum class Kind { step, relu_alpha, sigmoid, arctan, softplus, silu, sin, cos };

inline std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::step: return "step";
    case Kind::relu_alpha: return "relu";
    case Kind::sigmoid: return "sigmoid";
    case Kind::arctan: return "arctan";
    case Kind::softplus: return "softplus";
    case Kind::silu: return "silu";
    case Kind::sin: return "sin";
    case Kind::cos: return "cos";
  }
  return "?";
}

inline std::optional<Kind> parse_kind(std::string_view s) {
  if (s == "step" || s == "heaviside") return Kind::step;
  if (s == "relu" || s == "relu_alpha") return Kind::relu_alpha;
  if (s == "sigmoid") return Kind::sigmoid;
  if (s == "arctan" || s == "atan") return Kind::arctan;
  if (s == "softplus") return Kind::softplus;
  if (s == "silu" || s == "swish") return Kind::silu;
  if (s == "sin") return Kind::sin;
  if (s == "cos") return Kind::cos;
  return std::nullopt;
}

/// Kinds whose activation has a kink or jump at gamma * t + b = 0.
inline bool is_nonsmooth(Kind k) { return k == Kind::step || k == Kind::relu_alpha; }

struct ActivationSpec {
  Kind kind = Kind::step;
  int alpha = 0;  ///< exponent of ReLU^alpha; step is alpha = 0
  double gamma = 1.0;
  double bias = 0.0;

  ActivationSpec() = default;
  ActivationSpec(Kind k, int a, double g, double b) : kind(k), alpha(a), gamma(g), bias(b) {
    validate();
  }

  static ActivationSpec step(double g = 1.0, double b = 0.0) { return {Kind::step, 0, g, b}; }
  static ActivationSpec relu(int a = 1, double g = 1.0, double b = 0.0) {
    return {Kind::relu_alpha, a, g, b};
  }
  static ActivationSpec smooth(Kind k, double g = 1.0, double b = 0.0) { return {k, 0, g, b}; }

  ActivationSpec with_scale_bias(double g, double b) const { return {kind, alpha, g, b}; }

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw DomainError("activation: gamma must be positive and finite");
    }
    if (!std::isfinite(bias)) throw DomainError("activation: bias must be finite");
    if (alpha < 0) throw DomainError("activation: alpha must be a non-negative integer");
    if (kind == Kind::step && alpha != 0) throw DomainError("activation: step has alpha = 0");
  }

  /// "kind:alpha:gamma:bias", e.g. "relu:1:1.0:0.0".
  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << kind_name(kind) << ':' << alpha << ':' << gamma << ':' << bias;
    return os.str();
  }

  friend bool operator==(const ActivationSpec&, const ActivationSpec&) = default;
};

/// Parses "kind:alpha:gamma:bias". Trailing fields may be omitted and default
/// to alpha = 0 (1 for relu), gamma = 1, bias = 0.
inline ActivationSpec parse_activation(std::string_view text) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  if (fields.empty() || fields.size() > 4) {
    throw DomainError("activation string must be kind:alpha:gamma:bias, got '" +
                      std::string(text) + "'");
  }
  const auto kind = parse_kind(fields[0]);
  if (!kind) throw DomainError("unknown activation kind '" + fields[0] + "'");

  auto parse_number = [&](const std::string& s, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) {
      throw DomainError(std::string("activation: cannot parse ") + what + " from '" + s + "'");
    }
    return v;
  };

  int alpha = *kind == Kind::relu_alpha ? 1 : 0;
  double gamma = 1.0;
  double bias = 0.0;
  if (fields.size() > 1) {
    const double a = parse_number(fields[1], "alpha");
    if (a < 0 || a != std::floor(a) || a > 64) {
      throw DomainError("activation: alpha must be a small non-negative integer");
    }
    alpha = static_cast<int>(a);
  }
  if (fields.size() > 2) gamma = parse_number(fields[2], "gamma");
  if (fields.size() > 3) bias = parse_number(fields[3], "bias");
  if (*kind != Kind::relu_alpha && *kind != Kind::step && alpha != 0) {
    throw DomainError("activation: alpha is only meaningful for relu");
  }
  return ActivationSpec(*kind, alpha, gamma, bias);
}

/// sigma(gamma * t + b). Templated so quadrature can run in extended precision.
template <class Real = double>
Real eval(const ActivationSpec& spec, const Real& t) {
  using std::atan;
  using std::cos;
  using std::exp;
  using std::log1p;
  using std::sin;
  const Real z = Real(spec.gamma) * t + Real(spec.bias);
  switch (spec.kind) {
    case Kind::step:
      return z >= Real(0) ? Real(1) : Real(0);
    case Kind::relu_alpha: {
      if (spec.alpha == 0) return z >= Real(0) ? Real(1) : Real(0);
      if (!(z > Real(0))) return Real(0);
      Real r = z;
      for (int i = 1; i < spec.alpha; ++i) r *= z;
      return r;
    }
    case Kind::sigmoid:
      if (z >= Real(0)) return Real(1) / (Real(1) + exp(-z));
      return exp(z) / (Real(1) + exp(z));
    case Kind::arctan:
      return atan(z);
    case Kind::softplus:
      return (z > Real(0) ? z : Real(0)) + log1p(exp(z > Real(0) ? Real(-z) : z));
    case Kind::silu:
      if (z >= Real(0)) return z / (Real(1) + exp(-z));
      return z * exp(z) / (Real(1) + exp(z));
    case Kind::sin:
      return sin(z);
    case Kind::cos:
      return cos(z);
  }
  return Real(0);
}

/// t* = -b / gamma for nonsmooth kinds when it lies in (-1, 1).
inline std::vector<double> kink_points(const ActivationSpec& spec) {
  if (!is_nonsmooth(spec.kind)) return {};
  const double t = -spec.bias / spec.gamma;
  if (t > -1.0 && t < 1.0) return {t};
  return {};
}

/// Arc-cosine kernel kappa(t) of the step (alpha = 0) and ReLU (alpha = 1)
/// activations under the uniform distribution on S^{d-1}.
inline double closed_form_kappa(int alpha, int d, double t) {
  if (alpha != 0 && alpha != 1) throw DomainError("closed_form_kappa: alpha must be 0 or 1");
  if (d < 2) throw DomainError("closed_form_kappa: d must be >= 2");
  if (!(std::abs(t) <= 1.0)) throw DomainError("closed_form_kappa: |t| must be <= 1");
  const double pi = boost::math::constants::pi<double>();
  const double angle = pi - std::acos(t);
  if (alpha == 0) return angle / (2.0 * pi);
  return (angle * t + std::sqrt(std::max(0.0, 1.0 - t * t))) / (2.0 * pi * d);
}

/// k-th derivative in t of sigma(gamma t + b) for the kinds where it is
/// elementary (sin, cos).
template <class Real = double>
Real eval_derivative(const ActivationSpec& spec, int k, const Real& t) {
  using std::cos;
  using std::pow;
  using std::sin;
  const Real z = Real(spec.gamma) * t + Real(spec.bias);
  const Real scale = pow(Real(spec.gamma), k);
  const Real shift = boost::math::constants::half_pi<Real>() * Real(k);
  switch (spec.kind) {
    case Kind::sin: return scale * sin(z + shift);
    case Kind::cos: return scale * cos(z + shift);
    default: break;
  }
  throw DomainError("eval_derivative: closed-form derivatives only for sin and cos");
}

}  // namespace kwidth
