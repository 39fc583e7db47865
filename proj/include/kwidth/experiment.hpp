#pragma once

// Monte-Carlo separation experiments: least-squares fits of a single neuron
// by fixed random features, the exact average error of optimal features on
// the circle, and the r-dependence of the sup trace decay.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kwidth/activation.hpp"
#include "kwidth/errors.hpp"
#include "kwidth/mathcore.hpp"
#include "kwidth/random.hpp"
#include "kwidth/spectrum.hpp"

namespace kwidth {

enum class FeatureKind { random_neuron, spherical_harmonic_proxy };
enum class DirectionChoice { fixed_e1, random };

inline const char* feature_kind_name(FeatureKind k) {
  return k == FeatureKind::random_neuron ? "random_neuron" : "spherical_harmonic_proxy";
}
inline const char* direction_name(DirectionChoice c) {
  return c == DirectionChoice::fixed_e1 ? "e1" : "random";
}

struct SeparationConfig {
  int dimension = 20;
  ActivationSpec target = ActivationSpec::step();
  DirectionChoice direction = DirectionChoice::fixed_e1;
  int feature_count = 64;
  FeatureKind feature_kind = FeatureKind::random_neuron;
  int train_samples = 0;  ///< 0 selects max(20 m, 100)
  int test_samples = 0;   ///< 0 selects 4 n
  double ridge = 1e-10;
  std::uint64_t seed = 0;
  int trials = 20;
  bool force_direction = false;  ///< diagnostic: the first feature uses the target direction

  int train_count() const {
    return train_samples > 0 ? train_samples : std::max(20 * feature_count, 100);
  }
  int test_count() const { return test_samples > 0 ? test_samples : 4 * train_count(); }
  bool underdetermined() const { return train_count() < feature_count; }

  void validate() const {
    if (dimension < 2) throw DomainError("separation: d must be >= 2");
    if (feature_count < 0) throw DomainError("separation: m must be >= 0");
    if (train_samples < 0 || test_samples < 0) throw DomainError("separation: sample counts must be >= 0");
    if (!(ridge >= 0.0)) throw DomainError("separation: ridge must be non-negative");
    if (trials < 1) throw DomainError("separation: trials must be >= 1");
    target.validate();
  }
};

struct SeparationReport {
  SeparationConfig config;
  std::vector<double> errors;  ///< test mean squared error per trial
  double mean_error = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(trials)
  double lambda_m = std::numeric_limits<double>::quiet_NaN();
  bool underdetermined = false;
  int min_norm_trials = 0;  ///< trials solved by the minimum-norm fallback
  int rank_deficient_trials = 0;

  /// Mean error is at least Lambda(m) up to `sigmas` standard errors.
  bool respects_lower_bound(double sigmas = 3.0) const {
    return mean_error >= lambda_m - sigmas * std_error;
  }
};

namespace detail {

enum Stream : std::uint64_t { features = 0, train = 1, test = 2, direction = 3 };

inline Eigen::VectorXd target_direction(const SeparationConfig& cfg, std::uint64_t trial) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg.dimension);
  if (cfg.direction == DirectionChoice::fixed_e1) {
    v[0] = 1.0;
    return v;
  }
  auto rng = make_stream(cfg.seed, trial, Stream::direction);
  return sample_sphere(cfg.dimension, 1, rng).row(0).transpose();
}

inline Eigen::VectorXd neuron_values(const ActivationSpec& spec, const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& v) {
  const Eigen::VectorXd z = x * v;
  Eigen::VectorXd y(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) y[i] = eval<double>(spec, std::clamp(z[i], -1.0, 1.0));
  return y;
}

/// Degrees of the m leading eigenfunctions of the kernel, one entry per
/// eigenfunction, in the canonical descending order.
inline std::vector<int> leading_degrees(const ActivationSpec& spec, int d, int m) {
  std::vector<int> out;
  if (m == 0) return out;
  const auto ks = build_spectrum(spec, d, static_cast<std::uint64_t>(m));
  for (int k : degree_order(ks.mu)) {
    for (std::uint64_t j = 0; j < ks.mult[k] && static_cast<int>(out.size()) < m; ++j) out.push_back(k);
    if (static_cast<int>(out.size()) >= m) break;
  }
  return out;
}

struct Features {
  Eigen::MatrixXd w;        ///< m x d directions
  std::vector<int> degree;  ///< harmonic proxy only
};

inline Features draw_features(const SeparationConfig& cfg, std::uint64_t trial,
                              const Eigen::VectorXd& v, const std::vector<int>& degrees) {
  Features f;
  const int m = cfg.feature_count;
  auto rng = make_stream(cfg.seed, trial, Stream::features);
  f.w = m > 0 ? sample_sphere(cfg.dimension, m, rng) : Eigen::MatrixXd(0, cfg.dimension);
  if (cfg.force_direction && m > 0) f.w.row(0) = v.transpose();
  f.degree = degrees;
  return f;
}

inline Eigen::MatrixXd feature_matrix(const SeparationConfig& cfg, const Features& f,
                                      const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd z = x * f.w.transpose();
  Eigen::MatrixXd phi(z.rows(), z.cols());
  if (cfg.feature_kind == FeatureKind::random_neuron) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        phi(i, j) = eval<double>(cfg.target, std::clamp(z(i, j), -1.0, 1.0));
      }
    }
    return phi;
  }
  const int kmax = f.degree.empty() ? 0 : *std::max_element(f.degree.begin(), f.degree.end());
  const LegendreEvaluator<double> ev(cfg.dimension, kmax);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      phi(i, j) = ev(f.degree[j], std::clamp(z(i, j), -1.0, 1.0));
    }
  }
  return phi;
}

struct FitResult {
  Eigen::VectorXd coef;
  bool min_norm = false;
  bool rank_deficient = false;
};

inline FitResult least_squares(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double ridge) {
  FitResult r;
  if (ridge > 0.0) {
    Eigen::MatrixXd gram = phi.transpose() * phi;
    gram.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      r.coef = llt.solve(phi.transpose() * y);
      return r;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(phi);
  r.coef = cod.solve(y);
  r.min_norm = true;
  r.rank_deficient = cod.rank() < phi.cols();
  return r;
}

}  // namespace detail

/// Test mean squared error of the least-squares fit of sigma(gamma v.x + b)
/// by m fixed features, per trial, with Lambda(m) for comparison.
inline SeparationReport random_feature_fit(const SeparationConfig& cfg) {
  cfg.validate();
  const int d = cfg.dimension;
  const int m = cfg.feature_count;
  const int n = cfg.train_count();
  const int n_test = cfg.test_count();

  SeparationReport rep;
  rep.config = cfg;
  rep.underdetermined = cfg.underdetermined();

  std::vector<int> degrees;
  if (cfg.feature_kind == FeatureKind::spherical_harmonic_proxy) {
    degrees = detail::leading_degrees(cfg.target, d, m);
  }

  for (int t = 0; t < cfg.trials; ++t) {
    const auto trial = static_cast<std::uint64_t>(t);
    const Eigen::VectorXd v = detail::target_direction(cfg, trial);
    auto rng_train = make_stream(cfg.seed, trial, detail::Stream::train);
    auto rng_test = make_stream(cfg.seed, trial, detail::Stream::test);
    const Eigen::MatrixXd x_test = sample_sphere(d, n_test, rng_test);
    const Eigen::VectorXd y_test = detail::neuron_values(cfg.target, x_test, v);

    double err = 0.0;
    if (m == 0) {
      err = y_test.squaredNorm() / n_test;
    } else {
      const Eigen::MatrixXd x_train = sample_sphere(d, n, rng_train);
      const Eigen::VectorXd y_train = detail::neuron_values(cfg.target, x_train, v);
      const auto feats = detail::draw_features(cfg, trial, v, degrees);
      const auto fit = detail::least_squares(detail::feature_matrix(cfg, feats, x_train), y_train, cfg.ridge);
      rep.min_norm_trials += fit.min_norm ? 1 : 0;
      rep.rank_deficient_trials += fit.rank_deficient ? 1 : 0;
      const Eigen::VectorXd resid = y_test - detail::feature_matrix(cfg, feats, x_test) * fit.coef;
      err = resid.squaredNorm() / n_test;
    }
    rep.errors.push_back(err);
  }

  CompensatedSum<double> s;
  for (double e : rep.errors) s.add(e);
  rep.mean_error = s.value() / cfg.trials;
  if (cfg.trials > 1) {
    CompensatedSum<double> v;
    for (double e : rep.errors) v.add((e - rep.mean_error) * (e - rep.mean_error));
    rep.std_error = std::sqrt(v.value() / (cfg.trials - 1) / cfg.trials);
  }

  const auto ks = build_spectrum(cfg.target, d, static_cast<std::uint64_t>(std::max(m, 1)));
  rep.lambda_m = trace_decay(ks, {static_cast<std::uint64_t>(m)}).lambda_values[0];
  return rep;
}

/// Average over target directions of the best L2 error with the m leading
/// Fourier modes on S^1, by Parseval: ||sigma||^2 minus the selected mode
/// energies. Mode energies come from the cosine coefficients on a uniform grid.
inline double harmonic_average_error(int d, const ActivationSpec& spec, int m,
                                     int n_grid = 1 << 22) {
  if (d != 2) throw DomainError("harmonic_average_error: eigenfunctions are explicit only for d = 2");
  if (m < 0) throw DomainError("harmonic_average_error: m must be >= 0");
  const int K = std::max(8, m + 8);
  if (n_grid < 4 * K) throw DomainError("harmonic_average_error: n_grid too small for m");
  const auto a = fourier_coefficients_d2(spec, K, n_grid);

  // ||sigma||^2 on the same grid, with the same jump convention.
  const double two_pi = 2.0 * boost::math::constants::pi<double>();
  const bool jumps = spec.kind == Kind::step || (spec.kind == Kind::relu_alpha && spec.alpha == 0);
  const double jump_tol = 1e-12 * (spec.gamma + std::abs(spec.bias));
  CompensatedSum<double> norm2;
  for (int j = 0; j < n_grid; ++j) {
    const double t = std::cos(two_pi * j / n_grid);
    const double z = spec.gamma * t + spec.bias;
    // At a jump the trapezoid takes the mean of the one-sided squares.
    if (jumps && std::abs(z) <= jump_tol) {
      norm2.add(0.5);
    } else {
      const double v = eval<double>(spec, t);
      norm2.add(v * v);
    }
  }

  // Each direction-averaged mode carries a_k^2: one constant mode, then a
  // cosine and a sine mode per k >= 1.
  std::vector<double> energy;
  std::vector<int> deg;
  energy.push_back(a[0] * a[0]);
  deg.push_back(0);
  for (int k = 1; k <= K; ++k) {
    for (int rep = 0; rep < 2; ++rep) {
      energy.push_back(a[k] * a[k]);
      deg.push_back(k);
    }
  }
  std::vector<std::size_t> order(energy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return energy[x] > energy[y]; });
  CompensatedSum<double> kept;
  for (int i = 0; i < m; ++i) kept.add(energy[order[i]]);
  return std::max(0.0, norm2.value() / n_grid - kept.value());
}

// ---------------------------------------------------------------------------
// r-trend
// ---------------------------------------------------------------------------

struct RTrendRow {
  double r = 0.0;
  double slope = 0.0;  ///< log-log slope of Lambda_r over the top decade below m_probe
  double lambda_at_probe = 0.0;
  bool argmax_all_r0 = true;
  SupTraceDecay sup;
};

struct RTrendStudy {
  Kind kind = Kind::arctan;
  int dimension = 0;
  std::uint64_t m_probe = 0;
  std::vector<RTrendRow> rows;
  std::vector<std::string> warnings;

  /// |slope| non-increasing along the r values as given.
  bool slope_magnitude_nonincreasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (std::abs(rows[i].slope) > std::abs(rows[i - 1].slope)) return false;
    }
    return true;
  }
};

inline RTrendStudy r_trend_study(Kind kind, int d, const std::vector<double>& r_values,
                                 std::uint64_t m_probe, int grid_size = 4, int per_decade = 10) {
  if (kind != Kind::arctan && kind != Kind::sigmoid && kind != Kind::silu && kind != Kind::softplus) {
    throw DomainError("r_trend_study: kind must be arctan, sigmoid, silu or softplus");
  }
  if (m_probe < 10) throw DomainError("r_trend_study: m_probe must be >= 10");
  RTrendStudy study;
  study.kind = kind;
  study.dimension = d;
  study.m_probe = m_probe;
  const auto ms = log_spaced_m(m_probe, per_decade);
  for (double r : r_values) {
    RTrendRow row;
    row.r = r;
    row.sup = sup_trace_decay(kind, 0, r, d, grid_size, ms);
    row.slope = top_decade_slope(ms, row.sup.sup_curve);
    row.lambda_at_probe = row.sup.sup_curve.back();
    for (std::size_t i = 0; i < ms.size(); ++i) row.argmax_all_r0 = row.argmax_all_r0 && row.sup.argmax_is_r0(i);
    if (!row.argmax_all_r0) {
      study.warnings.push_back(std::string(kind_name(kind)) + " d=" + std::to_string(d) +
                               " r=" + std::to_string(r) + ": grid argmax differs from (r,0) at some m");
    }
    study.rows.push_back(std::move(row));
  }
  return study;
}

}  // namespace kwidth
