#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "kwidth/errors.hpp"

namespace kwidth {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Engine for (master seed, trial, stream). Independent of the order in which
/// trials are executed.
inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t trial,
                                   std::uint64_t stream) {
  const std::uint64_t s = mix64(mix64(mix64(master) ^ trial) ^ (stream * 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

/// n i.i.d. uniform points on S^{d-1} (rows), from normalized Gaussian draws.
inline Eigen::MatrixXd sample_sphere(int d, int n, std::mt19937_64& rng) {
  if (d < 2) throw DomainError("sample_sphere: d must be >= 2");
  if (n < 0) throw DomainError("sample_sphere: n must be >= 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int j = 0; j < d; ++j) {
        x(i, j) = normal(rng);
        norm2 += x(i, j) * x(i, j);
      }
    } while (norm2 == 0.0);
    x.row(i) /= std::sqrt(norm2);
  }
  return x;
}

inline Eigen::MatrixXd sample_sphere(int d, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_sphere: n must be >= 1");
  auto rng = make_stream(seed, 0, 0);
  return sample_sphere(d, n, rng);
}

}  // namespace kwidth
