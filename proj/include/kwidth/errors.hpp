#pragma once

#include <stdexcept>
#include <string>

namespace kwidth {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Result does not fit the integer type used to report it.
class OverflowError : public std::overflow_error {
 public:
  explicit OverflowError(const std::string& what) : std::overflow_error(what) {}
};

/// A numerical procedure (quadrature, eigen-solver) failed to converge.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A configured resource cap (degree cap, node cap) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// A spectrum was built for fewer eigenvalues than the caller asked about.
class StaleSpectrumError : public std::runtime_error {
 public:
  explicit StaleSpectrumError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kwidth
