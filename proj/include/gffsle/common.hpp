#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gffsle {

using Point = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt3 = std::numbers::sqrt3;

/// Boundary height of the two-arc problem whose chordal interface scales to SLE4.
inline const double kCriticalLambda = std::sqrt(kPi / 8.0);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or query outside the object's domain of definition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A linear solve, factorization or integration failed its accuracy check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A point was absorbed by the Loewner hull before the requested time.
class SwallowedError : public Error {
 public:
  SwallowedError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace gffsle
