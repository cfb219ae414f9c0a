#pragma once

#include <array>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sharpext {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// A point of C^n for n <= 2. Planar points leave z2 at zero.
struct Point {
  cplx z1{};
  cplx z2{};

  Point() = default;
  Point(cplx a) : z1(a) {}  // NOLINT(google-explicit-constructor)
  Point(cplx a, cplx b) : z1(a), z2(b) {}

  double norm2() const { return std::norm(z1) + std::norm(z2); }
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (domain specs, problem files, flags).
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its stated accuracy.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A theorem hypothesis was found to be violated on the sampled data.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Real-valued field on C^n. `z1_only` marks fields that ignore z2, which lets
/// fibered C^2 quadrature locate level sets in the base variable alone.
struct ScalarField {
  std::function<double(const Point&)> eval;
  bool z1_only = false;

  double operator()(const Point& p) const { return eval(p); }
  explicit operator bool() const { return static_cast<bool>(eval); }
};

inline ScalarField zero_field() {
  return {[](const Point&) { return 0.0; }, true};
}

}  // namespace sharpext
