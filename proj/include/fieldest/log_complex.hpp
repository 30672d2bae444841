#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace fieldest {

/// Complex number stored as (log |z|, arg z). Products and integer powers
/// stay exact across magnitudes far outside the double range; zero is
/// represented by log_magnitude = -inf.
class LogComplex {
 public:
  LogComplex() = default;  // zero
  LogComplex(double log_magnitude, double phase) : log_mag_(log_magnitude), phase_(wrap(phase)) {}

  static LogComplex from_complex(std::complex<double> z) {
    if (z == std::complex<double>{}) return {};
    return {std::log(std::abs(z)), std::arg(z)};
  }

  static LogComplex one() { return {0.0, 0.0}; }

  double log_magnitude() const { return log_mag_; }
  double phase() const { return phase_; }
  bool is_zero() const { return log_mag_ == -std::numeric_limits<double>::infinity(); }

  /// Converts back to a double-precision complex; underflows to zero.
  std::complex<double> to_complex() const {
    if (is_zero()) return {};
    return std::polar(std::exp(log_mag_), phase_);
  }

  LogComplex& operator*=(const LogComplex& o) {
    if (is_zero() || o.is_zero()) return *this = LogComplex{};
    log_mag_ += o.log_mag_;
    phase_ = wrap(phase_ + o.phase_);
    return *this;
  }

  friend LogComplex operator*(LogComplex a, const LogComplex& b) { return a *= b; }

  /// z^n for n >= 0, with the phase accumulated as n·arg z.
  LogComplex pow(long long n) const {
    if (n == 0) return one();
    if (is_zero()) return {};
    const double nd = static_cast<double>(n);
    return {nd * log_mag_, nd * phase_};
  }

 private:
  static double wrap(double phase) {
    if (!std::isfinite(phase)) return phase;
    return std::remainder(phase, 2.0 * std::numbers::pi);
  }

  double log_mag_ = -std::numeric_limits<double>::infinity();
  double phase_ = 0.0;
};

}  // namespace fieldest
