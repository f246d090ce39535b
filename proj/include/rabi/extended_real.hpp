#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace rabi {

/// Real number with a double mantissa and a separate 64-bit binary exponent.
///
/// Value is mantissa * 2^exp2 with |mantissa| in [1, 2), or exactly zero.
/// Only the magnitude range is extended; precision stays at 53 bits.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;
  ExtendedReal(double value);  // NOLINT(google-explicit-constructor)

  static ExtendedReal from_parts(double mantissa, std::int64_t exp2);
  /// exp2 of value = sign * 2^log2_magnitude; handy for factorial-like growth.
  static ExtendedReal from_log2(double log2_magnitude, int sign = 1);

  double mantissa() const { return mantissa_; }
  std::int64_t exp2() const { return exp2_; }

  bool is_zero() const { return mantissa_ == 0.0; }
  int sign() const { return mantissa_ > 0.0 ? 1 : (mantissa_ < 0.0 ? -1 : 0); }

  /// log2(|value|); -infinity for zero.
  double log2_abs() const;
  /// Nearest double; saturates to +-inf or 0 outside the double range.
  double to_double() const;
  ExtendedReal abs() const { return from_parts(std::fabs(mantissa_), exp2_); }

  ExtendedReal operator-() const { return from_parts(-mantissa_, exp2_); }
  ExtendedReal& operator+=(const ExtendedReal& rhs);
  ExtendedReal& operator-=(const ExtendedReal& rhs) { return *this += -rhs; }
  ExtendedReal& operator*=(const ExtendedReal& rhs);
  ExtendedReal& operator/=(const ExtendedReal& rhs);

  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) { return a += b; }
  friend ExtendedReal operator-(ExtendedReal a, const ExtendedReal& b) { return a -= b; }
  friend ExtendedReal operator*(ExtendedReal a, const ExtendedReal& b) { return a *= b; }
  friend ExtendedReal operator/(ExtendedReal a, const ExtendedReal& b) { return a /= b; }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.mantissa_ == b.mantissa_ && (a.is_zero() || a.exp2_ == b.exp2_);
  }
  /// Compares magnitudes only.
  static bool abs_less(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b);

  std::string to_string() const;

private:
  ExtendedReal(double mantissa, std::int64_t exp2, int /*raw tag*/)
      : mantissa_(mantissa), exp2_(exp2) {}
  void normalize();

  double mantissa_ = 0.0;
  std::int64_t exp2_ = 0;
};

inline ExtendedReal abs(const ExtendedReal& x) { return x.abs(); }

/// max(|a|, |b|) as an unsigned ExtendedReal.
inline ExtendedReal max_abs(const ExtendedReal& a, const ExtendedReal& b) {
  return ExtendedReal::abs_less(a, b) ? b.abs() : a.abs();
}

/// |a| / |b| as a double (saturating); 0 when a is zero.
double abs_ratio(const ExtendedReal& a, const ExtendedReal& b);

}  // namespace rabi
