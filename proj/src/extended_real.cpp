#include "rabi/extended_real.hpp"

#include <cstdio>
#include <limits>

namespace rabi {

namespace {

// Exponent gap beyond which the smaller addend cannot affect a 53-bit mantissa.
constexpr std::int64_t kAlignLimit = 64;

}  // namespace

ExtendedReal::ExtendedReal(double value) : mantissa_(value), exp2_(0) { normalize(); }

ExtendedReal ExtendedReal::from_parts(double mantissa, std::int64_t exp2) {
  ExtendedReal r(mantissa, exp2, 0);
  r.normalize();
  return r;
}

ExtendedReal ExtendedReal::from_log2(double log2_magnitude, int sign) {
  if (sign == 0) return {};
  const double whole = std::floor(log2_magnitude);
  const double frac = log2_magnitude - whole;
  return from_parts(sign > 0 ? std::exp2(frac) : -std::exp2(frac),
                    static_cast<std::int64_t>(whole));
}

void ExtendedReal::normalize() {
  if (mantissa_ == 0.0 || !std::isfinite(mantissa_)) {
    if (mantissa_ == 0.0) exp2_ = 0;
    return;
  }
  int e = 0;
  const double m = std::frexp(mantissa_, &e);  // |m| in [0.5, 1)
  mantissa_ = 2.0 * m;
  exp2_ += e - 1;
}

double ExtendedReal::log2_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return std::log2(std::fabs(mantissa_)) + static_cast<double>(exp2_);
}

double ExtendedReal::to_double() const {
  if (is_zero()) return 0.0;
  if (exp2_ > std::numeric_limits<double>::max_exponent)
    return sign() * std::numeric_limits<double>::infinity();
  if (exp2_ < std::numeric_limits<double>::min_exponent - 60) return 0.0 * sign();
  return std::ldexp(mantissa_, static_cast<int>(exp2_));
}

ExtendedReal& ExtendedReal::operator+=(const ExtendedReal& rhs) {
  if (rhs.is_zero()) return *this;
  if (is_zero()) return *this = rhs;
  const std::int64_t gap = exp2_ - rhs.exp2_;
  if (gap > kAlignLimit) return *this;
  if (gap < -kAlignLimit) return *this = rhs;
  if (gap >= 0) {
    mantissa_ += std::ldexp(rhs.mantissa_, static_cast<int>(-gap));
  } else {
    mantissa_ = std::ldexp(mantissa_, static_cast<int>(gap)) + rhs.mantissa_;
    exp2_ = rhs.exp2_;
  }
  normalize();
  return *this;
}

ExtendedReal& ExtendedReal::operator*=(const ExtendedReal& rhs) {
  if (is_zero() || rhs.is_zero()) return *this = ExtendedReal{};
  mantissa_ *= rhs.mantissa_;
  exp2_ += rhs.exp2_;
  normalize();
  return *this;
}

ExtendedReal& ExtendedReal::operator/=(const ExtendedReal& rhs) {
  if (rhs.is_zero()) {
    mantissa_ = mantissa_ / 0.0;
    return *this;
  }
  if (is_zero()) return *this;
  mantissa_ /= rhs.mantissa_;
  exp2_ -= rhs.exp2_;
  normalize();
  return *this;
}

bool ExtendedReal::abs_less(const ExtendedReal& a, const ExtendedReal& b) {
  if (b.is_zero()) return false;
  if (a.is_zero()) return true;
  if (a.exp2_ != b.exp2_) return a.exp2_ < b.exp2_;
  return std::fabs(a.mantissa_) < std::fabs(b.mantissa_);
}

bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
  const int sa = a.sign();
  const int sb = b.sign();
  if (sa != sb) return sa < sb;
  if (sa == 0) return false;
  return sa > 0 ? ExtendedReal::abs_less(a, b) : ExtendedReal::abs_less(b, a);
}

std::string ExtendedReal::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17gp%lld", mantissa_, static_cast<long long>(exp2_));
  return buf;
}

double abs_ratio(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.is_zero()) return 0.0;
  return (a.abs() / b.abs()).to_double();
}

}  // namespace rabi
