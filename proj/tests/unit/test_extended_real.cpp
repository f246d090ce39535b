#include <cmath>
#include <random>

#include "doctest.h"
#include "rabi/extended_real.hpp"

using rabi::ExtendedReal;

namespace {

bool normalized(const ExtendedReal& x) {
  if (x.is_zero()) return x.exp2() == 0;
  const double m = std::fabs(x.mantissa());
  return m >= 1.0 && m < 2.0;
}

}  // namespace

TEST_CASE("zero is exact and absorbing") {
  ExtendedReal z;
  CHECK(z.is_zero());
  CHECK(z.sign() == 0);
  CHECK((z * ExtendedReal(1e300)).is_zero());
  CHECK((z + ExtendedReal(3.5)).to_double() == 3.5);
  CHECK((ExtendedReal(2.0) - ExtendedReal(2.0)).is_zero());
  CHECK(std::isinf(z.log2_abs()));
}

TEST_CASE("mantissa stays in [1,2)") {
  for (double v : {1.0, 1.5, 0.75, -3.0, 1e-300, -7e299, 6.0}) {
    const ExtendedReal x(v);
    CHECK(normalized(x));
    CHECK(x.to_double() == v);
  }
  CHECK(ExtendedReal(6.0).mantissa() == 1.5);
  CHECK(ExtendedReal(6.0).exp2() == 2);
}

TEST_CASE("products beyond double range keep their exponent") {
  ExtendedReal big(1.0);
  for (int i = 0; i < 200; ++i) big *= ExtendedReal(1e10);  // 1e2000
  CHECK(std::isinf(big.to_double()));
  CHECK(big.log2_abs() == doctest::Approx(2000 * std::log2(10.0)).epsilon(1e-12));
  ExtendedReal back = big;
  for (int i = 0; i < 200; ++i) back /= ExtendedReal(1e10);
  CHECK(back.to_double() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("from_log2 round trip") {
  const ExtendedReal x = ExtendedReal::from_log2(12345.25, -1);
  CHECK(x.sign() == -1);
  CHECK(x.log2_abs() == doctest::Approx(12345.25).epsilon(1e-14));
}

TEST_CASE("arithmetic agrees with long double on random operands") {
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> mant(-2.0, 2.0);
  std::uniform_int_distribution<int> expo(-200, 200);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = std::ldexp(mant(rng), expo(rng));
    const double b = std::ldexp(mant(rng), expo(rng));
    const long double la = a;
    const long double lb = b;
    const ExtendedReal xa(a);
    const ExtendedReal xb(b);
    const auto rel = [](double got, long double want) {
      if (want == 0) return static_cast<long double>(std::fabs(got));
      return std::fabs((got - want) / want);
    };
    CHECK(normalized(xa + xb));
    CHECK(rel((xa + xb).to_double(), la + lb) < 1e-15L * (std::fabs(la) + std::fabs(lb)) /
                                                     std::max(std::fabs(la + lb), 1e-300L) +
                                                 1e-300L);
    CHECK(rel((xa * xb).to_double(), la * lb) < 1e-15L);
    if (b != 0.0) CHECK(rel((xa / xb).to_double(), la / lb) < 1e-15L);
    CHECK(((xa < xb) == (a < b)));
    CHECK((ExtendedReal::abs_less(xa, xb) == (std::fabs(a) < std::fabs(b))));
  }
}

TEST_CASE("adding a negligible term leaves the larger one") {
  const ExtendedReal big = ExtendedReal::from_parts(1.25, 500);
  const ExtendedReal tiny = ExtendedReal::from_parts(1.0, 300);
  CHECK((big + tiny) == big);
  CHECK((tiny + big) == big);
}

TEST_CASE("abs_ratio saturates gracefully") {
  const ExtendedReal a = ExtendedReal::from_parts(1.0, 5000);
  const ExtendedReal b = ExtendedReal::from_parts(1.0, 4990);
  CHECK(rabi::abs_ratio(a, b) == 1024.0);
  CHECK(rabi::abs_ratio(ExtendedReal{}, b) == 0.0);
}
