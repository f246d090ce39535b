#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rabi/errors.hpp"
#include "rabi/gfunctions.hpp"

using namespace rabi;

namespace {

// Unscaled one-photon recurrence in long double, summed with explicit g^n.
long double raw_g0(double g, double delta, double x, double sign, int n_max) {
  const long double e = x - static_cast<long double>(g) * g;
  const long double alpha = static_cast<long double>(g) * g;
  const long double beta = 3 * alpha;
  auto omega = [&](int m) {
    return ((m + beta - e) - static_cast<long double>(delta) * delta / (4 * (m - alpha - e))) /
           (2 * static_cast<long double>(g));
  };
  long double f_prev = 1, f = omega(0);
  long double sum = 1.0L * (1 - sign * delta / 2 / x);
  long double gn = g;
  sum += f * gn * (1 - sign * delta / 2 / (x - 1));
  for (int m = 2; m <= n_max; ++m) {
    const long double next = (omega(m - 1) * f - f_prev) / m;
    f_prev = f;
    f = next;
    gn *= g;
    sum += f * gn * (1 - sign * delta / 2 / (x - m));
  }
  return sum;
}

// Sign changes of fn on a grid, ignoring brackets that contain a pole.
std::vector<double> sign_changes(const std::function<GValue(double)>& fn,
                                 const std::vector<double>& poles, double lo, double hi,
                                 double step) {
  std::vector<double> out;
  double prev_x = lo;
  int prev_s = fn(lo).value.sign();
  for (double x = lo + step; x <= hi; x += step) {
    const int s = fn(x).value.sign();
    const bool pole_inside = std::any_of(poles.begin(), poles.end(),
                                         [&](double q) { return q > prev_x && q < x; });
    if (s != prev_s && !pole_inside) out.push_back(0.5 * (prev_x + x));
    prev_s = s;
    prev_x = x;
  }
  return out;
}

double rel_diff(const ExtendedReal& a, const ExtendedReal& b) { return abs_ratio(a - b, b); }

}  // namespace

TEST_CASE("eval_g0 basics") {
  SUBCASE("delta = 0 makes both branches equal") {
    const OnePhotonParams p{0.0, 0.0, 0.6};
    for (double x = -0.95; x < 4; x += 0.1) {
      CHECK(eval_g0(p, x, Parity::Plus).value == eval_g0(p, x, Parity::Minus).value);
    }
  }
  SUBCASE("weak coupling: each branch keeps its decoupled levels") {
    // In (-1, 1) the plus sector holds |0> at delta/2 and |1> at 1 - delta/2.
    const OnePhotonParams p{0.6, 0.0, 1e-3};
    const auto z = sign_changes([&](double x) { return eval_g0(p, x, Parity::Plus); }, {0.0},
                                -0.999, 0.999, 0.002);
    REQUIRE(z.size() == 2);
    CHECK(z[0] == doctest::Approx(0.3).epsilon(5e-3));
    CHECK(z[1] == doctest::Approx(0.7).epsilon(5e-3));
    const auto zm = sign_changes([&](double x) { return eval_g0(p, x, Parity::Minus); }, {0.0},
                                 -0.999, 0.999, 0.002);
    REQUIRE(zm.size() == 1);
    CHECK(zm[0] == doctest::Approx(-0.3).epsilon(5e-3));
  }
  SUBCASE("matches an unscaled long-double recurrence") {
    const OnePhotonParams p{0.4, 0.0, 0.7};
    for (int i = 1; i < 100; ++i) {
      const double x = 0.01 * i;
      for (Parity par : {Parity::Plus, Parity::Minus}) {
        const GValue v = eval_g0(p, x, par);
        CHECK(v.converged);
        const long double want = raw_g0(p.g, p.delta, x, sign_of(par), 300);
        CHECK(std::fabs((v.value.to_double() - want) / want) < 1e-8);
      }
    }
  }
  SUBCASE("pole guard") {
    const OnePhotonParams p{1.0, 0.0, 0.5};
    CHECK_THROWS_AS(eval_g0(p, 2.0, Parity::Plus), Error);
    CHECK(eval_g0(p, 2.25, Parity::Plus).nearest_pole_distance == doctest::Approx(0.25));
    CHECK_THROWS_AS(eval_g0({1.0, 0.1, 0.5}, 0.3, Parity::Plus), Error);
  }
}

TEST_CASE("biased G reduces to the product of unbiased branches") {
  for (double g : {0.2, 0.7, 1.3}) {
    const OnePhotonParams p{0.4, 0.0, g};
    for (double x = -0.97; x < 5; x += 0.031) {
      const GValue ge = eval_g_biased(p, x);
      const ExtendedReal prod = eval_g0(p, x, Parity::Plus).value *
                                eval_g0(p, x, Parity::Minus).value;
      CHECK(ge.converged);
      CHECK(abs_ratio(ge.value + prod, prod) < 1e-10);
    }
  }
}

TEST_CASE("biased G without tunnelling has no zeros between poles") {
  const OnePhotonParams p{0.0, 0.3, 0.7};
  const PoleSet poles = pole_locations(p, Sector::OnePhotonBiased, -1, 4);
  const auto z = sign_changes([&](double x) { return eval_g_biased(p, x); }, poles.positions(),
                              -0.9913, 3.9, 0.01);
  CHECK(z.empty());
}

TEST_CASE("delta -> -delta swaps the parity branches") {
  const OnePhotonParams p{0.4, 0.0, 0.7};
  const OnePhotonParams q{-0.4, 0.0, 0.7};
  for (double x = -0.9; x < 4; x += 0.173) {
    CHECK(eval_g0(p, x, Parity::Plus).value == eval_g0(q, x, Parity::Minus).value);
    CHECK(eval_g0(p, x, Parity::Minus).value == eval_g0(q, x, Parity::Plus).value);
  }
  const TwoPhotonParams a{1.0, 0.3};
  const TwoPhotonParams b{-1.0, 0.3};
  for (double x = -0.9; x < 6; x += 0.173) {
    for (ChainStart s : {ChainStart::Even, ChainStart::Odd}) {
      CHECK(eval_g2p(a, x, s, Parity::Plus).value == eval_g2p(b, x, s, Parity::Minus).value);
    }
  }
}

TEST_CASE("two-photon G") {
  SUBCASE("delta = 0 gives equal plus and minus values") {
    const TwoPhotonParams p{0.0, 0.25};
    for (double x = -0.9; x < 6; x += 0.31) {
      CHECK(eval_g2p(p, x, ChainStart::Even, Parity::Plus).value ==
            eval_g2p(p, x, ChainStart::Even, Parity::Minus).value);
    }
  }
  SUBCASE("decoupled limit reproduces n +- delta/2 across the four sectors") {
    const TwoPhotonParams p{1.0, 0.0};
    std::vector<double> all;
    for (ChainStart s : {ChainStart::Even, ChainStart::Odd}) {
      for (Parity par : {Parity::Plus, Parity::Minus}) {
        const Sector sec = two_photon_sector(s, par);
        const auto z =
            sign_changes([&](double x) { return eval_g2p(p, x, s, par); },
                         pole_locations(p, sec, -1, 8).positions(), -0.9987, 7.9, 0.01);
        all.insert(all.end(), z.begin(), z.end());
      }
    }
    std::sort(all.begin(), all.end());
    std::vector<double> want{-0.5};
    for (int n = 0; n < 8; ++n) {
      if (n + 0.5 > 7.9) break;
      want.push_back(n + 0.5);
      want.push_back(n + 0.5);
    }
    REQUIRE(all.size() == want.size());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == doctest::Approx(want[i]).epsilon(0.01));
  }
  SUBCASE("continuous in g at g = 0") {
    const TwoPhotonParams p0{1.0, 0.0};
    const TwoPhotonParams p1{1.0, 1e-7};
    for (double x : {-0.3, 0.7, 2.2, 5.1}) {
      CHECK(rel_diff(eval_g2p(p1, x, ChainStart::Odd, Parity::Minus).value,
                     eval_g2p(p0, x, ChainStart::Odd, Parity::Minus).value) < 1e-5);
    }
  }
  SUBCASE("pole guard only at the sector's parity") {
    const TwoPhotonParams p{1.0, 0.3};
    CHECK_THROWS_AS(eval_g2p(p, 2.0, ChainStart::Even, Parity::Plus), Error);
    CHECK_NOTHROW(eval_g2p(p, 2.0, ChainStart::Odd, Parity::Plus));
  }
}

TEST_CASE("refining the grid between poles keeps max |G| stable") {
  const OnePhotonParams p{0.4, 0.0, 0.7};
  double last = 0.0;
  for (int pts : {50, 100, 200, 400}) {
    double mx = 0.0;
    for (int i = 0; i <= pts; ++i) {
      const double x = 1.1 + 0.8 * i / pts;
      mx = std::max(mx, std::fabs(eval_g0(p, x, Parity::Minus).value.to_double()));
    }
    if (last > 0) CHECK(mx == doctest::Approx(last).epsilon(1e-3));
    last = mx;
  }
}

TEST_CASE("F(alpha)") {
  const OnePhotonParams p{1.0, 0.0, 0.5};
  const GValue m0 = eval_falpha(p, 0.7, Parity::Plus, 0);
  CHECK(m0.value.to_double() == 1.0);
  CHECK(falpha_energy(p, falpha_alpha(p, 1.3, Parity::Minus), Parity::Minus) ==
        doctest::Approx(1.3));
  CHECK(falpha_energy(p, 2.0, Parity::Plus) == doctest::Approx(0.5));
  CHECK_THROWS_AS(eval_falpha({1.0, 0.0, 0.0}, 1.0, Parity::Plus), Error);
}

TEST_CASE("pole locations") {
  const ModelParams unb = OnePhotonParams{1.0, 0.0, 0.5};
  CHECK(pole_locations(unb, Sector::OnePhotonUnbiasedPlus, 0, 3).positions() ==
        std::vector<double>{0, 1, 2, 3});

  const ModelParams bia = OnePhotonParams{1.0, 0.2, 0.5};
  const PoleSet b = pole_locations(bia, Sector::OnePhotonBiased, 0, 1.2);
  REQUIRE(b.size() == 3);
  CHECK(b.poles[0].x == doctest::Approx(0.1));
  CHECK(b.poles[0].family == PoleFamily::MinusHalfBias);
  CHECK(b.poles[1].x == doctest::Approx(0.9));
  CHECK(b.poles[1].family == PoleFamily::PlusHalfBias);
  CHECK(b.poles[1].n == 1);
  CHECK(b.poles[2].x == doctest::Approx(1.1));

  const ModelParams two = TwoPhotonParams{1.0, 0.3};
  CHECK(pole_locations(two, Sector::TwoPhotonEvenMinus, 0, 5).positions() ==
        std::vector<double>{0, 2, 4});
  CHECK(pole_locations(two, Sector::TwoPhotonOddPlus, -3, 5).positions() ==
        std::vector<double>{1, 3, 5});
  CHECK(pole_locations(two, Sector::TwoPhotonOddPlus, 5, -3).empty());

  for (const ModelParams& mp : {unb, bia, two}) {
    for (const auto& br : model_branches(mp)) {
      const auto pos = pole_locations(mp, br.sector, -2, 9).positions();
      CHECK(std::is_sorted(pos.begin(), pos.end()));
      CHECK(std::adjacent_find(pos.begin(), pos.end()) == pos.end());
    }
  }
}

TEST_CASE("model branches") {
  CHECK(model_branches(OnePhotonParams{1.0, 0.0, 0.5}).size() == 2);
  CHECK(model_branches(OnePhotonParams{1.0, 0.3, 0.5}).size() == 1);
  const auto two = model_branches(TwoPhotonParams{1.0, 0.3});
  REQUIRE(two.size() == 4);
  for (const auto& br : two) CHECK(br.energy_of_x(br.x_of_energy(0.77)) == doctest::Approx(0.77));
}
