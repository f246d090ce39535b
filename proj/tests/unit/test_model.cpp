#include <cmath>
#include <random>

#include "doctest.h"
#include "rabi/errors.hpp"
#include "rabi/model.hpp"

using namespace rabi;

TEST_CASE("one-photon frame constants") {
  SUBCASE("zero coupling") {
    const auto c = derive_one_photon_constants({1.0, 0.0, 0.0});
    CHECK(c.alpha == 0.0);
    CHECK(c.beta == 0.0);
    CHECK(c.alpha_p == 0.0);
    CHECK(c.beta_p == 0.0);
  }
  SUBCASE("biased substitution") {
    const auto c = derive_one_photon_constants({1.0, 0.2, 0.5});
    CHECK(c.alpha == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(c.beta == doctest::Approx(0.85).epsilon(1e-15));
    CHECK(c.alpha_p == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(c.beta_p == doctest::Approx(0.65).epsilon(1e-15));
  }
  SUBCASE("unbiased frames coincide") {
    const auto c = derive_one_photon_constants({0.4, 0.0, 0.7});
    CHECK(c.alpha == c.alpha_p);
    CHECK(c.beta == c.beta_p);
    CHECK(c.alpha == doctest::Approx(0.49));
    CHECK(c.beta == doctest::Approx(1.47));
  }
  SUBCASE("invariants and evenness in g") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      const OnePhotonParams p{u(rng), u(rng) - 1.0, u(rng)};
      const auto c = derive_one_photon_constants(p);
      CHECK(c.alpha - c.alpha_p == doctest::Approx(p.eps).epsilon(1e-14));
      CHECK(c.beta - c.beta_p == doctest::Approx(p.eps).epsilon(1e-14));
      CHECK(c.beta - c.alpha == doctest::Approx(2 * p.g * p.g).epsilon(1e-14));
      OnePhotonParams q = p;
      q.g = -p.g;
      const auto d = derive_one_photon_constants(q);
      CHECK(d.alpha == c.alpha);
      CHECK(d.beta_p == c.beta_p);
    }
  }
}

TEST_CASE("squeeze frame") {
  SUBCASE("identity at g = 0") {
    const auto f = derive_squeeze_frame({1.0, 0.0});
    CHECK(f.u == 1.0);
    CHECK(f.v == 0.0);
    CHECK(f.beta2 == 1.0);
  }
  SUBCASE("g = 0.3") {
    const auto f = derive_squeeze_frame({1.0, 0.3});
    CHECK(f.beta2 == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(f.u == doctest::Approx(1.0606601717798212).epsilon(1e-14));
    CHECK(f.v == doctest::Approx(0.35355339059327373).epsilon(1e-14));
    CHECK(std::fabs(f.u * f.u - f.v * f.v - 1.0) < 1e-12);
  }
  SUBCASE("spectral collapse boundary rejected") {
    try {
      derive_squeeze_frame({1.0, 0.5});
      FAIL("expected CouplingOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CouplingOutOfRange);
    }
    CHECK_THROWS_AS(derive_squeeze_frame({1.0, 0.5 - 1e-10}), Error);
    CHECK_NOTHROW(derive_squeeze_frame({1.0, 0.4999}));
  }
  SUBCASE("normalization across the range") {
    for (double g = 0.0; g < 0.4999; g += 0.0125) {
      const auto f = derive_squeeze_frame({1.0, g});
      CHECK(std::fabs(f.u * f.u - f.v * f.v - 1.0) < 1e-12);
      CHECK(std::fabs(f.u * f.u + f.v * f.v - f.beta2) < 1e-12 * f.beta2);
      CHECK(f.beta2 == doctest::Approx(1.0 / std::sqrt(1 - 4 * g * g)).epsilon(1e-14));
      CHECK(f.u >= 1.0);
      CHECK(f.v >= 0.0);
    }
  }
}

TEST_CASE("spectral variable maps") {
  const OnePhotonParams one{0.4, 0.0, 0.7};
  CHECK(map_x_to_energy(one, 0.0) == doctest::Approx(-0.49));
  CHECK(map_x_to_energy(TwoPhotonParams{1.0, 0.3}, 2.0) == doctest::Approx(1.5).epsilon(1e-14));
  for (int n = 0; n < 10; ++n)
    CHECK(map_x_to_energy(TwoPhotonParams{1.0, 0.0}, n) == static_cast<double>(n));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(-1e6, 1e6);
  for (double g : {0.0, 0.1, 0.3, 0.45}) {
    const ModelParams two = TwoPhotonParams{0.5, g};
    for (int i = 0; i < 200; ++i) {
      const double x = ux(rng);
      CHECK(std::fabs(map_energy_to_x(two, map_x_to_energy(two, x)) - x) <=
            1e-14 * std::max(1.0, std::fabs(x)));
      const ModelParams o = OnePhotonParams{1.0, 0.2, g};
      CHECK(std::fabs(map_energy_to_x(o, map_x_to_energy(o, x)) - x) <=
            1e-14 * std::max(1.0, std::fabs(x)));
    }
  }
}

TEST_CASE("two-photon pole energies equal the exceptional formula") {
  for (double g : {0.0, 0.1, 0.3, 0.45, 0.49}) {
    const auto f = derive_squeeze_frame({1.0, g});
    for (int n = 0; n <= 50; ++n) {
      const double via_map = two_photon_energy(f, n);
      CHECK(std::fabs(via_map - two_photon_pole_energy(g, n)) < 1e-12);
    }
  }
}

TEST_CASE("sector names round trip") {
  for (int i = 0; i < 9; ++i) {
    const auto s = static_cast<Sector>(i);
    CHECK(sector_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(sector_from_string("nope"), Error);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((OnePhotonParams{1.0, 0.0, -0.1}.validate()), Error);
  CHECK_THROWS_AS((OnePhotonParams{NAN, 0.0, 0.1}.validate()), Error);
  CHECK_NOTHROW((OnePhotonParams{1.0, 0.3, 2.0}.validate()));
}
