#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rabi/errors.hpp"
#include "rabi/fock_oracle.hpp"
#include "rabi/rootfinder.hpp"

using namespace rabi;

namespace {

// Small deterministic generator for property cases.
class Lcg {
public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}
  double uniform(double lo, double hi) {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return lo + (hi - lo) * static_cast<double>(state_ >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

std::vector<double> energies(const std::vector<Root>& roots) {
  std::vector<double> e;
  for (const Root& r : roots) e.push_back(r.energy);
  std::sort(e.begin(), e.end());
  return e;
}

const GBranch& branch_for(const std::vector<GBranch>& branches, Sector s) {
  for (const GBranch& b : branches)
    if (b.sector == s) return b;
  FAIL("missing branch");
  return branches.front();
}

}  // namespace

TEST_CASE("scan config validation") {
  CHECK_NOTHROW(ScanConfig{}.validate());
  ScanConfig bad;
  bad.pole_exclusion = 1e-13;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ScanConfig{};
  bad.grid_per_unit = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("find_zeros") {
  SUBCASE("weak coupling minus branch has the single level -delta/2") {
    const ModelParams p = OnePhotonParams{1.0, 0.0, 1e-3};
    const auto branches = model_branches(p);
    const GBranch& minus = branch_for(branches, Sector::OnePhotonUnbiasedMinus);
    const ZeroScan z =
        find_zeros(minus, pole_locations(p, minus.sector, -1, 0.9), -1.0, 0.9);
    REQUIRE(z.roots.size() == 1);
    CHECK(z.roots[0].x == doctest::Approx(-0.5).epsilon(1e-5));
  }
  SUBCASE("zero-free branch gives nothing") {
    const ModelParams p = OnePhotonParams{0.0, 0.0, 0.7};
    const auto branches = model_branches(p);
    const GBranch& b = branches.front();
    const ZeroScan z = find_zeros(b, pole_locations(p, b.sector, 0, 1), 0.1, 0.9);
    CHECK(z.roots.empty());
    CHECK(z.suspects.empty());
  }
  SUBCASE("empty window") {
    const ModelParams p = OnePhotonParams{1.0, 0.0, 0.7};
    const auto branches = model_branches(p);
    const GBranch& b = branches.front();
    CHECK_THROWS_AS(find_zeros(b, {}, 1.0, 1.0), Error);
    CHECK_THROWS_AS(find_zeros(b, {}, 2.0, 1.0), Error);
    CHECK_THROWS_AS(find_zeros(b, {}, 0.0, INFINITY), Error);
  }
}

TEST_CASE("regular roots carry valid brackets") {
  const ModelParams p = OnePhotonParams{0.4, 0.0, 0.7};
  const ScanConfig cfg;
  for (const GBranch& b : model_branches(p)) {
    const PoleSet poles = pole_locations(p, b.sector, -1, 6);
    const ZeroScan z = find_zeros(b, poles, -0.99, 6.0, cfg);
    CHECK(z.roots.size() >= 3);
    for (const Root& r : z.roots) {
      CHECK(r.kind == RootKind::Regular);
      CHECK(r.lo <= r.x);
      CHECK(r.x <= r.hi);
      CHECK(r.hi - r.lo <= cfg.refine_tol);
      CHECK(b.eval(r.lo).value.sign() * b.eval(r.hi).value.sign() <= 0);
      for (double q : poles.positions()) CHECK_FALSE((q >= r.lo && q <= r.hi));
    }
    for (std::size_t i = 1; i < z.roots.size(); ++i) CHECK(z.roots[i - 1].x < z.roots[i].x);
  }
}

TEST_CASE("spectrum matches exact diagonalization") {
  SUBCASE("unbiased one photon") {
    const ModelParams p = OnePhotonParams{0.4, 0.0, 0.7};
    const auto got = energies(find_spectrum(p, -1.5, 4.0).roots);
    const auto ed = ed_eigenvalues(p, 200);
    REQUIRE(got.size() >= 8);
    for (int i = 0; i < 8; ++i) CHECK(std::fabs(got[i] - ed[i]) < 1e-6);
  }
  SUBCASE("biased one photon") {
    const ModelParams p = OnePhotonParams{1.0, 0.3, 0.7};
    const auto got = energies(find_spectrum(p, -1.5, 3.0).roots);
    const auto ed = ed_eigenvalues(p, 150);
    REQUIRE(got.size() >= 6);
    for (int i = 0; i < 6; ++i) CHECK(std::fabs(got[i] - ed[i]) < 1e-6);
  }
  SUBCASE("two photon") {
    const ModelParams p = TwoPhotonParams{1.0, 0.3};
    const auto got = energies(find_spectrum(p, -1.0, 3.0).roots);
    const auto ed = ed_eigenvalues(p, 300);
    std::vector<double> want;
    for (double e : ed)
      if (e > -1.0 && e < 3.0) want.push_back(e);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - want[i]) < 1e-6);
  }
}

TEST_CASE("decoupled one-photon spectrum is n +- 1/2") {
  const ModelParams p = OnePhotonParams{1.0, 0.0, 0.0};
  const auto got = energies(find_spectrum(p, -1.0, 3.0).roots);
  const std::vector<double> want{-0.5, 0.5, 0.5, 1.5, 1.5, 2.5, 2.5};
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);

  // Off resonance the same levels come out of the sign-change scan at tiny coupling.
  const auto weak = find_spectrum(OnePhotonParams{0.6, 0.0, 1e-4}, -1.0, 2.9).roots;
  const auto exact = find_spectrum(OnePhotonParams{0.6, 0.0, 0.0}, -1.0, 2.9).roots;
  REQUIRE(weak.size() == exact.size());
  for (std::size_t i = 0; i < weak.size(); ++i) {
    CHECK(weak[i].sector == exact[i].sector);
    CHECK(weak[i].energy == doctest::Approx(exact[i].energy).epsilon(1e-6));
  }
}

TEST_CASE("exceptional roots without tunnelling sit on every pole") {
  for (double g : {0.3, 0.7, 1.0}) {
    const auto roots = find_exceptional(OnePhotonParams{0.0, 0.0, g}, 0, 10);
    REQUIRE(roots.size() == 22);
    for (const Root& r : roots) {
      CHECK(r.kind == RootKind::Exceptional);
      CHECK(r.energy == r.pole_index - g * g);
      CHECK(r.residual == 0.0);
    }
  }
  for (double g : {0.1, 0.3, 0.45}) {
    const auto roots = find_exceptional(TwoPhotonParams{0.0, g}, 0, 10);
    REQUIRE(roots.size() == 22);
    for (const Root& r : roots) {
      CHECK(std::fabs(r.energy - ((r.pole_index + 0.5) * std::sqrt(1 - 4 * g * g) - 0.5)) <
            1e-12);
    }
  }
}

TEST_CASE("generic couplings have no exceptional roots") {
  CHECK(find_exceptional(OnePhotonParams{0.4, 0.0, 0.7}, 0, 8).empty());
  CHECK(find_exceptional(TwoPhotonParams{1.0, 0.3}, 0, 8).empty());
  CHECK(find_exceptional(OnePhotonParams{1.0, 0.3, 0.7}, 0, 8).empty());
}

TEST_CASE("two-photon lifted pole coincides with an exact degeneracy") {
  const double delta = 1.0;
  const int n = 2;
  const double g = locate_exceptional_coupling(delta, n, 0.05, 0.45);
  const ModelParams p = TwoPhotonParams{delta, g};
  const auto ex = find_exceptional(p, n, n);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].energy == two_photon_pole_energy(g, n));
  CHECK(ex[0].sector != ex[1].sector);

  const auto ed = ed_eigenvalues(p, 300);
  const double e = ex[0].energy;
  const auto it = std::lower_bound(ed.begin(), ed.end(), e - 1e-7);
  REQUIRE(std::distance(it, ed.end()) >= 2);
  CHECK(std::fabs(it[0] - e) < 1e-8);
  CHECK(std::fabs(it[1] - e) < 1e-8);

  CHECK_THROWS_AS(locate_exceptional_coupling(delta, n, 0.05, 0.06), Error);
}

TEST_CASE("root set is stable under grid refinement") {
  const ModelParams p = OnePhotonParams{1.0, 0.0, 1.0};
  ScanConfig coarse;
  ScanConfig fine;
  fine.grid_per_unit = 2 * coarse.grid_per_unit;
  const auto a = find_spectrum(p, -1.5, 5.0, coarse);
  const auto b = find_spectrum(p, -1.5, 5.0, fine);
  REQUIRE(b.roots.size() >= a.roots.size());
  CHECK(b.roots.size() <= a.roots.size() + a.suspects.size());
  for (const Root& r : a.roots) {
    const bool found = std::any_of(b.roots.begin(), b.roots.end(), [&](const Root& s) {
      return s.sector == r.sector && std::fabs(s.energy - r.energy) <= coarse.dedup_tol;
    });
    CHECK(found);
  }
}

TEST_CASE("enlarging the window never loses a root") {
  Lcg rng(7);
  const ModelParams models[] = {OnePhotonParams{0.7, 0.0, 0.8}, OnePhotonParams{0.5, 0.2, 0.6},
                                TwoPhotonParams{0.8, 0.35}};
  for (const ModelParams& p : models) {
    for (int trial = 0; trial < 4; ++trial) {
      const double lo = rng.uniform(-1.0, 2.0);
      const double hi = lo + rng.uniform(0.3, 2.0);
      const auto inner = find_spectrum(p, lo, hi).roots;
      const auto outer = find_spectrum(p, lo - 0.5, hi + 0.7).roots;
      for (const Root& r : inner) {
        const bool kept = std::any_of(outer.begin(), outer.end(), [&](const Root& s) {
          return s.sector == r.sector && std::fabs(s.energy - r.energy) <= 1e-9;
        });
        CHECK(kept);
      }
    }
  }
}

TEST_CASE("F(alpha) zeros reproduce the G zeros") {
  const OnePhotonParams p{1.0, 0.0, 0.5};
  const auto g_roots = find_spectrum(p, -1.0, 3.0).roots;
  for (Parity par : {Parity::Plus, Parity::Minus}) {
    const auto f = find_falpha_zeros(p, par, -1.0, 3.0);
    REQUIRE_FALSE(f.empty());
    for (const Root& r : f) {
      const bool match = std::any_of(g_roots.begin(), g_roots.end(), [&](const Root& s) {
        return std::fabs(s.energy - r.energy) < 1e-6;
      });
      CHECK(match);
    }
  }
  std::vector<double> all;
  for (Parity par : {Parity::Plus, Parity::Minus})
    for (const Root& r : find_falpha_zeros(p, par, -1.0, 3.0)) all.push_back(r.energy);
  CHECK(all.size() == g_roots.size());
}

TEST_CASE("a bias leaves no exact degeneracies") {
  double min_gap = INFINITY;
  for (int k = 1; k <= 10; ++k) {
    const ModelParams p = OnePhotonParams{1.0, 0.3, 0.1 * k};
    const auto ed = ed_eigenvalues(p, 80);
    for (int i = 1; i < 8; ++i) min_gap = std::min(min_gap, ed[i] - ed[i - 1]);
  }
  CHECK(min_gap > 1e-6);
}

TEST_CASE("a window edge rounding onto a pole is excluded like the pole") {
  // -1.49 + 4 maps to x a few ulps below the pole at 3.
  const ModelParams p = OnePhotonParams{1.0, 0.0, 0.7};
  const double e_hi = -1.49 + 4.0;
  REQUIRE(std::fabs(map_energy_to_x(p, e_hi) - 3.0) < 1e-12);
  const auto spec = find_spectrum(p, -1.49, e_hi);
  const auto ed = ed_eigenvalues(p, 300);
  const auto n = std::count_if(ed.begin(), ed.end(), [&](double e) { return e > -1.49 && e < e_hi; });
  CHECK(spec.roots.size() == static_cast<std::size_t>(n));
}
