#include "rabi/rootfinder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <variant>

#include "rabi/chains.hpp"
#include "rabi/errors.hpp"

namespace rabi {

namespace {

constexpr int kMaxBisections = 50;
constexpr int kMaxGoldenSteps = 80;
constexpr double kTangentRelTol = 1e-10;

using Evaluator = std::function<GValue(double)>;

struct Sample {
  double x;
  ExtendedReal g;
};

// Grid over [a, b]: both endpoints plus every lattice point k / per_unit strictly inside.
// Anchoring to the absolute lattice keeps grids of overlapping windows consistent.
std::vector<double> lattice_grid(double a, double b, int per_unit) {
  std::vector<double> xs{a};
  const double h = 1.0 / per_unit;
  const double k0 = std::floor(a * per_unit) + 1;
  for (double k = k0;; k += 1) {
    const double x = k * h;
    if (x >= b) break;
    if (x - xs.back() > h * 1e-3) xs.push_back(x);
  }
  if (b - xs.back() > h * 1e-3) {
    xs.push_back(b);
  } else {
    xs.back() = b;
  }
  return xs;
}

struct Refined {
  double lo;
  double hi;
};

Refined bisect(const Evaluator& f, double lo, double hi, int sign_lo, double tol) {
  for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const int s = f(mid).value.sign();
    if (s == 0) return {mid, mid};
    if (s == sign_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

// Golden-section minimum of sign0 * G on [a, b]. Stops early once the sign flips.
Sample golden_min(const Evaluator& f, double a, double b, int sign0, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  auto val = [&](double x) { return ExtendedReal(sign0) * f(x).value; };
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  ExtendedReal fc = val(c), fd = val(d);
  for (int it = 0; it < kMaxGoldenSteps && b - a > tol; ++it) {
    if (fc.sign() <= 0) return {c, fc};
    if (fd.sign() <= 0) return {d, fd};
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = val(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = val(d);
    }
  }
  return fc < fd ? Sample{c, fc} : Sample{d, fd};
}

double relative_residual(const Evaluator& f, double x, const ExtendedReal& scale) {
  if (scale.is_zero()) return 0.0;
  return abs_ratio(f(x).value, scale);
}

Root make_root(const Evaluator& f, const GBranch& br, Refined r, const ExtendedReal& scale) {
  Root root;
  root.lo = r.lo;
  root.hi = r.hi;
  root.x = 0.5 * (r.lo + r.hi);
  root.energy = br.energy_of_x(root.x);
  root.sector = br.sector;
  root.kind = RootKind::Regular;
  root.residual = relative_residual(f, root.x, scale);
  return root;
}

void scan_segment(const GBranch& br, double a, double b, const ScanConfig& cfg, ZeroScan& out) {
  const Evaluator& f = br.eval;
  const std::vector<double> xs = lattice_grid(a, b, cfg.grid_per_unit);
  std::vector<Sample> s;
  s.reserve(xs.size());
  for (double x : xs) {
    const GValue v = f(x);
    if (!v.converged) out.unconverged.push_back(x);
    s.push_back({x, v.value});
  }

  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const int s0 = s[i].g.sign();
    const int s1 = s[i + 1].g.sign();
    if (s0 == 0) {
      out.roots.push_back(make_root(f, br, {s[i].x, s[i].x}, max_abs(s[i].g, s[i + 1].g)));
      continue;
    }
    if (s1 != 0 && s0 != s1) {
      const Refined r = bisect(f, s[i].x, s[i + 1].x, s0, cfg.refine_tol);
      out.roots.push_back(make_root(f, br, r, max_abs(s[i].g, s[i + 1].g)));
    }
  }
  if (!s.empty() && s.back().g.sign() == 0)
    out.roots.push_back(make_root(f, br, {s.back().x, s.back().x}, ExtendedReal(1.0)));

  // Local |G| minima without a sign change: either a close pair of zeros inside
  // one cell (the minimum dips through zero) or a near-tangent suspect.
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const int sg = s[i].g.sign();
    if (sg == 0 || s[i - 1].g.sign() != sg || s[i + 1].g.sign() != sg) continue;
    if (!ExtendedReal::abs_less(s[i].g, s[i - 1].g) ||
        ExtendedReal::abs_less(s[i + 1].g, s[i].g))
      continue;
    const ExtendedReal scale = max_abs(s[i - 1].g, s[i + 1].g);
    const Sample m = golden_min(f, s[i - 1].x, s[i + 1].x, sg, cfg.refine_tol);
    if (m.g.sign() <= 0) {
      if (m.g.is_zero()) {
        out.roots.push_back(make_root(f, br, {m.x, m.x}, scale));
        continue;
      }
      out.roots.push_back(
          make_root(f, br, bisect(f, s[i - 1].x, m.x, sg, cfg.refine_tol), scale));
      out.roots.push_back(
          make_root(f, br, bisect(f, m.x, s[i + 1].x, -sg, cfg.refine_tol), scale));
    } else if (abs_ratio(m.g, scale) < kTangentRelTol) {
      out.suspects.push_back({m.x, br.sector, abs_ratio(m.g, scale)});
    }
  }
}

void sort_and_dedup(std::vector<Root>& roots, double tol) {
  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    if (a.x != b.x) return a.x < b.x;
    return static_cast<int>(a.sector) < static_cast<int>(b.sector);
  });
  std::vector<Root> kept;
  for (const Root& r : roots) {
    const bool dup = std::any_of(kept.rbegin(), kept.rend(), [&](const Root& k) {
      return k.sector == r.sector && k.kind == r.kind && std::fabs(k.x - r.x) <= tol;
    });
    if (!dup) kept.push_back(r);
  }
  roots.swap(kept);
}

double pole_energy(const ModelParams& p, const Pole& pole) {
  if (const auto* one = std::get_if<OnePhotonParams>(&p)) return one_photon_energy(*one, pole.x);
  return two_photon_pole_energy(std::get<TwoPhotonParams>(p).g, pole.n);
}

std::vector<Sector> pole_sectors(const ModelParams& p, const Pole& pole) {
  if (const auto* one = std::get_if<OnePhotonParams>(&p)) {
    if (one->unbiased()) return {Sector::OnePhotonUnbiasedMinus, Sector::OnePhotonUnbiasedPlus};
    return {Sector::OnePhotonBiased};
  }
  const ChainStart start = pole.n % 2 == 0 ? ChainStart::Even : ChainStart::Odd;
  return {two_photon_sector(start, Parity::Minus), two_photon_sector(start, Parity::Plus)};
}

// Representative sector used to enumerate a model's poles; unbiased one-photon and
// each two-photon parity share their poles between the two branches.
std::vector<Sector> pole_families(const ModelParams& p) {
  if (const auto* one = std::get_if<OnePhotonParams>(&p)) {
    return {one->unbiased() ? Sector::OnePhotonUnbiasedPlus : Sector::OnePhotonBiased};
  }
  return {Sector::TwoPhotonEvenPlus, Sector::TwoPhotonOddPlus};
}

std::vector<Root> exceptional_at(const ModelParams& p, const Pole& pole, const ScanConfig& cfg) {
  std::vector<Root> out;
  const double res = lift_residual(p, pole);
  if (!(res < cfg.lift_tol)) return out;
  for (Sector s : pole_sectors(p, pole)) {
    Root r;
    r.x = pole.x;
    r.lo = r.hi = pole.x;
    r.energy = pole_energy(p, pole);
    r.sector = s;
    r.residual = res;
    r.kind = RootKind::Exceptional;
    r.pole_index = pole.n;
    out.push_back(r);
  }
  return out;
}

// Without coupling the spin and photon decouple and each sector holds n +- delta/2 (or
// n +- sqrt(delta^2 + eps^2)/2 with a bias). At resonance two such levels coincide inside
// one sector, a double zero of G that no sign change can bracket, so the levels are
// listed directly.
std::vector<Root> decoupled_roots(const ModelParams& p, double e_lo, double e_hi) {
  struct Level {
    double energy;
    Sector sector;
  };
  std::vector<Level> levels;
  const int n_hi = static_cast<int>(std::ceil(e_hi)) + 2;
  if (const auto* one = std::get_if<OnePhotonParams>(&p)) {
    if (!one->unbiased()) {
      const double w = 0.5 * std::hypot(one->delta, one->eps);
      for (int n = 0; n <= n_hi; ++n) {
        levels.push_back({n - w, Sector::OnePhotonBiased});
        levels.push_back({n + w, Sector::OnePhotonBiased});
      }
    } else {
      for (int n = 0; n <= n_hi; ++n) {
        const double h = (n % 2 == 0 ? 0.5 : -0.5) * one->delta;
        levels.push_back({n + h, Sector::OnePhotonUnbiasedPlus});
        levels.push_back({n - h, Sector::OnePhotonUnbiasedMinus});
      }
    }
  } else {
    const auto& two = std::get<TwoPhotonParams>(p);
    for (int n = 0; n <= n_hi; ++n) {
      const double h = ((n / 2) % 2 == 0 ? 0.5 : -0.5) * two.delta;
      const ChainStart start = n % 2 == 0 ? ChainStart::Even : ChainStart::Odd;
      levels.push_back({n + h, two_photon_sector(start, Parity::Plus)});
      levels.push_back({n - h, two_photon_sector(start, Parity::Minus)});
    }
  }
  std::vector<Root> out;
  for (const Level& l : levels) {
    if (l.energy < e_lo || l.energy > e_hi) continue;
    Root r;
    r.energy = l.energy;
    r.x = map_energy_to_x(p, l.energy);
    r.lo = r.hi = r.x;
    r.sector = l.sector;
    out.push_back(r);
  }
  return out;
}

bool by_energy(const Root& a, const Root& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return static_cast<int>(a.sector) < static_cast<int>(b.sector);
}

double coupling_of(const ModelParams& p) {
  return std::visit([](const auto& q) { return q.g; }, p);
}

double tunnelling_of(const ModelParams& p) {
  return std::visit([](const auto& q) { return q.delta; }, p);
}

}  // namespace

const char* to_string(RootKind k) { return k == RootKind::Regular ? "regular" : "exceptional"; }

void ScanConfig::validate() const {
  if (grid_per_unit <= 0 || !(refine_tol > 0) || !(dedup_tol > 0) || !(pole_exclusion > 0) ||
      !(lift_tol > 0))
    throw Error(ErrorCode::InvalidParameter, "scan configuration values must be positive");
  if (!(pole_exclusion > refine_tol))
    throw Error(ErrorCode::InvalidParameter, "pole_exclusion must exceed refine_tol");
}

ZeroScan find_zeros(const GBranch& branch, const PoleSet& poles, double x_lo, double x_hi,
                    const ScanConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !(x_lo < x_hi))
    throw Error(ErrorCode::WindowEmpty, "empty scan window");

  ZeroScan out;
  double a = x_lo;
  auto flush = [&](double b) {
    if (b - a > cfg.refine_tol) scan_segment(branch, a, b, cfg, out);
  };
  for (const Pole& q : poles.poles) {
    if (q.x + cfg.pole_exclusion <= x_lo || q.x - cfg.pole_exclusion >= x_hi) continue;
    flush(std::min(x_hi, q.x - cfg.pole_exclusion));
    a = std::max(a, q.x + cfg.pole_exclusion);
  }
  if (a < x_hi) flush(x_hi);

  sort_and_dedup(out.roots, cfg.dedup_tol);
  std::sort(out.unconverged.begin(), out.unconverged.end());
  out.unconverged.erase(std::unique(out.unconverged.begin(), out.unconverged.end()),
                        out.unconverged.end());
  return out;
}

double lift_residual(const ModelParams& params, const Pole& pole) {
  std::vector<ExtendedReal> terms;
  double delta = 0.0;
  if (const auto* one = std::get_if<OnePhotonParams>(&params)) {
    delta = one->delta;
    // Frame A carries the poles x = n - eps/2, frame B those at x = n + eps/2.
    const Frame frame = pole.family == PoleFamily::MinusHalfBias ? Frame::B : Frame::A;
    terms = one_photon_chain(*one, one_photon_energy(*one, pole.x), frame, pole.n).terms;
  } else {
    const auto& two = std::get<TwoPhotonParams>(params);
    delta = two.delta;
    const ChainStart start = pole.n % 2 == 0 ? ChainStart::Even : ChainStart::Odd;
    terms = two_photon_chain(two, pole.x, start, pole.n, ChainScaling::Scaled).terms;
  }
  if (delta == 0.0) return 0.0;
  if (static_cast<int>(terms.size()) <= pole.n) return std::numeric_limits<double>::infinity();
  ExtendedReal mx;
  for (int k = 0; k <= pole.n; ++k) mx = max_abs(mx, terms[k]);
  return std::fabs(delta) * abs_ratio(terms[pole.n], mx);
}

std::vector<Root> find_exceptional(const ModelParams& p, int n_lo, int n_hi,
                                   const ScanConfig& cfg) {
  validate(p);
  cfg.validate();
  std::vector<Root> out;
  n_lo = std::max(n_lo, 0);
  if (n_hi < n_lo) return out;
  for (Sector fam : pole_families(p)) {
    // Pole positions stay within eps/2 of their index.
    double shift = 0.0;
    if (const auto* one = std::get_if<OnePhotonParams>(&p)) shift = std::fabs(one->eps) / 2;
    const PoleSet poles = pole_locations(p, fam, n_lo - shift - 1, n_hi + shift + 1);
    for (const Pole& q : poles.poles) {
      if (q.n < n_lo || q.n > n_hi) continue;
      const auto r = exceptional_at(p, q, cfg);
      out.insert(out.end(), r.begin(), r.end());
    }
  }
  std::sort(out.begin(), out.end(), by_energy);
  return out;
}

SpectrumResult find_spectrum(const ModelParams& p, double e_lo, double e_hi,
                             const ScanConfig& cfg, int n_max) {
  validate(p);
  cfg.validate();
  if (!std::isfinite(e_lo) || !std::isfinite(e_hi) || !(e_lo < e_hi))
    throw Error(ErrorCode::WindowEmpty, "empty energy window");

  SpectrumResult out;
  if (coupling_of(p) == 0.0 && tunnelling_of(p) != 0.0) {
    out.roots = decoupled_roots(p, e_lo, e_hi);
    std::stable_sort(out.roots.begin(), out.roots.end(), by_energy);
    return out;
  }
  std::vector<Root> exceptional;
  for (Sector fam : pole_families(p)) {
    const double x_lo = map_energy_to_x(p, e_lo);
    const double x_hi = map_energy_to_x(p, e_hi);
    for (const Pole& q : pole_locations(p, fam, x_lo, x_hi).poles) {
      const auto r = exceptional_at(p, q, cfg);
      exceptional.insert(exceptional.end(), r.begin(), r.end());
    }
  }

  for (const GBranch& br : model_branches(p, n_max)) {
    const double x_lo = br.x_of_energy(e_lo);
    const double x_hi = br.x_of_energy(e_hi);
    // Poles just outside the window still exclude the edge sample next to them.
    const double ex = cfg.pole_exclusion;
    const PoleSet poles = pole_locations(p, br.sector, x_lo - ex, x_hi + ex);
    ZeroScan z = find_zeros(br, poles, x_lo, x_hi, cfg);
    // A lifted pole replaces the regular zeros squeezed against it.
    const double clear = 10 * cfg.pole_exclusion;
    for (const Root& r : z.roots) {
      const bool shadowed = std::any_of(exceptional.begin(), exceptional.end(), [&](const Root& e) {
        return e.sector == r.sector && std::fabs(e.x - r.x) <= clear;
      });
      if (!shadowed) out.roots.push_back(r);
    }
    out.suspects.insert(out.suspects.end(), z.suspects.begin(), z.suspects.end());
    out.unconverged.insert(out.unconverged.end(), z.unconverged.begin(), z.unconverged.end());
  }
  out.roots.insert(out.roots.end(), exceptional.begin(), exceptional.end());
  std::stable_sort(out.roots.begin(), out.roots.end(), by_energy);
  return out;
}

std::vector<Root> find_falpha_zeros(const OnePhotonParams& p, Parity parity, double e_lo,
                                    double e_hi, const ScanConfig& cfg, int m_max, int m_check,
                                    double stability_tol) {
  p.validate();
  cfg.validate();
  if (!std::isfinite(e_lo) || !std::isfinite(e_hi) || !(e_lo < e_hi))
    throw Error(ErrorCode::WindowEmpty, "empty energy window");
  if (p.g == 0.0) throw Error(ErrorCode::ZeroCoupling, "F(alpha) needs g > 0");

  // Scan in energy so that grid_per_unit keeps its meaning; F is pole-free.
  GBranch br;
  br.sector = parity == Parity::Plus ? Sector::FAlphaPlus : Sector::FAlphaMinus;
  br.eval = [&](double e) { return eval_falpha(p, falpha_alpha(p, e, parity), parity, m_max); };
  br.energy_of_x = [](double e) { return e; };
  br.x_of_energy = [](double e) { return e; };
  const ZeroScan z = find_zeros(br, PoleSet{}, e_lo, e_hi, cfg);

  auto check = [&](double e) {
    return eval_falpha(p, falpha_alpha(p, e, parity), parity, m_check).value.sign();
  };
  std::vector<Root> out;
  for (Root r : z.roots) {
    const int lo = check(r.energy - stability_tol);
    const int hi = check(r.energy + stability_tol);
    if (lo == hi && lo != 0) continue;  // drifts with M: spurious
    r.x = falpha_alpha(p, r.energy, parity);
    out.push_back(r);
  }
  return out;
}

double locate_exceptional_coupling(double delta, int n, double g_lo, double g_hi, double tol) {
  auto fn = [&](double g) {
    const TwoPhotonParams p{delta, g};
    const ChainStart start = n % 2 == 0 ? ChainStart::Even : ChainStart::Odd;
    return two_photon_chain(p, n, start, n, ChainScaling::Scaled)[n].sign();
  };
  int s_lo = fn(g_lo);
  const int s_hi = fn(g_hi);
  if (s_lo == 0) return g_lo;
  if (s_hi == 0) return g_hi;
  if (s_lo == s_hi)
    throw Error(ErrorCode::WindowEmpty, "no sign change of f_n(n) in the coupling bracket");
  for (int it = 0; it < 200 && g_hi - g_lo > tol; ++it) {
    const double mid = 0.5 * (g_lo + g_hi);
    const int s = fn(mid);
    if (s == 0) return mid;
    if (s == s_lo) {
      g_lo = mid;
    } else {
      g_hi = mid;
    }
  }
  return 0.5 * (g_lo + g_hi);
}

}  // namespace rabi
