#include "rabi/gfunctions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rabi/errors.hpp"

namespace rabi {

namespace {

void guard_pole(double d, int n) {
  if (std::fabs(d) < kPoleGuard)
    throw Error(ErrorCode::PoleTooClose,
                "x lies within the pole guard of pole n=" + std::to_string(n));
}

bool is_one_photon(Sector s) {
  return s == Sector::OnePhotonUnbiasedPlus || s == Sector::OnePhotonUnbiasedMinus ||
         s == Sector::OnePhotonBiased;
}

}  // namespace

std::vector<double> PoleSet::positions() const {
  std::vector<double> out;
  out.reserve(poles.size());
  for (const auto& q : poles) out.push_back(q.x);
  return out;
}

GValue eval_g0(const OnePhotonParams& p, double x, Parity parity, int n_max) {
  if (!p.unbiased())
    throw Error(ErrorCode::InvalidParameter, "eval_g0 needs eps = 0; use eval_g_biased");
  const double energy = one_photon_energy(p, x);
  const CoefficientChain t = one_photon_chain(p, energy, Frame::A, n_max);
  const double sd = -sign_of(parity) * p.delta / 2;

  GValue out;
  out.nearest_pole_distance = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= t.n_used; ++n) {
    const double d = x - n;
    guard_pole(d, n);
    out.nearest_pole_distance = std::min(out.nearest_pole_distance, std::fabs(d));
    out.value += t[n] * ExtendedReal(1.0 + sd / d);
  }
  out.converged = t.converged;
  out.n_used = t.n_used;
  return out;
}

GValue eval_g_biased(const OnePhotonParams& p, double x, int n_max) {
  const double energy = one_photon_energy(p, x);
  // K^- lives in frame A (poles x = n - eps/2), K^+ in frame B (poles x = n + eps/2).
  const CoefficientChain km = one_photon_chain(p, energy, Frame::A, n_max);
  const CoefficientChain kp = one_photon_chain(p, energy, Frame::B, n_max);

  GValue out;
  out.nearest_pole_distance = std::numeric_limits<double>::infinity();
  auto accumulate = [&](const CoefficientChain& k, double shift, ExtendedReal& r,
                        ExtendedReal& rbar) {
    for (int n = 0; n <= k.n_used; ++n) {
      const double d = x - n + shift;
      guard_pole(d, n);
      out.nearest_pole_distance = std::min(out.nearest_pole_distance, std::fabs(d));
      r += k[n];
      rbar += k[n] / ExtendedReal(d);
    }
  };
  ExtendedReal rm, rbar_m, rp, rbar_p;
  accumulate(km, p.eps / 2, rm, rbar_m);
  accumulate(kp, -p.eps / 2, rp, rbar_p);

  const ExtendedReal q(p.delta * p.delta / 4);
  out.value = q * rbar_p * rbar_m - rp * rm;
  out.converged = km.converged && kp.converged;
  out.n_used = std::max(km.n_used, kp.n_used);
  return out;
}

GValue eval_g2p(const TwoPhotonParams& p, double x, ChainStart start, Parity parity,
                int n_max) {
  // Scaled chain and scaled overlaps: the products f_n L_n differ from the raw ones by a
  // positive per-sector constant, and stay finite down to g = 0.
  const CoefficientChain f = two_photon_chain(p, x, start, n_max, ChainScaling::Scaled);
  const SqueezeFrame frame = derive_squeeze_frame(p);
  const CoefficientChain L = squeeze_overlaps(frame, f.n_used, ChainScaling::Scaled);
  const double sd = sign_of(parity) * p.delta * frame.beta2 / 2;

  GValue out;
  out.nearest_pole_distance = std::numeric_limits<double>::infinity();
  for (int n = start == ChainStart::Even ? 0 : 1; n <= f.n_used; n += 2) {
    const double d = n - x;
    guard_pole(d, n);
    out.nearest_pole_distance = std::min(out.nearest_pole_distance, std::fabs(d));
    out.value += f[n] * L[n] * ExtendedReal(1.0 + sd / d);
  }
  out.converged = f.converged;
  out.n_used = f.n_used;
  return out;
}

GValue eval_falpha(const OnePhotonParams& p, double alpha_disp, Parity parity, int m_max) {
  if (!p.unbiased()) throw Error(ErrorCode::InvalidParameter, "F(alpha) needs eps = 0");
  const FAlphaSeries s = falpha_series(p, alpha_disp, parity, m_max);
  GValue out;
  out.value = s.partial_sums.back();
  out.converged = true;
  out.nearest_pole_distance = std::numeric_limits<double>::infinity();
  out.n_used = m_max;
  return out;
}

double falpha_energy(const OnePhotonParams& p, double alpha_disp, Parity parity) {
  return alpha_disp * p.g - sign_of(parity) * p.delta / 2;
}

double falpha_alpha(const OnePhotonParams& p, double energy, Parity parity) {
  if (p.g == 0.0) throw Error(ErrorCode::ZeroCoupling, "alpha is undefined at g = 0");
  return (energy + sign_of(parity) * p.delta / 2) / p.g;
}

PoleSet pole_locations(const ModelParams& p, Sector sector, double x_lo, double x_hi) {
  PoleSet out;
  if (!(x_lo <= x_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi)) return out;
  if (sector == Sector::FAlphaPlus || sector == Sector::FAlphaMinus) return out;

  auto add_family = [&](double shift, int step, int first, PoleFamily fam) {
    const int n_lo = std::max(first, static_cast<int>(std::ceil(x_lo - shift)));
    for (int n = n_lo; n + shift <= x_hi; ++n) {
      if ((n - first) % step != 0) continue;
      out.poles.push_back({n + shift, n, fam});
    }
  };

  if (const auto* one = std::get_if<OnePhotonParams>(&p)) {
    if (!is_one_photon(sector))
      throw Error(ErrorCode::InvalidParameter, "sector does not belong to the one-photon model");
    if (sector == Sector::OnePhotonBiased && !one->unbiased()) {
      add_family(-one->eps / 2, 1, 0, PoleFamily::PlusHalfBias);
      add_family(one->eps / 2, 1, 0, PoleFamily::MinusHalfBias);
    } else {
      add_family(0.0, 1, 0, PoleFamily::Integer);
    }
  } else {
    if (is_one_photon(sector))
      throw Error(ErrorCode::InvalidParameter, "sector does not belong to the two-photon model");
    const bool odd = sector == Sector::TwoPhotonOddPlus || sector == Sector::TwoPhotonOddMinus;
    add_family(0.0, 2, odd ? 1 : 0, PoleFamily::Integer);
  }

  std::stable_sort(out.poles.begin(), out.poles.end(),
                   [](const Pole& a, const Pole& b) { return a.x < b.x; });
  out.poles.erase(std::unique(out.poles.begin(), out.poles.end(),
                              [](const Pole& a, const Pole& b) { return a.x == b.x; }),
                  out.poles.end());
  return out;
}

int default_series_length(const ModelParams& p) {
  return std::holds_alternative<OnePhotonParams>(p) ? kOnePhotonDefaultN : kTwoPhotonDefaultN;
}

std::vector<GBranch> model_branches(const ModelParams& params, int n_max) {
  validate(params);
  const int n = n_max > 0 ? n_max : default_series_length(params);
  std::vector<GBranch> out;

  if (const auto* one = std::get_if<OnePhotonParams>(&params)) {
    const OnePhotonParams p = *one;
    auto e_of_x = [p](double x) { return one_photon_energy(p, x); };
    auto x_of_e = [p](double e) { return one_photon_x(p, e); };
    if (p.unbiased()) {
      // Minus first: its lowest zero is the ground state.
      for (Parity par : {Parity::Minus, Parity::Plus}) {
        out.push_back({one_photon_sector(par),
                       [p, par, n](double x) { return eval_g0(p, x, par, n); }, e_of_x, x_of_e});
      }
    } else {
      out.push_back({Sector::OnePhotonBiased,
                     [p, n](double x) { return eval_g_biased(p, x, n); }, e_of_x, x_of_e});
    }
    return out;
  }

  const TwoPhotonParams p = std::get<TwoPhotonParams>(params);
  const SqueezeFrame frame = derive_squeeze_frame(p);
  auto e_of_x = [frame](double x) { return two_photon_energy(frame, x); };
  auto x_of_e = [frame](double e) { return two_photon_x(frame, e); };
  for (ChainStart start : {ChainStart::Even, ChainStart::Odd}) {
    for (Parity par : {Parity::Plus, Parity::Minus}) {
      out.push_back({two_photon_sector(start, par),
                     [p, start, par, n](double x) { return eval_g2p(p, x, start, par, n); },
                     e_of_x, x_of_e});
    }
  }
  return out;
}

}  // namespace rabi
