#include "rabi/chains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rabi/errors.hpp"

namespace rabi {

namespace {

void check_denominator(double d, int m) {
  if (std::fabs(d) < kPoleGuard)
    throw Error(ErrorCode::PoleTooClose,
                "recurrence denominator at m=" + std::to_string(m) + " is " + std::to_string(d));
}

int first_safe_index(double x) {
  // Terms below the turning point m ~ x can dip transiently; the tail test
  // starts counting past it.
  return std::max(0, static_cast<int>(std::ceil(x)) + 2);
}

int start_index(ChainStart s) { return s == ChainStart::Even ? 0 : 1; }

}  // namespace

void TailMonitor::push(int n, const ExtendedReal& term) {
  if (converged_) return;
  const ExtendedReal mag = term.abs();
  if (ExtendedReal::abs_less(max_, mag)) max_ = mag;
  if (n < min_index_ || max_.is_zero()) {
    run_ = 0;
    return;
  }
  if (ExtendedReal::abs_less(mag, max_ * ExtendedReal(kTailRelTol))) {
    if (++run_ >= kTailRun) {
      converged_ = true;
      converged_at_ = n;
    }
  } else {
    run_ = 0;
  }
}

// ---------------------------------------------------------------------------
// Omega evaluators

OnePhotonOmega::OnePhotonOmega(const OnePhotonParams& p, double x, Frame frame)
    : x_(x),
      half_bias_(frame == Frame::A ? p.eps / 2 : -p.eps / 2),
      four_g2_(4 * p.g * p.g),
      delta2_quarter_(p.delta * p.delta / 4) {}

double OnePhotonOmega::scaled_omega(int m) const {
  const double d = denominator(m);
  check_denominator(d, m);
  return ((m - x_ + four_g2_ + half_bias_) - delta2_quarter_ / d) / 2;
}

double OnePhotonOmega::pole_distance(int m_max) const {
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= m_max; ++m) best = std::min(best, std::fabs(denominator(m)));
  return best;
}

TwoPhotonOmega::TwoPhotonOmega(const TwoPhotonParams& p, double x)
    : x_(x),
      g_(p.g),
      delta2_quarter_(p.delta * p.delta / 4),
      frame_(derive_squeeze_frame(p)) {
  energy_ = two_photon_energy(frame_, x);
  kappa_ = frame_.u * frame_.v + p.g * frame_.beta2;
}

double TwoPhotonOmega::omega(int m) const {
  const double d = denominator(m);
  check_denominator(m - x_, m);
  const double uv = frame_.u * frame_.v;
  return frame_.beta2 * m + frame_.v * frame_.v + 2 * g_ * uv * (2 * m + 1) - energy_ -
         delta2_quarter_ / d;
}

// ---------------------------------------------------------------------------
// Forward chains

CoefficientChain one_photon_chain(const OnePhotonParams& p, double energy, Frame frame,
                                  int n_max) {
  p.validate();
  if (n_max < 0) throw Error(ErrorCode::InvalidParameter, "one_photon_chain needs N >= 0");
  const double x = one_photon_x(p, energy);
  const OnePhotonOmega omega(p, x, frame);
  const ExtendedReal g2(p.g * p.g);

  CoefficientChain chain;
  chain.scaled = true;
  chain.sector = p.unbiased() ? Sector::OnePhotonUnbiasedPlus : Sector::OnePhotonBiased;
  chain.x = x;
  chain.terms.reserve(n_max + 1);
  TailMonitor tail(first_safe_index(x));

  ExtendedReal prev2;            // t_{m-2}
  ExtendedReal prev1(1.0);       // t_{m-1}
  chain.terms.push_back(prev1);  // t_0
  tail.push(0, prev1);
  for (int m = 1; m <= n_max && !tail.converged(); ++m) {
    const ExtendedReal t =
        (ExtendedReal(omega.scaled_omega(m - 1)) * prev1 - g2 * prev2) / ExtendedReal(m);
    chain.terms.push_back(t);
    tail.push(m, t);
    prev2 = prev1;
    prev1 = t;
  }
  chain.converged = tail.converged();
  chain.n_used = static_cast<int>(chain.terms.size()) - 1;
  return chain;
}

CoefficientChain two_photon_chain(const TwoPhotonParams& p, double x, ChainStart start,
                                  int n_max, ChainScaling scaling) {
  p.validate();
  if (n_max < start_index(start))
    throw Error(ErrorCode::InvalidParameter, "two_photon_chain needs N >= its start index");
  const TwoPhotonOmega omega(p, x);
  const double kappa = omega.coupling();
  const bool scaled = scaling == ChainScaling::Scaled;
  if (!scaled && kappa == 0.0)
    throw Error(ErrorCode::ZeroCoupling, "raw two-photon chain is singular at g = 0");

  // Raw:    (m+2)(m+1) f_{m+2} = Omega(m)/kappa f_m - f_{m-2}
  // Scaled: (m+2)(m+1) F_{m+2} = Omega(m) F_m - kappa^2 F_{m-2},  F_n = f_n kappa^floor(n/2)
  const ExtendedReal back_coeff(scaled ? kappa * kappa : 1.0);
  const double omega_div = scaled ? 1.0 : 1.0 / kappa;

  const CoefficientChain overlaps =
      squeeze_overlaps(omega.frame(), n_max, scaled ? ChainScaling::Scaled : ChainScaling::Raw);

  CoefficientChain chain;
  chain.scaled = scaled;
  chain.sector = two_photon_sector(start, Parity::Plus);
  chain.x = x;
  chain.terms.assign(n_max + 1, ExtendedReal{});
  TailMonitor tail(first_safe_index(x));

  const int s = start_index(start);
  chain.terms[s] = ExtendedReal(1.0);
  tail.push(s, overlaps[s]);
  int last = s;
  ExtendedReal prev2;
  for (int m = s; m + 2 <= n_max && !tail.converged(); m += 2) {
    const ExtendedReal next =
        (ExtendedReal(omega.omega(m) * omega_div) * chain.terms[m] - back_coeff * prev2) /
        ExtendedReal(static_cast<double>(m + 2) * (m + 1));
    prev2 = chain.terms[m];
    chain.terms[m + 2] = next;
    tail.push(m + 2, next * overlaps[m + 2]);
    last = m + 2;
  }
  chain.terms.resize(last + 1);
  chain.converged = tail.converged();
  chain.n_used = last;
  return chain;
}

CoefficientChain squeeze_overlaps(const SqueezeFrame& frame, int n_max, ChainScaling scaling) {
  if (n_max < 0) throw Error(ErrorCode::InvalidParameter, "squeeze_overlaps needs N >= 0");
  CoefficientChain chain;
  chain.scaled = scaling == ChainScaling::Scaled;
  chain.converged = true;
  chain.n_used = n_max;
  chain.sector = Sector::TwoPhotonEvenPlus;
  chain.terms.resize(n_max + 1);

  // L_{2k} = (2k)!/k! (v/2u)^k and L_{2k+1} = (2k+1)!/(k! 2^k) v^{k+1}/u^k, so
  // L_{n+2} = L_n (n+1) v/u for even n and L_n (n+2) v/u for odd n.
  // Scaled values divide by (2uv)^k (odd ones also by v): ratio (n+1)/(2u^2), (n+2)/(2u^2).
  const double ratio = chain.scaled ? 1.0 / (2 * frame.u * frame.u) : frame.v / frame.u;
  chain.terms[0] = ExtendedReal(1.0);
  if (n_max >= 1) chain.terms[1] = ExtendedReal(chain.scaled ? 1.0 : frame.v);
  for (int n = 0; n + 2 <= n_max; ++n) {
    const double step = (n % 2 == 0) ? n + 1 : n + 2;
    chain.terms[n + 2] = chain.terms[n] * ExtendedReal(step * ratio);
  }
  return chain;
}

// ---------------------------------------------------------------------------
// F(alpha) coefficients

FAlphaSeries falpha_series(const OnePhotonParams& p, double alpha_disp, Parity parity,
                           int m_max) {
  p.validate();
  if (p.g == 0.0) throw Error(ErrorCode::ZeroCoupling, "F(alpha) recurrence needs g > 0");
  if (m_max < 0) throw Error(ErrorCode::InvalidParameter, "falpha_chain needs M >= 0");
  const double sigma = sign_of(parity);
  const ExtendedReal half_delta(p.delta / 2);

  // weights w_j = (2 alpha)^j / j!
  std::vector<ExtendedReal> w(m_max + 1);
  w[0] = ExtendedReal(1.0);
  for (int j = 1; j <= m_max; ++j) w[j] = w[j - 1] * ExtendedReal(2 * alpha_disp / j);

  FAlphaSeries out;
  CoefficientChain& c = out.coefficients;
  c.sector = parity == Parity::Plus ? Sector::FAlphaPlus : Sector::FAlphaMinus;
  c.x = alpha_disp;
  c.converged = true;
  c.n_used = m_max;
  c.terms.assign(m_max + 1, ExtendedReal{});
  out.partial_sums.assign(m_max + 1, ExtendedReal{});

  auto partial_sum = [&](int m) {
    ExtendedReal s;
    for (int j = 0; j <= m; ++j) s += w[j] * c.terms[m - j];
    return s;
  };

  c.terms[0] = ExtendedReal(1.0);
  out.partial_sums[0] = c.terms[0];
  if (m_max >= 1) {
    c.terms[1] = ExtendedReal{};
    out.partial_sums[1] = partial_sum(1);
  }
  const ExtendedReal shift(alpha_disp + p.g);
  for (int m = 1; m + 1 <= m_max; ++m) {
    // (m+1) g c_{m+1} = -(m +- D/2) c_m - (alpha + g) c_{m-1} +- (-1)^m (D/2) S_m
    const double alt = (m % 2 == 0) ? sigma : -sigma;
    const ExtendedReal rhs = -ExtendedReal(m + sigma * p.delta / 2) * c.terms[m] -
                             shift * c.terms[m - 1] +
                             ExtendedReal(alt) * half_delta * out.partial_sums[m];
    c.terms[m + 1] = rhs / ExtendedReal((m + 1) * p.g);
    out.partial_sums[m + 1] = partial_sum(m + 1);
  }
  return out;
}

CoefficientChain falpha_chain(const OnePhotonParams& p, double alpha_disp, Parity parity,
                              int m_max) {
  if (m_max < 4) throw Error(ErrorCode::InvalidParameter, "falpha_chain needs M >= 4");
  return falpha_series(p, alpha_disp, parity, m_max).coefficients;
}

// ---------------------------------------------------------------------------
// Upper-spin coefficients

CoefficientChain relate_e_from_f(const CoefficientChain& chain, const OnePhotonParams& p,
                                 double energy, Frame frame) {
  const OnePhotonOmega omega(p, one_photon_x(p, energy), frame);
  CoefficientChain e = chain;
  for (std::size_t m = 0; m < chain.size(); ++m) {
    if (chain[m].is_zero()) continue;
    const double d = omega.denominator(static_cast<int>(m));
    check_denominator(d, static_cast<int>(m));
    e.terms[m] = chain[m] * ExtendedReal(p.delta / 2 / d);
  }
  return e;
}

CoefficientChain relate_e_from_f(const CoefficientChain& chain, const TwoPhotonParams& p,
                                 double energy) {
  const SqueezeFrame frame = derive_squeeze_frame(p);
  const double x = two_photon_x(frame, energy);
  CoefficientChain e = chain;
  for (std::size_t m = 0; m < chain.size(); ++m) {
    if (chain[m].is_zero()) continue;
    check_denominator(static_cast<double>(m) - x, static_cast<int>(m));
    const double d = (static_cast<double>(m) - frame.v * frame.v) / frame.beta2 - energy;
    e.terms[m] = chain[m] * ExtendedReal(p.delta / 2 / d);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Minimal solutions by backward recurrence

std::vector<ExtendedReal> one_photon_minimal_chain(const OnePhotonParams& p, double energy,
                                                   Frame frame, int n_top) {
  p.validate();
  if (n_top < 2) throw Error(ErrorCode::InvalidParameter, "minimal chain needs n_top >= 2");
  const OnePhotonOmega omega(p, one_photon_x(p, energy), frame);
  std::vector<ExtendedReal> f(n_top + 2);

  if (p.g == 0.0) {
    // Decoupled: g Omega(n) f_n = 0 for every n, so only the index where the
    // bracket vanishes carries weight.
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= n_top; ++n) {
      const double v = std::fabs(omega.scaled_omega(n));
      if (v < best_val) {
        best_val = v;
        best = n;
      }
    }
    f[best] = ExtendedReal(1.0);
    f.resize(n_top + 1);
    return f;
  }

  // f_{m-2} = Omega(m-1) f_{m-1} - m f_m, started from f_{top+1} = 0, f_top = 1.
  const double inv_g = 1.0 / p.g;
  f[n_top + 1] = ExtendedReal{};
  f[n_top] = ExtendedReal(1.0);
  for (int m = n_top + 1; m >= 2; --m) {
    f[m - 2] = ExtendedReal(omega.scaled_omega(m - 1) * inv_g) * f[m - 1] -
               ExtendedReal(static_cast<double>(m)) * f[m];
  }
  f.resize(n_top + 1);
  return f;
}

std::vector<ExtendedReal> two_photon_minimal_chain(const TwoPhotonParams& p, double x,
                                                   ChainStart start, int n_top) {
  p.validate();
  const TwoPhotonOmega omega(p, x);
  const int s = start_index(start);
  if ((n_top - s) % 2 != 0) --n_top;
  if (n_top < s + 2) throw Error(ErrorCode::InvalidParameter, "minimal chain needs n_top >= 2");
  std::vector<ExtendedReal> f(n_top + 3);
  const double kappa = omega.coupling();

  if (kappa == 0.0) {
    int best = s;
    double best_val = std::numeric_limits<double>::infinity();
    for (int n = s; n <= n_top; n += 2) {
      const double v = std::fabs(omega.omega(n));
      if (v < best_val) {
        best_val = v;
        best = n;
      }
    }
    f[best] = ExtendedReal(1.0);
    f.resize(n_top + 1);
    return f;
  }

  // f_{m-2} = Omega(m)/kappa f_m - (m+2)(m+1) f_{m+2}
  f[n_top] = ExtendedReal(1.0);
  for (int m = n_top; m >= s + 2; m -= 2) {
    f[m - 2] = ExtendedReal(omega.omega(m) / kappa) * f[m] -
               ExtendedReal(static_cast<double>(m + 2) * (m + 1)) * f[m + 2];
  }
  f.resize(n_top + 1);
  return f;
}

}  // namespace rabi
