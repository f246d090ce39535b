#pragma once

#include <vector>

#include "rabi/extended_real.hpp"
#include "rabi/model.hpp"

namespace rabi {

/// Recurrence denominators closer than this to zero raise PoleTooClose.
inline constexpr double kPoleGuard = 1e-12;

/// Default ceilings for the series length.
inline constexpr int kOnePhotonDefaultN = 200;
inline constexpr int kTwoPhotonDefaultN = 400;
inline constexpr int kFAlphaDefaultM = 80;

/// Relative tail test: the series counts as converged once kTailRun consecutive
/// terms are below kTailRelTol times the largest term seen so far.
class TailMonitor {
public:
  static constexpr double kTailRelTol = 1e-14;
  static constexpr int kTailRun = 5;

  /// Terms pushed before min_index never count toward the run.
  explicit TailMonitor(int min_index = 0) : min_index_(min_index) {}

  void push(int n, const ExtendedReal& term);
  bool converged() const { return converged_; }
  /// Index at which the run completed; -1 while unconverged.
  int converged_at() const { return converged_at_; }
  const ExtendedReal& max_term() const { return max_; }

private:
  int min_index_;
  int run_ = 0;
  bool converged_ = false;
  int converged_at_ = -1;
  ExtendedReal max_;
};

/// Whether two-photon coefficients absorb the coupling power.
///
/// Raw: f_n and L_n exactly as in the recurrence. Scaled: f_n kappa^floor(n/2) and
/// L_n / kappa^floor(n/2) (odd overlaps additionally divided by v), kappa = uv + g beta.
/// Scaled products differ from raw ones by a per-sector constant and stay finite at g = 0.
enum class ChainScaling { Raw, Scaled };

struct CoefficientChain {
  std::vector<ExtendedReal> terms;  // index n = 0..n_used
  bool scaled = false;
  Sector sector = Sector::OnePhotonUnbiasedPlus;
  double x = 0.0;
  bool converged = false;
  int n_used = 0;

  const ExtendedReal& operator[](std::size_t n) const { return terms[n]; }
  std::size_t size() const { return terms.size(); }
};

/// Recurrence coefficients of the one-photon chains in frame A (alpha, beta) or
/// frame B (alpha', beta'), evaluated at spectral variable x (E = x - g^2).
class OnePhotonOmega {
public:
  OnePhotonOmega(const OnePhotonParams& p, double x, Frame frame);

  /// m - alpha - E (frame A) or m - alpha' - E (frame B).
  double denominator(int m) const { return m - x_ - half_bias_; }
  /// g * Omega(m) = [(m + beta - E) - delta^2 / (4 (m - alpha - E))] / 2.
  double scaled_omega(int m) const;
  /// Distance from x to the nearest denominator zero over m = 0..m_max.
  double pole_distance(int m_max) const;
  double x() const { return x_; }

private:
  double x_;
  double half_bias_;  // +eps/2 in frame A, -eps/2 in frame B
  double four_g2_;
  double delta2_quarter_;
};

/// Two-photon Omega(m) and the squeeze-frame constants at spectral variable x.
class TwoPhotonOmega {
public:
  TwoPhotonOmega(const TwoPhotonParams& p, double x);

  /// (m - v^2)/(u^2 + v^2) - E, equal to (m - x)/(u^2 + v^2).
  double denominator(int m) const { return (m - x_) / frame_.beta2; }
  double omega(int m) const;
  /// kappa = uv + g (u^2 + v^2).
  double coupling() const { return kappa_; }
  const SqueezeFrame& frame() const { return frame_; }
  double energy() const { return energy_; }
  double x() const { return x_; }

private:
  double x_;
  double energy_;
  double g_;
  double delta2_quarter_;
  SqueezeFrame frame_;
  double kappa_;
};

/// g-scaled one-photon chain t_n = f_n g^n:
/// m t_m = g Omega(m-1) t_{m-1} - g^2 t_{m-2}, t_0 = 1, t_1 = g Omega(0).
CoefficientChain one_photon_chain(const OnePhotonParams& p, double energy, Frame frame,
                                  int n_max = kOnePhotonDefaultN);

/// Two-photon chain of one photon-number parity:
/// (m+2)(m+1) f_{m+2} = -f_{m-2} + Omega(m)/kappa f_m, f_0 = 1 (even) or f_1 = 1 (odd).
/// Entries of the other parity are zero.
CoefficientChain two_photon_chain(const TwoPhotonParams& p, double x, ChainStart start,
                                  int n_max = kTwoPhotonDefaultN,
                                  ChainScaling scaling = ChainScaling::Raw);

/// Vacuum-projected squeezed-state overlaps L_0..L_n_max (both parities).
CoefficientChain squeeze_overlaps(const SqueezeFrame& frame, int n_max,
                                  ChainScaling scaling = ChainScaling::Raw);

/// F(alpha) coefficients c_0..c_M for the given displacement variable and parity
/// branch, c_0 = 1, c_1 = 0. Throws ZeroCoupling for g = 0.
CoefficientChain falpha_chain(const OnePhotonParams& p, double alpha_disp, Parity parity,
                              int m_max = kFAlphaDefaultM);

/// Partial sums S_m = sum_j (2 alpha)^j / j! c_{m-j}, m = 0..M, alongside the c_m.
struct FAlphaSeries {
  CoefficientChain coefficients;
  std::vector<ExtendedReal> partial_sums;
};
FAlphaSeries falpha_series(const OnePhotonParams& p, double alpha_disp, Parity parity,
                           int m_max = kFAlphaDefaultM);

/// Upper-spin coefficients e_m = (delta/2) f_m / (m - alpha - E) from a lower-spin chain
/// at energy E (frame B uses alpha'). The ratio e_m / f_m does not depend on how
/// the chain is scaled.
CoefficientChain relate_e_from_f(const CoefficientChain& chain, const OnePhotonParams& p,
                                 double energy, Frame frame = Frame::A);
/// Two-photon form, e_m = (delta/2) f_m / ((m - v^2)/(u^2 + v^2) - E).
CoefficientChain relate_e_from_f(const CoefficientChain& chain, const TwoPhotonParams& p,
                                 double energy);

/// Minimal (decaying) solution of the one-photon recurrence in unscaled f_n,
/// obtained by backward recurrence from n_top. At an eigenvalue this is the
/// normalizable frame expansion of the eigenstate; the forward chain is not.
std::vector<ExtendedReal> one_photon_minimal_chain(const OnePhotonParams& p, double energy,
                                                   Frame frame, int n_top);

/// Minimal solution of the two-photon recurrence (unscaled f_n, one parity).
std::vector<ExtendedReal> two_photon_minimal_chain(const TwoPhotonParams& p, double x,
                                                   ChainStart start, int n_top);

}  // namespace rabi
