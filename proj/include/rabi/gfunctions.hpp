#pragma once

#include <functional>
#include <vector>

#include "rabi/chains.hpp"
#include "rabi/extended_real.hpp"
#include "rabi/model.hpp"

namespace rabi {

/// A G-function (or F(alpha)) value. Overall constants such as exp(-g^2/2) and the
/// chain normalization are dropped, so only the sign and relative size carry meaning.
struct GValue {
  ExtendedReal value;
  bool converged = false;
  double nearest_pole_distance = 0.0;
  int n_used = 0;
};

/// Which denominator a pole comes from.
enum class PoleFamily {
  Integer,        // x - n
  MinusHalfBias,  // x - n - eps/2
  PlusHalfBias,   // x - n + eps/2
};

struct Pole {
  double x = 0.0;
  int n = 0;
  PoleFamily family = PoleFamily::Integer;
};

/// Poles sorted by position. Coinciding positions from two families (eps an even
/// integer) are kept once with the first family.
struct PoleSet {
  std::vector<Pole> poles;

  std::vector<double> positions() const;
  bool empty() const { return poles.empty(); }
  std::size_t size() const { return poles.size(); }
};

/// G_0^{+-}(x) = sum_n t_n (1 -+ (delta/2)/(x - n)) for the unbiased one-photon model.
GValue eval_g0(const OnePhotonParams& p, double x, Parity parity,
               int n_max = kOnePhotonDefaultN);

/// G_eps(x) = (delta/2)^2 Rbar+ Rbar- - R+ R- built from the frame-B (+) and frame-A (-)
/// chains. Equals -G_0^+ G_0^- at eps = 0.
GValue eval_g_biased(const OnePhotonParams& p, double x, int n_max = kOnePhotonDefaultN);

/// Two-photon G_{e,o}^{+-}(x) = sum_n f_n [1 +- delta (u^2+v^2) / (2 (n - x))] L_n over
/// indices of the sector's parity.
GValue eval_g2p(const TwoPhotonParams& p, double x, ChainStart start, Parity parity,
                int n_max = kTwoPhotonDefaultN);

/// F(alpha) = S_M, the last partial sum of the displaced-basis series. Its zeros sit
/// at alpha with E = alpha g -+ delta/2 (see falpha_energy).
GValue eval_falpha(const OnePhotonParams& p, double alpha_disp, Parity parity,
                   int m_max = kFAlphaDefaultM);

/// E = alpha g - delta/2 for Plus, alpha g + delta/2 for Minus.
double falpha_energy(const OnePhotonParams& p, double alpha_disp, Parity parity);
double falpha_alpha(const OnePhotonParams& p, double energy, Parity parity);

/// Poles of the G-function for the given sector inside [x_lo, x_hi] (inclusive).
/// Only n >= 0 produce poles.
PoleSet pole_locations(const ModelParams& p, Sector sector, double x_lo, double x_hi);

/// One evaluable branch of a model: a sector, its G-function in the spectral
/// variable, and the x -> E map.
struct GBranch {
  Sector sector = Sector::OnePhotonUnbiasedPlus;
  std::function<GValue(double)> eval;
  std::function<double(double)> energy_of_x;
  std::function<double(double)> x_of_energy;
};

/// Every G-function branch of the model: two for the unbiased one-photon model,
/// one for the biased model, four for the two-photon model.
std::vector<GBranch> model_branches(const ModelParams& p, int n_max = 0);

/// Default series ceiling for the model (n_max <= 0 in the APIs above means this).
int default_series_length(const ModelParams& p);

}  // namespace rabi
