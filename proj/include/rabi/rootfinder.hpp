#pragma once

#include <utility>
#include <vector>

#include "rabi/gfunctions.hpp"
#include "rabi/model.hpp"

namespace rabi {

struct ScanConfig {
  int grid_per_unit = 200;
  double refine_tol = 1e-12;
  double dedup_tol = 1e-9;
  double pole_exclusion = 1e-6;
  double lift_tol = 1e-8;

  /// Throws InvalidParameter unless all fields are positive and
  /// pole_exclusion > refine_tol.
  void validate() const;
};

enum class RootKind { Regular, Exceptional };
const char* to_string(RootKind k);

struct Root {
  double x = 0.0;
  double energy = 0.0;
  Sector sector = Sector::OnePhotonUnbiasedPlus;
  /// Regular: |G(x)| over the larger endpoint value of the grid cell.
  /// Exceptional: the lift residual |delta f_n(n)| / max_k |f_k(n)|.
  double residual = 0.0;
  RootKind kind = RootKind::Regular;
  double lo = 0.0;
  double hi = 0.0;
  /// Pole index for exceptional roots, -1 otherwise.
  int pole_index = -1;
};

/// A local |G| minimum without a sign change whose value is below 1e-10 of the
/// surrounding grid values: possibly a tangent zero, never promoted to a root.
struct Suspect {
  double x = 0.0;
  Sector sector = Sector::OnePhotonUnbiasedPlus;
  double relative_min = 0.0;
};

struct ZeroScan {
  std::vector<Root> roots;
  std::vector<Suspect> suspects;
  /// Grid abscissae whose G-value failed the tail test (the scan still used them).
  std::vector<double> unconverged;
};

/// All sign-change zeros of one branch in [x_lo, x_hi], avoiding the given poles.
/// Throws WindowEmpty for an empty or non-finite window.
ZeroScan find_zeros(const GBranch& branch, const PoleSet& poles, double x_lo, double x_hi,
                    const ScanConfig& cfg = {});

/// Exceptional eigenvalues at the poles with index n_lo..n_hi, every family of the model.
/// A pole is lifted when |delta f_n(x_pole)| < lift_tol * max_{k<=n} |f_k(x_pole)|; each
/// lifted pole of an unbiased model yields the degenerate pair (one root per parity).
std::vector<Root> find_exceptional(const ModelParams& p, int n_lo, int n_hi,
                                   const ScanConfig& cfg = {});

/// Lift residual |delta f_n(x_pole)| / max_{k<=n} |f_k(x_pole)| for one pole.
double lift_residual(const ModelParams& p, const Pole& pole);

struct SpectrumResult {
  std::vector<Root> roots;  // sorted by energy
  std::vector<Suspect> suspects;
  std::vector<double> unconverged;
};

/// Regular roots of every branch plus exceptional roots whose pole lies in the window,
/// merged and sorted by energy. n_max <= 0 selects the model's default series length.
SpectrumResult find_spectrum(const ModelParams& p, double e_lo, double e_hi,
                             const ScanConfig& cfg = {}, int n_max = 0);

/// F(alpha) zeros of one parity branch mapped to energies in [e_lo, e_hi]. A zero is kept
/// only when the truncations M and m_check both have it within stability_tol in energy.
std::vector<Root> find_falpha_zeros(const OnePhotonParams& p, Parity parity, double e_lo,
                                    double e_hi, const ScanConfig& cfg = {},
                                    int m_max = kFAlphaDefaultM, int m_check = 100,
                                    double stability_tol = 1e-8);

/// Coupling g in [g_lo, g_hi] where the two-photon pole n is lifted (f_n(x=n; g) = 0),
/// by bisection to tol. Throws WindowEmpty if f_n has the same sign at both ends.
double locate_exceptional_coupling(double delta, int n, double g_lo, double g_hi,
                                   double tol = 1e-13);

}  // namespace rabi
