#pragma once

#include <string_view>
#include <variant>

namespace rabi {

/// H = -(eps sz + delta sx)/2 + a^dag a + g (a^dag + a) sz, in units hbar = omega = 1.
///
/// A different oscillator frequency w is handled by the caller: divide delta, eps,
/// g by w, solve, multiply energies by w.
struct OnePhotonParams {
  double delta = 1.0;
  double eps = 0.0;
  double g = 0.0;

  bool unbiased() const { return eps == 0.0; }
  /// Throws InvalidParameter on g < 0 or non-finite entries.
  void validate() const;
};

/// Constants of the two displaced frames A = a + g and B = a - g.
struct OnePhotonConstants {
  double alpha = 0.0;    // g^2 + eps/2
  double beta = 0.0;     // 3g^2 + eps/2
  double alpha_p = 0.0;  // g^2 - eps/2
  double beta_p = 0.0;   // 3g^2 - eps/2
};

/// H = a^dag a + g (a^dag^2 + a^2) sz - delta sx / 2. Valid for 0 <= g < 1/2.
struct TwoPhotonParams {
  double delta = 1.0;
  double g = 0.0;

  /// Throws CouplingOutOfRange when g is within kCollapseGuard of 1/2 or above.
  void validate() const;
};

/// Squeeze transform b = u a + v a^dag with u^2 - v^2 = 1 and beta2 = u^2 + v^2.
struct SqueezeFrame {
  double u = 1.0;
  double v = 0.0;
  double beta2 = 1.0;
};

/// Two-photon couplings closer than this to 1/2 are rejected.
inline constexpr double kCollapseGuard = 1e-9;

enum class Sector {
  OnePhotonUnbiasedPlus,
  OnePhotonUnbiasedMinus,
  OnePhotonBiased,
  TwoPhotonEvenPlus,
  TwoPhotonEvenMinus,
  TwoPhotonOddPlus,
  TwoPhotonOddMinus,
  FAlphaPlus,
  FAlphaMinus,
};

std::string_view to_string(Sector s);
/// Inverse of to_string; throws InvalidParameter for unknown names.
Sector sector_from_string(std::string_view name);

enum class Parity { Plus, Minus };
enum class ChainStart { Even, Odd };
enum class Frame { A, B };

/// +1 for Plus, -1 for Minus.
inline double sign_of(Parity p) { return p == Parity::Plus ? 1.0 : -1.0; }

Sector one_photon_sector(Parity p);
Sector two_photon_sector(ChainStart start, Parity p);

using ModelParams = std::variant<OnePhotonParams, TwoPhotonParams>;

void validate(const ModelParams& p);

OnePhotonConstants derive_one_photon_constants(const OnePhotonParams& p);
SqueezeFrame derive_squeeze_frame(const TwoPhotonParams& p);

// Spectral variable <-> energy. One-photon: E = x - g^2.
// Two-photon: E = (x - v^2) / (u^2 + v^2).
double one_photon_energy(const OnePhotonParams& p, double x);
double one_photon_x(const OnePhotonParams& p, double energy);
double two_photon_energy(const SqueezeFrame& f, double x);
double two_photon_x(const SqueezeFrame& f, double energy);

double map_x_to_energy(const ModelParams& p, double x);
double map_energy_to_x(const ModelParams& p, double energy);

/// Energy of the n-th two-photon pole, (n + 1/2) sqrt(1 - 4g^2) - 1/2.
double two_photon_pole_energy(double g, int n);

}  // namespace rabi
