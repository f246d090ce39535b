#include "rabi/model.hpp"

#include <array>
#include <cmath>
#include <string>

#include "rabi/errors.hpp"

namespace rabi {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::CouplingOutOfRange: return "CouplingOutOfRange";
    case ErrorCode::ZeroCoupling: return "ZeroCoupling";
    case ErrorCode::PoleTooClose: return "PoleTooClose";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::WindowEmpty: return "WindowEmpty";
    case ErrorCode::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateState: return "DegenerateState";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 9> kSectorNames = {
    "one-photon-unbiased-plus", "one-photon-unbiased-minus", "one-photon-biased",
    "two-photon-even-plus",     "two-photon-even-minus",     "two-photon-odd-plus",
    "two-photon-odd-minus",     "falpha-plus",               "falpha-minus",
};

}  // namespace

std::string_view to_string(Sector s) { return kSectorNames[static_cast<std::size_t>(s)]; }

Sector sector_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kSectorNames.size(); ++i)
    if (kSectorNames[i] == name) return static_cast<Sector>(i);
  throw Error(ErrorCode::InvalidParameter, "unknown sector '" + std::string(name) + "'");
}

Sector one_photon_sector(Parity p) {
  return p == Parity::Plus ? Sector::OnePhotonUnbiasedPlus : Sector::OnePhotonUnbiasedMinus;
}

Sector two_photon_sector(ChainStart start, Parity p) {
  if (start == ChainStart::Even)
    return p == Parity::Plus ? Sector::TwoPhotonEvenPlus : Sector::TwoPhotonEvenMinus;
  return p == Parity::Plus ? Sector::TwoPhotonOddPlus : Sector::TwoPhotonOddMinus;
}

void OnePhotonParams::validate() const {
  if (!std::isfinite(delta) || !std::isfinite(eps) || !std::isfinite(g))
    throw Error(ErrorCode::InvalidParameter, "one-photon parameters must be finite");
  if (g < 0.0) throw Error(ErrorCode::InvalidParameter, "coupling g must be >= 0");
}

void TwoPhotonParams::validate() const {
  if (!std::isfinite(delta) || !std::isfinite(g))
    throw Error(ErrorCode::InvalidParameter, "two-photon parameters must be finite");
  if (g < 0.0) throw Error(ErrorCode::InvalidParameter, "coupling g must be >= 0");
  if (g >= 0.5 - kCollapseGuard)
    throw Error(ErrorCode::CouplingOutOfRange,
                "two-photon coupling must satisfy g < 1/2 (spectral collapse), got g=" +
                    std::to_string(g));
}

void validate(const ModelParams& p) {
  std::visit([](const auto& q) { q.validate(); }, p);
}

OnePhotonConstants derive_one_photon_constants(const OnePhotonParams& p) {
  const double g2 = p.g * p.g;
  return {g2 + p.eps / 2, 3 * g2 + p.eps / 2, g2 - p.eps / 2, 3 * g2 - p.eps / 2};
}

SqueezeFrame derive_squeeze_frame(const TwoPhotonParams& p) {
  p.validate();
  // v^2 = (beta - 1)/2 written without the cancellation in beta - 1 at small g.
  const double s = std::sqrt(1.0 - 4.0 * p.g * p.g);
  const double v = p.g * std::sqrt(2.0 / (s * (1.0 + s)));
  return {std::sqrt(1.0 + v * v), v, 1.0 / s};
}

double one_photon_energy(const OnePhotonParams& p, double x) { return x - p.g * p.g; }
double one_photon_x(const OnePhotonParams& p, double energy) { return energy + p.g * p.g; }

double two_photon_energy(const SqueezeFrame& f, double x) {
  return (x - f.v * f.v) / (f.u * f.u + f.v * f.v);
}
double two_photon_x(const SqueezeFrame& f, double energy) {
  return f.v * f.v + energy * (f.u * f.u + f.v * f.v);
}

double map_x_to_energy(const ModelParams& p, double x) {
  if (const auto* one = std::get_if<OnePhotonParams>(&p)) return one_photon_energy(*one, x);
  return two_photon_energy(derive_squeeze_frame(std::get<TwoPhotonParams>(p)), x);
}

double map_energy_to_x(const ModelParams& p, double energy) {
  if (const auto* one = std::get_if<OnePhotonParams>(&p)) return one_photon_x(*one, energy);
  return two_photon_x(derive_squeeze_frame(std::get<TwoPhotonParams>(p)), energy);
}

double two_photon_pole_energy(double g, int n) {
  return (n + 0.5) * std::sqrt(1.0 - 4.0 * g * g) - 0.5;
}

}  // namespace rabi
