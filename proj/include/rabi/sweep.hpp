#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rabi/errors.hpp"
#include "rabi/gfunctions.hpp"
#include "rabi/model.hpp"
#include "rabi/rootfinder.hpp"

namespace rabi {

/// What a table row records. EdOnly rows are oracle levels that no G root matched;
/// Failed rows stand for a grid point whose spectrum could not be computed.
enum class RowKind { Regular, Exceptional, EdOnly, Failed };
const char* to_string(RowKind k);

struct SpectrumRow {
  double g = 0.0;
  Sector sector = Sector::OnePhotonUnbiasedPlus;  // unused for EdOnly and Failed rows
  int level = -1;  // energy rank among the G roots at this g, -1 for EdOnly/Failed rows
  double energy = 0.0;
  double x = 0.0;
  RowKind kind = RowKind::Regular;
  double residual = 0.0;
  double energy_ed = 0.0;  // NaN when no oracle level matched or validation is off
  double abs_err = 0.0;
  ErrorCode error = ErrorCode::InvalidParameter;  // meaningful for Failed rows only
  std::string message;
};

/// Long-format spectrum, rows ordered by (g, energy) with failed points first at their g.
struct SpectrumTable {
  std::vector<SpectrumRow> rows;
  bool validated = false;
  std::vector<std::pair<double, double>> unconverged;  // (g, x) samples that failed the tail test
  std::vector<std::pair<double, Suspect>> suspects;    // (g, near-tangent minimum)

  int failed_points() const;
};

struct SweepOptions {
  double e_lo = -1.0;
  double e_hi = 6.0;
  ScanConfig scan;
  int n_max = 0;          // series length, 0 for the model default
  bool validate = false;  // match every point against exact diagonalization
  int ed_cutoff = 0;      // 0 for default_cutoff(model)
  int threads = 1;        // <= 0 uses the hardware concurrency
};

/// Spectrum at every coupling of g_grid, with the other parameters taken from tmpl.
/// A point that throws becomes a Failed row; the sweep itself only throws for an empty
/// energy window. Output does not depend on the thread count.
SpectrumTable sweep_coupling(const ModelParams& tmpl, const std::vector<double>& g_grid,
                             const SweepOptions& opt = {});

/// g_min + k step for k = 0.. while the value stays below g_max + step/1000.
std::vector<double> coupling_grid(double g_min, double g_max, double step);

/// Copy of p with the coupling replaced.
ModelParams with_coupling(const ModelParams& p, double g);

struct GScanPoint {
  double x = 0.0;
  int sign = 0;
  double log2_abs = 0.0;  // -inf where G vanishes exactly
  bool converged = true;
};

/// Excluded interval around a pole; the trace has no points strictly inside (lo, hi).
struct GScanGap {
  double pole = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct GScanTrace {
  Sector sector = Sector::OnePhotonUnbiasedPlus;
  std::vector<GScanPoint> points;
  std::vector<GScanGap> gaps;
};

/// G of one sector on `points` uniform abscissae over [x_lo, x_hi]. Abscissae within
/// pole_exclusion of a pole are dropped and the exclusion edges pole -+ pole_exclusion
/// are sampled instead, which is the grid find_zeros uses when the uniform spacing
/// matches 1/grid_per_unit. Throws WindowEmpty for an empty window and InvalidParameter
/// for points < 2 or a sector the model does not have.
GScanTrace gscan(const ModelParams& p, Sector sector, double x_lo, double x_hi, int points,
                 const ScanConfig& cfg = {}, int n_max = 0);

}  // namespace rabi
