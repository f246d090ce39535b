#include "rabi/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "rabi/fock_oracle.hpp"

namespace rabi {

const char* to_string(RowKind k) {
  switch (k) {
    case RowKind::Regular:
      return "regular";
    case RowKind::Exceptional:
      return "exceptional";
    case RowKind::EdOnly:
      return "ed-only";
    case RowKind::Failed:
      return "failed";
  }
  return "?";
}

int SpectrumTable::failed_points() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const SpectrumRow& r) {
    return r.kind == RowKind::Failed;
  }));
}

ModelParams with_coupling(const ModelParams& p, double g) {
  ModelParams q = p;
  std::visit([g](auto& m) { m.g = g; }, q);
  return q;
}

std::vector<double> coupling_grid(double g_min, double g_max, double step) {
  if (!(step > 0) || !std::isfinite(g_min) || !std::isfinite(g_max) || g_max < g_min)
    throw Error(ErrorCode::InvalidParameter, "coupling grid needs g_min <= g_max and step > 0");
  std::vector<double> out;
  for (long k = 0;; ++k) {
    const double g = g_min + static_cast<double>(k) * step;
    if (g > g_max + step * 1e-3) break;
    out.push_back(g);
  }
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointNotes {
  std::vector<std::pair<double, double>> unconverged;
  std::vector<std::pair<double, Suspect>> suspects;
};

std::vector<SpectrumRow> point_rows(const ModelParams& tmpl, double g, const SweepOptions& opt,
                                    PointNotes& notes) {
  std::vector<SpectrumRow> rows;
  try {
    const ModelParams p = with_coupling(tmpl, g);
    validate(p);
    SpectrumResult spec = find_spectrum(p, opt.e_lo, opt.e_hi, opt.scan, opt.n_max);
    for (double x : spec.unconverged) notes.unconverged.push_back({g, x});
    for (const Suspect& s : spec.suspects) notes.suspects.push_back({g, s});
    std::vector<Root> roots = std::move(spec.roots);
    std::stable_sort(roots.begin(), roots.end(),
                     [](const Root& a, const Root& b) { return a.energy < b.energy; });

    for (std::size_t i = 0; i < roots.size(); ++i) {
      const Root& r = roots[i];
      SpectrumRow row;
      row.g = g;
      row.sector = r.sector;
      row.level = static_cast<int>(i);
      row.energy = r.energy;
      row.x = r.x;
      row.kind = r.kind == RootKind::Exceptional ? RowKind::Exceptional : RowKind::Regular;
      row.residual = r.residual;
      row.energy_ed = kNaN;
      row.abs_err = kNaN;
      rows.push_back(row);
    }

    if (opt.validate) {
      const int cutoff = opt.ed_cutoff > 0 ? opt.ed_cutoff : default_cutoff(p);
      const ValidationReport rep = validate_roots(p, roots, opt.e_lo, opt.e_hi, cutoff);
      // Matched report rows come in the same energy order as the sorted roots.
      std::size_t k = 0;
      for (SpectrumRow& row : rows) {
        if (k < rep.rows.size() && rep.rows[k].energy_g == row.energy) {
          row.energy_ed = rep.rows[k].energy_ed;
          row.abs_err = rep.rows[k].abs_err;
          ++k;
        }
      }
      for (double e : rep.unmatched_ed) {
        SpectrumRow row;
        row.g = g;
        row.kind = RowKind::EdOnly;
        row.energy = kNaN;
        row.x = kNaN;
        row.residual = kNaN;
        row.energy_ed = e;
        row.abs_err = kNaN;
        rows.push_back(row);
      }
    }
  } catch (const Error& e) {
    SpectrumRow row;
    row.g = g;
    row.kind = RowKind::Failed;
    row.energy = row.x = row.residual = row.energy_ed = row.abs_err = kNaN;
    row.error = e.code();
    row.message = e.what();
    rows.assign(1, row);
  }
  return rows;
}

double sort_energy(const SpectrumRow& r) {
  if (r.kind == RowKind::Failed) return -std::numeric_limits<double>::infinity();
  return r.kind == RowKind::EdOnly ? r.energy_ed : r.energy;
}

}  // namespace

SpectrumTable sweep_coupling(const ModelParams& tmpl, const std::vector<double>& g_grid,
                             const SweepOptions& opt) {
  if (!std::isfinite(opt.e_lo) || !std::isfinite(opt.e_hi) || !(opt.e_lo < opt.e_hi))
    throw Error(ErrorCode::WindowEmpty, "empty energy window");
  opt.scan.validate();

  std::vector<std::vector<SpectrumRow>> per_point(g_grid.size());
  std::vector<PointNotes> notes(g_grid.size());
  int workers = opt.threads > 0 ? opt.threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(1, g_grid.size())));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < g_grid.size(); i = next++)
      per_point[i] = point_rows(tmpl, g_grid[i], opt, notes[i]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  SpectrumTable table;
  table.validated = opt.validate;
  for (std::size_t i = 0; i < g_grid.size(); ++i) {
    table.rows.insert(table.rows.end(), per_point[i].begin(), per_point[i].end());
    table.unconverged.insert(table.unconverged.end(), notes[i].unconverged.begin(),
                             notes[i].unconverged.end());
    table.suspects.insert(table.suspects.end(), notes[i].suspects.begin(),
                          notes[i].suspects.end());
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const SpectrumRow& a, const SpectrumRow& b) {
                     if (a.g != b.g) return a.g < b.g;
                     return sort_energy(a) < sort_energy(b);
                   });
  return table;
}

GScanTrace gscan(const ModelParams& p, Sector sector, double x_lo, double x_hi, int points,
                 const ScanConfig& cfg, int n_max) {
  validate(p);
  cfg.validate();
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !(x_lo < x_hi))
    throw Error(ErrorCode::WindowEmpty, "empty scan window");
  if (points < 2) throw Error(ErrorCode::InvalidParameter, "gscan needs at least two points");

  const std::vector<GBranch> branches = model_branches(p, n_max);
  const auto br = std::find_if(branches.begin(), branches.end(),
                               [&](const GBranch& b) { return b.sector == sector; });
  if (br == branches.end())
    throw Error(ErrorCode::InvalidParameter, "sector does not belong to the model");

  const double ex = cfg.pole_exclusion;
  const std::vector<double> poles = pole_locations(p, sector, x_lo - ex, x_hi + ex).positions();

  GScanTrace trace;
  trace.sector = sector;
  std::vector<double> xs;
  const double h = (x_hi - x_lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double x = i == points - 1 ? x_hi : x_lo + i * h;
    const bool excluded =
        std::any_of(poles.begin(), poles.end(), [&](double q) { return std::fabs(x - q) < ex; });
    if (!excluded) xs.push_back(x);
  }
  for (double q : poles) {
    trace.gaps.push_back({q, q - ex, q + ex});
    if (q - ex >= x_lo) xs.push_back(q - ex);
    if (q + ex <= x_hi) xs.push_back(q + ex);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  for (double x : xs) {
    const GValue v = br->eval(x);
    GScanPoint pt;
    pt.x = x;
    pt.sign = v.value.sign();
    pt.log2_abs = v.value.is_zero() ? -std::numeric_limits<double>::infinity()
                                    : v.value.log2_abs();
    pt.converged = v.converged;
    trace.points.push_back(pt);
  }
  return trace;
}

}  // namespace rabi
