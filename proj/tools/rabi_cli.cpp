#include "rabi_cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "rabi/errors.hpp"
#include "rabi/fock_oracle.hpp"
#include "rabi/rootfinder.hpp"
#include "rabi/sweep.hpp"
#include "rabi/version.hpp"

namespace rabi::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string model = "rabi";
  double delta = 1.0;
  double eps = 0.0;
  double g = 0.0;
  double emin = -1.0;
  double emax = 6.0;
  int trunc = 0;
  int nf = 0;
  int grid_per_unit = ScanConfig{}.grid_per_unit;
  std::string format = "csv";
  std::string out;
  int threads = 1;
  bool validate = false;

  double gmin = 0.0;
  double gmax = 1.0;
  double gstep = 0.02;

  std::string sector;
  double xmin = -1.0;
  double xmax = 6.0;
  int points = 1001;

  int nmin = 0;
  int nmax = 10;
};

// Thrown for anything that should end the run with exit code 2 before computing.
struct UsageError {
  std::string message;
};

struct IoError {
  std::string message;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json jnum(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// `key = value` lines become `--key value` (or a bare `--key` for true flags), inserted
// right after the subcommand so that flags given on the command line win.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError{"cannot read config file '" + path + "'"};
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError{path + ":" + std::to_string(lineno) + ": expected key = value"};
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") throw UsageError{path + ": nested config files are not supported"};
    if (key == "validate") {
      if (value == "true" || value == "1") out.push_back("--validate");
      else if (value != "false" && value != "0")
        throw UsageError{path + ":" + std::to_string(lineno) + ": validate expects true/false"};
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError{"--config needs a path"};
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty() || rest.empty()) return rest;
  const std::vector<std::string> extra = config_args(path);
  rest.insert(rest.begin() + 1, extra.begin(), extra.end());
  return rest;
}

void add_model_flags(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "rabi or rabi2p")
      ->check(CLI::IsMember({"rabi", "rabi2p"}));
  sub->add_option("--g", o.g, "coupling");
  sub->add_option("--delta", o.delta, "qubit splitting");
  sub->add_option("--eps", o.eps, "bias (rabi only)");
  sub->add_option("--trunc", o.trunc, "G-series length (0: model default)");
  sub->add_option("--grid-per-unit", o.grid_per_unit, "scan points per unit of x");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", o.out, "output file (default: stdout)");
  sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
}

void add_window_flags(CLI::App* sub, Options& o) {
  sub->add_option("--emin", o.emin, "lower end of the energy window");
  sub->add_option("--emax", o.emax, "upper end of the energy window");
  sub->add_option("--nf", o.nf, "photon cutoff of the oracle (0: model default)");
}

ModelParams model_params(const Options& o, const CLI::App* sub) {
  if (o.model == "rabi2p") {
    if (sub->count("--eps") > 0) throw UsageError{"--eps is not supported for rabi2p"};
    return TwoPhotonParams{o.delta, o.g};
  }
  return OnePhotonParams{o.delta, o.eps, o.g};
}

ScanConfig scan_config(const Options& o) {
  ScanConfig cfg;
  cfg.grid_per_unit = o.grid_per_unit;
  return cfg;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw UsageError{message};
}

void check_params(const ModelParams& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    throw UsageError{e.what()};
  }
}

Json params_echo(const Options& o, const std::string& command) {
  Json j;
  j["command"] = command;
  j["model"] = o.model;
  j["delta"] = o.delta;
  if (o.model == "rabi") j["eps"] = o.eps;
  return j;
}

Json document(const Json& params, Json records) {
  Json j;
  j["version"] = kVersion;
  j["params"] = params;
  j["records"] = std::move(records);
  return j;
}

// ---------------------------------------------------------------------------
// Tables

const std::vector<std::string> kSpectrumColumns{"g", "sector", "level", "energy",
                                                "x", "kind",   "residual"};

void write_spectrum_csv(std::ostream& os, const SpectrumTable& t) {
  std::vector<std::string> cols = kSpectrumColumns;
  if (t.validated) {
    cols.push_back("energy_ed");
    cols.push_back("abs_err");
  }
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const SpectrumRow& r : t.rows) {
    const bool has_sector = r.kind == RowKind::Regular || r.kind == RowKind::Exceptional;
    os << num(r.g) << ',' << (has_sector ? std::string(to_string(r.sector)) : "") << ','
       << r.level << ',' << num(r.energy) << ',' << num(r.x) << ',' << to_string(r.kind) << ','
       << num(r.residual);
    if (t.validated) os << ',' << num(r.energy_ed) << ',' << num(r.abs_err);
    os << '\n';
  }
}

Json spectrum_records(const SpectrumTable& t) {
  Json rows = Json::array();
  for (const SpectrumRow& r : t.rows) {
    const bool has_sector = r.kind == RowKind::Regular || r.kind == RowKind::Exceptional;
    Json j;
    j["g"] = r.g;
    j["sector"] = has_sector ? std::string(to_string(r.sector)) : "";
    j["level"] = r.level;
    j["energy"] = jnum(r.energy);
    j["x"] = jnum(r.x);
    j["kind"] = to_string(r.kind);
    j["residual"] = jnum(r.residual);
    if (t.validated) {
      j["energy_ed"] = jnum(r.energy_ed);
      j["abs_err"] = jnum(r.abs_err);
    }
    rows.push_back(std::move(j));
  }
  return rows;
}

// Diagnostics for a finished table and the exit code they imply.
int report_table(const SpectrumTable& t, std::ostream& err) {
  int code = kOk;
  for (const SpectrumRow& r : t.rows) {
    if (r.kind == RowKind::Failed) {
      err << "g = " << num(r.g) << ": " << r.message << '\n';
      code = kConvergenceFailure;
    } else if (r.kind == RowKind::EdOnly) {
      err << "g = " << num(r.g) << ": oracle level " << num(r.energy_ed)
          << " has no G-function partner\n";
      code = kConvergenceFailure;
    } else if (t.validated && !(r.abs_err <= 1e-6)) {
      err << "g = " << num(r.g) << ": level " << num(r.energy)
          << " disagrees with the oracle\n";
      code = kConvergenceFailure;
    }
  }
  for (const auto& [g, x] : t.unconverged) {
    err << "g = " << num(g) << ": G series not converged at x = " << num(x) << '\n';
    code = kConvergenceFailure;
  }
  for (const auto& [g, s] : t.suspects)
    err << "warning: g = " << num(g) << ": possible tangent zero near x = " << num(s.x) << " ("
        << to_string(s.sector) << ")\n";
  return code;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Output {
  std::string text;
  int code = kOk;
};

Output emit_spectrum(const Options& o, const SpectrumTable& t, const Json& params,
                     std::ostream& err) {
  Output out;
  out.code = report_table(t, err);
  std::ostringstream os;
  if (o.format == "json") {
    os << document(params, spectrum_records(t)).dump(2) << '\n';
  } else {
    write_spectrum_csv(os, t);
  }
  out.text = os.str();
  return out;
}

SweepOptions sweep_options(const Options& o) {
  SweepOptions s;
  s.e_lo = o.emin;
  s.e_hi = o.emax;
  s.scan = scan_config(o);
  s.n_max = o.trunc;
  s.validate = o.validate;
  s.ed_cutoff = o.nf;
  s.threads = o.threads;
  return s;
}

Output run_solve(const Options& o, const ModelParams& p, std::ostream& err) {
  Json params = params_echo(o, "solve");
  params["g"] = o.g;
  params["emin"] = o.emin;
  params["emax"] = o.emax;
  params["validate"] = o.validate;
  return emit_spectrum(o, sweep_coupling(p, {o.g}, sweep_options(o)), params, err);
}

Output run_sweep(const Options& o, const ModelParams& p, const std::vector<double>& grid,
                 std::ostream& err) {
  Json params = params_echo(o, "sweep");
  params["gmin"] = o.gmin;
  params["gmax"] = o.gmax;
  params["gstep"] = o.gstep;
  params["emin"] = o.emin;
  params["emax"] = o.emax;
  params["validate"] = o.validate;
  return emit_spectrum(o, sweep_coupling(p, grid, sweep_options(o)), params, err);
}

Output run_gscan(const Options& o, const ModelParams& p, Sector sector) {
  const GScanTrace t = gscan(p, sector, o.xmin, o.xmax, o.points, scan_config(o), o.trunc);
  Output out;
  for (const GScanPoint& pt : t.points)
    if (!pt.converged) out.code = kConvergenceFailure;
  std::ostringstream os;
  if (o.format == "json") {
    Json params = params_echo(o, "gscan");
    params["g"] = o.g;
    params["sector"] = o.sector;
    params["xmin"] = o.xmin;
    params["xmax"] = o.xmax;
    params["points"] = o.points;
    Json rows = Json::array();
    for (const GScanPoint& pt : t.points) {
      Json j;
      j["x"] = pt.x;
      j["sign"] = pt.sign;
      j["log2_abs_g"] = jnum(pt.log2_abs);
      j["converged"] = pt.converged;
      rows.push_back(std::move(j));
    }
    Json doc = document(params, std::move(rows));
    Json gaps = Json::array();
    for (const GScanGap& gap : t.gaps) gaps.push_back({{"pole", gap.pole}, {"lo", gap.lo}, {"hi", gap.hi}});
    doc["gaps"] = std::move(gaps);
    os << doc.dump(2) << '\n';
  } else {
    os << "x,sign,log2_abs_g,converged\n";
    for (const GScanPoint& pt : t.points)
      os << num(pt.x) << ',' << pt.sign << ',' << num(pt.log2_abs) << ',' << (pt.converged ? 1 : 0)
         << '\n';
  }
  out.text = os.str();
  return out;
}

Output run_validate(const Options& o, const ModelParams& p, std::ostream& err) {
  const SpectrumResult spec = find_spectrum(p, o.emin, o.emax, scan_config(o), o.trunc);
  const int cutoff = o.nf > 0 ? o.nf : default_cutoff(p);
  const ValidationReport rep = validate_roots(p, spec.roots, o.emin, o.emax, cutoff, true);

  Output out;
  for (double e : rep.unmatched_g) {
    err << "G-function level " << num(e) << " has no oracle partner\n";
    out.code = kConvergenceFailure;
  }
  for (double e : rep.unmatched_ed) {
    err << "oracle level " << num(e) << " has no G-function partner\n";
    out.code = kConvergenceFailure;
  }
  if (!(rep.max_abs_err <= 1e-6)) {
    err << "max |dE| = " << num(rep.max_abs_err) << " exceeds 1e-6\n";
    out.code = kConvergenceFailure;
  }
  if (rep.states_skipped > 0)
    err << "warning: " << rep.states_skipped << " eigenstates did not fit below 4096 photons\n";
  if (!spec.unconverged.empty()) out.code = kConvergenceFailure;

  std::ostringstream os;
  if (o.format == "json") {
    Json params = params_echo(o, "validate");
    params["g"] = o.g;
    params["emin"] = o.emin;
    params["emax"] = o.emax;
    params["nf"] = cutoff;
    Json rows = Json::array();
    for (const ValidationRow& r : rep.rows) {
      Json j;
      j["sector"] = std::string(to_string(r.sector));
      j["kind"] = to_string(r.kind);
      j["energy"] = r.energy_g;
      j["energy_ed"] = r.energy_ed;
      j["abs_err"] = r.abs_err;
      j["residual"] = jnum(r.residual >= 0 ? r.residual : NAN);
      j["defect"] = jnum(r.defect >= 0 ? r.defect : NAN);
      j["state_cutoff"] = r.state_cutoff;
      rows.push_back(std::move(j));
    }
    Json doc = document(params, std::move(rows));
    doc["summary"] = {{"max_abs_err", rep.max_abs_err},
                      {"max_residual", rep.max_residual},
                      {"max_defect", rep.max_defect},
                      {"unmatched_g", rep.unmatched_g},
                      {"unmatched_ed", rep.unmatched_ed},
                      {"states_skipped", rep.states_skipped}};
    os << doc.dump(2) << '\n';
  } else {
    os << "sector,kind,energy,energy_ed,abs_err,residual,defect,state_cutoff\n";
    for (const ValidationRow& r : rep.rows)
      os << to_string(r.sector) << ',' << to_string(r.kind) << ',' << num(r.energy_g) << ','
         << num(r.energy_ed) << ',' << num(r.abs_err) << ','
         << num(r.residual >= 0 ? r.residual : NAN) << ',' << num(r.defect >= 0 ? r.defect : NAN)
         << ',' << r.state_cutoff << '\n';
    err << "max |dE| = " << num(rep.max_abs_err) << ", max residual = " << num(rep.max_residual)
        << ", max defect = " << num(rep.max_defect) << '\n';
  }
  out.text = os.str();
  return out;
}

Output run_exceptional(const Options& o, const ModelParams& p) {
  std::vector<Root> roots = find_exceptional(p, o.nmin, o.nmax, scan_config(o));
  std::stable_sort(roots.begin(), roots.end(),
                   [](const Root& a, const Root& b) { return a.energy < b.energy; });
  SpectrumTable t;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    SpectrumRow row;
    row.g = o.g;
    row.sector = roots[i].sector;
    row.level = static_cast<int>(i);
    row.energy = roots[i].energy;
    row.x = roots[i].x;
    row.kind = RowKind::Exceptional;
    row.residual = roots[i].residual;
    t.rows.push_back(row);
  }
  Json params = params_echo(o, "exceptional");
  params["g"] = o.g;
  params["nmin"] = o.nmin;
  params["nmax"] = o.nmax;
  std::ostringstream null_err;
  return emit_spectrum(o, t, params, null_err);
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidParameter:
    case ErrorCode::CouplingOutOfRange:
    case ErrorCode::ZeroCoupling:
    case ErrorCode::WindowEmpty:
      return kInvalidParameters;
    default:
      return kConvergenceFailure;
  }
}

}  // namespace

int run_command(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Spectra of the quantum Rabi models from G-function zeros", "rabi"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CLI::App* solve = app.add_subcommand("solve", "eigenvalues in an energy window");
  CLI::App* sweep = app.add_subcommand("sweep", "eigenvalues along a coupling grid");
  CLI::App* scan = app.add_subcommand("gscan", "sample one G-function branch");
  CLI::App* valid = app.add_subcommand("validate", "compare with exact diagonalization");
  CLI::App* exc = app.add_subcommand("exceptional", "lifted poles (degenerate levels)");
  for (CLI::App* sub : {solve, sweep, scan, valid, exc}) {
    add_model_flags(sub, o);
    sub->add_option("--config", "key = value file; command-line flags take precedence");
  }
  for (CLI::App* sub : {solve, sweep, valid}) add_window_flags(sub, o);
  for (CLI::App* sub : {solve, sweep}) sub->add_flag("--validate", o.validate, "add oracle columns");
  sweep->add_option("--gmin", o.gmin, "first coupling");
  sweep->add_option("--gmax", o.gmax, "last coupling");
  sweep->add_option("--gstep", o.gstep, "coupling step");
  scan->add_option("--sector", o.sector, "branch to sample")->required();
  scan->add_option("--xmin", o.xmin, "lower end of the x window");
  scan->add_option("--xmax", o.xmax, "upper end of the x window");
  scan->add_option("--points", o.points, "uniform sample count");
  exc->add_option("--nmin", o.nmin, "first pole index");
  exc->add_option("--nmax", o.nmax, "last pole index");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out << kVersion << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      throw UsageError{e.what()};
    }

    CLI::App* sub = app.get_subcommands().front();
    const ModelParams p = model_params(o, sub);
    check_params(p);
    check(o.grid_per_unit > 0, "--grid-per-unit must be positive");
    check(o.trunc >= 0, "--trunc must be non-negative");
    check(o.nf >= 0, "--nf must be non-negative");
    check(o.threads >= 0, "--threads must be non-negative");
    if (sub == solve || sub == sweep || sub == valid)
      check(std::isfinite(o.emin) && std::isfinite(o.emax) && o.emin < o.emax,
            "need --emin < --emax");

    std::vector<double> grid;
    if (sub == sweep) {
      check(std::isfinite(o.gmin) && std::isfinite(o.gmax) && o.gstep > 0 && o.gmin <= o.gmax,
            "need --gmin <= --gmax and --gstep > 0");
      grid = coupling_grid(o.gmin, o.gmax, o.gstep);
      for (double g : grid) check_params(with_coupling(p, g));
    }
    Sector sector = Sector::OnePhotonUnbiasedPlus;
    if (sub == scan) {
      check(std::isfinite(o.xmin) && std::isfinite(o.xmax) && o.xmin < o.xmax,
            "need --xmin < --xmax");
      check(o.points >= 2, "--points must be at least 2");
      try {
        sector = sector_from_string(o.sector);
      } catch (const Error& e) {
        throw UsageError{e.what()};
      }
      const auto branches = model_branches(p);
      check(std::any_of(branches.begin(), branches.end(),
                        [&](const GBranch& b) { return b.sector == sector; }),
            "sector '" + o.sector + "' does not belong to this model");
    }
    if (sub == exc) check(0 <= o.nmin && o.nmin <= o.nmax, "need 0 <= --nmin <= --nmax");

    std::ofstream file;
    if (!o.out.empty()) {
      file.open(o.out, std::ios::binary | std::ios::trunc);
      if (!file) throw IoError{"cannot open '" + o.out + "' for writing"};
    }

    Output result;
    try {
      if (sub == solve) result = run_solve(o, p, err);
      else if (sub == sweep) result = run_sweep(o, p, grid, err);
      else if (sub == scan) result = run_gscan(o, p, sector);
      else if (sub == valid) result = run_validate(o, p, err);
      else result = run_exceptional(o, p);
    } catch (const Error& e) {
      err << e.what() << '\n';
      return exit_code_for(e.code());
    }

    std::ostream& dest = o.out.empty() ? out : file;
    dest << result.text;
    dest.flush();
    if (!dest) throw IoError{"write failed"};
    return result.code;
  } catch (const UsageError& e) {
    err << "error: " << e.message << '\n';
    return kInvalidParameters;
  } catch (const IoError& e) {
    err << "error: " << e.message << '\n';
    return kIoError;
  }
}

}  // namespace rabi::cli
