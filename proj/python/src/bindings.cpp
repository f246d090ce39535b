#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>

#include "rabi/errors.hpp"
#include "rabi/fock_oracle.hpp"
#include "rabi/gfunctions.hpp"
#include "rabi/rootfinder.hpp"
#include "rabi/sweep.hpp"
#include "rabi/version.hpp"

namespace py = pybind11;
using namespace rabi;

namespace {

Parity parity_from(const std::string& s) {
  if (s == "plus" || s == "+") return Parity::Plus;
  if (s == "minus" || s == "-") return Parity::Minus;
  throw Error(ErrorCode::InvalidParameter, "parity must be 'plus' or 'minus'");
}

py::dict report_dict(const ValidationReport& rep) {
  py::list rows;
  for (const ValidationRow& r : rep.rows) {
    py::dict d;
    d["sector"] = std::string(to_string(r.sector));
    d["kind"] = to_string(r.kind);
    d["energy"] = r.energy_g;
    d["energy_ed"] = r.energy_ed;
    d["abs_err"] = r.abs_err;
    d["residual"] = r.residual < 0 ? py::object(py::none()) : py::float_(r.residual);
    d["defect"] = r.defect < 0 ? py::object(py::none()) : py::float_(r.defect);
    d["state_cutoff"] = r.state_cutoff;
    rows.append(d);
  }
  py::dict out;
  out["rows"] = rows;
  out["unmatched_g"] = rep.unmatched_g;
  out["unmatched_ed"] = rep.unmatched_ed;
  out["max_abs_err"] = rep.max_abs_err;
  out["max_residual"] = rep.max_residual;
  out["max_defect"] = rep.max_defect;
  out["states_skipped"] = rep.states_skipped;
  return out;
}

py::object nan_to_none(double v) {
  return std::isnan(v) ? py::object(py::none()) : py::float_(v);
}

}  // namespace

PYBIND11_MODULE(_rabi, m) {
  m.doc() = "G-function spectra of the one- and two-photon Rabi models";
  m.attr("__version__") = kVersion;

  static py::exception<Error> rabi_error(m, "RabiError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = rabi_error;
      py::object inst = err(std::string(e.what()));
      inst.attr("code") = to_string(e.code());
      PyErr_SetObject(rabi_error.ptr(), inst.ptr());
    }
  });

  py::class_<OnePhotonParams>(m, "OnePhotonParams")
      .def(py::init([](double delta, double eps, double g) {
             OnePhotonParams p{delta, eps, g};
             p.validate();
             return p;
           }),
           py::arg("delta") = 1.0, py::arg("eps") = 0.0, py::arg("g") = 0.0)
      .def_readwrite("delta", &OnePhotonParams::delta)
      .def_readwrite("eps", &OnePhotonParams::eps)
      .def_readwrite("g", &OnePhotonParams::g)
      .def("__repr__", [](const OnePhotonParams& p) {
        return "OnePhotonParams(delta=" + py::repr(py::float_(p.delta)).cast<std::string>() +
               ", eps=" + py::repr(py::float_(p.eps)).cast<std::string>() +
               ", g=" + py::repr(py::float_(p.g)).cast<std::string>() + ")";
      });

  py::class_<TwoPhotonParams>(m, "TwoPhotonParams")
      .def(py::init([](double delta, double g) {
             TwoPhotonParams p{delta, g};
             p.validate();
             return p;
           }),
           py::arg("delta") = 1.0, py::arg("g") = 0.0)
      .def_readwrite("delta", &TwoPhotonParams::delta)
      .def_readwrite("g", &TwoPhotonParams::g)
      .def("__repr__", [](const TwoPhotonParams& p) {
        return "TwoPhotonParams(delta=" + py::repr(py::float_(p.delta)).cast<std::string>() +
               ", g=" + py::repr(py::float_(p.g)).cast<std::string>() + ")";
      });

  py::class_<ScanConfig>(m, "ScanConfig")
      .def(py::init<>())
      .def_readwrite("grid_per_unit", &ScanConfig::grid_per_unit)
      .def_readwrite("refine_tol", &ScanConfig::refine_tol)
      .def_readwrite("dedup_tol", &ScanConfig::dedup_tol)
      .def_readwrite("pole_exclusion", &ScanConfig::pole_exclusion)
      .def_readwrite("lift_tol", &ScanConfig::lift_tol);

  py::class_<Root>(m, "Root")
      .def_readonly("x", &Root::x)
      .def_readonly("energy", &Root::energy)
      .def_property_readonly("sector", [](const Root& r) { return std::string(to_string(r.sector)); })
      .def_readonly("residual", &Root::residual)
      .def_property_readonly("kind", [](const Root& r) { return std::string(to_string(r.kind)); })
      .def_property_readonly("bracket", [](const Root& r) { return py::make_tuple(r.lo, r.hi); })
      .def_readonly("pole_index", &Root::pole_index)
      .def("__repr__", [](const Root& r) {
        return "Root(energy=" + py::repr(py::float_(r.energy)).cast<std::string>() + ", sector='" +
               std::string(to_string(r.sector)) + "', kind='" + to_string(r.kind) + "')";
      });

  py::class_<SpectrumResult>(m, "SpectrumResult")
      .def_readonly("roots", &SpectrumResult::roots)
      .def_readonly("unconverged", &SpectrumResult::unconverged)
      .def_property_readonly("suspects", [](const SpectrumResult& s) {
        py::list out;
        for (const Suspect& q : s.suspects)
          out.append(py::make_tuple(q.x, std::string(to_string(q.sector)), q.relative_min));
        return out;
      })
      .def_property_readonly("energies", [](const SpectrumResult& s) {
        std::vector<double> e;
        for (const Root& r : s.roots) e.push_back(r.energy);
        return e;
      });

  m.def("find_spectrum", &find_spectrum, py::arg("params"), py::arg("e_lo"), py::arg("e_hi"),
        py::arg("config") = ScanConfig{}, py::arg("n_max") = 0,
        "All G-function zeros and lifted poles with energy in [e_lo, e_hi], sorted by energy.");
  m.def("find_exceptional", &find_exceptional, py::arg("params"), py::arg("n_lo"),
        py::arg("n_hi"), py::arg("config") = ScanConfig{});
  m.def(
      "find_falpha_zeros",
      [](const OnePhotonParams& p, const std::string& parity, double e_lo, double e_hi,
         const ScanConfig& cfg) { return find_falpha_zeros(p, parity_from(parity), e_lo, e_hi, cfg); },
      py::arg("params"), py::arg("parity"), py::arg("e_lo"), py::arg("e_hi"),
      py::arg("config") = ScanConfig{});
  m.def("locate_exceptional_coupling", &locate_exceptional_coupling, py::arg("delta"),
        py::arg("n"), py::arg("g_lo"), py::arg("g_hi"), py::arg("tol") = 1e-13);

  m.def("sectors", [](const ModelParams& p) {
    std::vector<std::string> out;
    for (const GBranch& b : model_branches(p)) out.emplace_back(to_string(b.sector));
    return out;
  });
  m.def(
      "g_function",
      [](const ModelParams& p, const std::string& sector, double x, int n_max) {
        const Sector s = sector_from_string(sector);
        for (const GBranch& b : model_branches(p, n_max)) {
          if (b.sector != s) continue;
          const GValue v = b.eval(x);
          const double log2_abs = v.value.is_zero() ? -INFINITY : v.value.log2_abs();
          return py::make_tuple(v.value.sign(), log2_abs, v.converged);
        }
        throw Error(ErrorCode::InvalidParameter, "sector does not belong to the model");
      },
      py::arg("params"), py::arg("sector"), py::arg("x"), py::arg("n_max") = 0,
      "G at spectral variable x as (sign, log2|G|, converged).");
  m.def(
      "pole_locations",
      [](const ModelParams& p, const std::string& sector, double x_lo, double x_hi) {
        return pole_locations(p, sector_from_string(sector), x_lo, x_hi).positions();
      },
      py::arg("params"), py::arg("sector"), py::arg("x_lo"), py::arg("x_hi"));
  m.def("map_x_to_energy", &map_x_to_energy, py::arg("params"), py::arg("x"));
  m.def("map_energy_to_x", &map_energy_to_x, py::arg("params"), py::arg("energy"));

  m.def("ed_eigenvalues", &ed_eigenvalues, py::arg("params"), py::arg("n_f"));
  m.def("default_cutoff", &default_cutoff, py::arg("params"));
  m.def(
      "validate_roots",
      [](const ModelParams& p, const std::vector<Root>& roots, double e_lo, double e_hi, int n_f,
         bool with_states) {
        return report_dict(validate_roots(p, roots, e_lo, e_hi, n_f, with_states));
      },
      py::arg("params"), py::arg("roots"), py::arg("e_lo"), py::arg("e_hi"), py::arg("n_f"),
      py::arg("with_states") = false);
  m.def(
      "reconstruct_eigenstate",
      [](const ModelParams& p, const Root& root, int n_f, const std::string& frame) {
        if (frame != "primary" && frame != "secondary")
          throw Error(ErrorCode::InvalidParameter, "frame must be 'primary' or 'secondary'");
        const FockVector v = reconstruct_eigenstate(
            p, root, n_f, frame == "primary" ? StateFrame::Primary : StateFrame::Secondary);
        return py::make_tuple(v.up, v.down);
      },
      py::arg("params"), py::arg("root"), py::arg("n_f"), py::arg("frame") = "primary",
      "Normalized eigenstate as (spin-up amplitudes, spin-down amplitudes).");
  m.def(
      "residual_norm",
      [](const ModelParams& p, double energy, const std::vector<double>& up,
         const std::vector<double>& down) {
        FockVector v;
        v.cutoff = static_cast<int>(up.size()) - 1;
        v.up = up;
        v.down = down;
        return residual_norm(p, energy, v);
      },
      py::arg("params"), py::arg("energy"), py::arg("up"), py::arg("down"));

  m.def(
      "sweep",
      [](const ModelParams& tmpl, const std::vector<double>& g_grid, double e_lo, double e_hi,
         bool validate, int ed_cutoff, int threads) {
        SweepOptions opt;
        opt.e_lo = e_lo;
        opt.e_hi = e_hi;
        opt.validate = validate;
        opt.ed_cutoff = ed_cutoff;
        opt.threads = threads;
        SpectrumTable t;
        {
          py::gil_scoped_release release;
          t = sweep_coupling(tmpl, g_grid, opt);
        }
        py::list rows;
        for (const SpectrumRow& r : t.rows) {
          py::dict d;
          d["g"] = r.g;
          const bool placeholder = r.kind == RowKind::EdOnly || r.kind == RowKind::Failed;
          d["sector"] = placeholder ? py::object(py::none()) : py::str(std::string(to_string(r.sector)));
          d["level"] = r.level;
          d["energy"] = nan_to_none(r.energy);
          d["x"] = nan_to_none(r.x);
          d["kind"] = to_string(r.kind);
          d["residual"] = nan_to_none(r.residual);
          d["energy_ed"] = nan_to_none(r.energy_ed);
          d["abs_err"] = nan_to_none(r.abs_err);
          if (r.kind == RowKind::Failed) d["error"] = r.message;
          rows.append(d);
        }
        return rows;
      },
      py::arg("params"), py::arg("g_grid"), py::arg("e_lo") = -1.0, py::arg("e_hi") = 6.0,
      py::arg("validate") = false, py::arg("ed_cutoff") = 0, py::arg("threads") = 1,
      "Spectrum at each coupling of g_grid as a list of row dicts ordered by (g, energy).");
  m.def("coupling_grid", &coupling_grid, py::arg("g_min"), py::arg("g_max"), py::arg("step"));
  m.def(
      "gscan",
      [](const ModelParams& p, const std::string& sector, double x_lo, double x_hi, int points) {
        const GScanTrace t = gscan(p, sector_from_string(sector), x_lo, x_hi, points);
        py::list pts;
        for (const GScanPoint& q : t.points)
          pts.append(py::make_tuple(q.x, q.sign, q.log2_abs, q.converged));
        py::list gaps;
        for (const GScanGap& q : t.gaps) gaps.append(py::make_tuple(q.pole, q.lo, q.hi));
        return py::make_tuple(pts, gaps);
      },
      py::arg("params"), py::arg("sector"), py::arg("x_lo"), py::arg("x_hi"),
      py::arg("points") = 1001,
      "Sampled G as ([(x, sign, log2|G|, converged)], [(pole, lo, hi)]).");
}
