#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bogo/experiments.hpp"

namespace py = pybind11;
using namespace bogo;

namespace {

py::dict row_dict(const ConvergenceRow& r) {
  py::dict d;
  d["N"] = r.N;
  d["lambda_N"] = r.lambda_N;
  d["lambda_H"] = r.lambda_H;
  d["abs_err"] = r.abs_err;
  d["condensation_deficit"] = r.condensation_deficit;
  d["overlap"] = r.overlap;
  d["residual_ratio"] = r.residual_ratio;
  d["gap"] = r.gap;
  return d;
}

// Raises `type(msg)` with extra attributes set on the instance.
[[noreturn]] void raise_with(const py::object& type, const char* msg, const py::dict& attrs) {
  py::object exc = type(msg);
  for (auto item : attrs) py::setattr(exc, item.first, item.second);
  PyErr_SetObject(type.ptr(), exc.ptr());
  throw py::error_already_set();
}

}  // namespace

PYBIND11_MODULE(_bogo, mod) {
  mod.doc() = "Bogoliubov theory for finite-mode Bose systems";

  static py::exception<Error> error(mod, "Error", PyExc_RuntimeError);
  static py::exception<ValidationError> validation_error(mod, "ValidationError", error.ptr());
  static py::exception<HessianGapError> gap_error(mod, "HessianGapError", validation_error.ptr());
  static py::exception<ConvergenceError> convergence_error(mod, "ConvergenceError", error.ptr());
  static py::exception<ResourceError> resource_error(mod, "ResourceError", error.ptr());
  static py::exception<ParseError> parse_error(mod, "ParseError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const HessianGapError& e) {
      py::dict a;
      a["eta"] = e.eta();
      raise_with(gap_error, e.what(), a);
    } catch (const ConvergenceError& e) {
      py::dict a;
      a["residuals"] = e.residuals();
      raise_with(convergence_error, e.what(), a);
    } catch (const ParseError& e) {
      py::dict a;
      a["line"] = e.line();
      a["field"] = e.field();
      raise_with(parse_error, e.what(), a);
    } catch (const ResourceError& e) {
      resource_error(e.what());
    } catch (const ValidationError& e) {
      validation_error(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  // Models ------------------------------------------------------------------

  py::class_<ModelSystem>(mod, "ModelSystem")
      .def_readonly("name", &ModelSystem::name)
      .def_readonly("M", &ModelSystem::M)
      .def_readonly("T", &ModelSystem::T)
      .def_readonly("is_real", &ModelSystem::is_real)
      .def("W", [](const ModelSystem& m, int a, int b, int c, int d) { return m.W.get(a, b, c, d); })
      .def("W_entries",
           [](const ModelSystem& m) {
             std::vector<std::pair<std::array<int, 4>, cplx>> out;
             for (const auto& e : m.W.entries()) out.push_back({{e.m, e.n, e.p, e.q}, e.value});
             return out;
           })
      .def("to_json", [](const ModelSystem& m) { return model_to_json(m); })
      .def("__repr__", [](const ModelSystem& m) {
        return "<ModelSystem " + m.name + " M=" + std::to_string(m.M) + ">";
      });

  mod.def("builtin_model", &builtin_model, py::arg("name"));
  mod.def("builtin_names", &builtin_names);
  mod.def("lattice_gas", &lattice_gas, py::arg("L"), py::arg("J"), py::arg("w_hat"));
  mod.def("model_from_json", &model_from_json, py::arg("text"));
  mod.def("load_model", &load_model, py::arg("path"));
  mod.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  mod.def(
      "validate_model",
      [](const ModelSystem& m, double tol) {
        const auto r = validate_model(m, tol);
        py::dict d;
        d["hermiticity_residual_T"] = r.hermiticity_residual_T;
        d["symmetry_residual_W"] = r.symmetry_residual_W;
        d["hermiticity_residual_W"] = r.hermiticity_residual_W;
        d["realness_residual"] = r.realness_residual;
        d["passed"] = r.passed;
        return d;
      },
      py::arg("model"), py::arg("tol") = 1e-10);

  // Hartree -----------------------------------------------------------------

  py::class_<HartreeOptions>(mod, "HartreeOptions")
      .def(py::init<>())
      .def_readwrite("restarts", &HartreeOptions::restarts)
      .def_readwrite("tol", &HartreeOptions::tol)
      .def_readwrite("max_iter", &HartreeOptions::max_iter)
      .def_readwrite("step0", &HartreeOptions::step0)
      .def_readwrite("seed", &HartreeOptions::seed);

  py::class_<HartreeSolution>(mod, "HartreeSolution")
      .def_readonly("u0", &HartreeSolution::u0)
      .def_readonly("e_H", &HartreeSolution::e_H)
      .def_readonly("mu_H", &HartreeSolution::mu_H)
      .def_readonly("R", &HartreeSolution::R)
      .def_readonly("h_full", &HartreeSolution::h_full)
      .def_readonly("h_plus", &HartreeSolution::h_plus)
      .def_readonly("K1", &HartreeSolution::K1)
      .def_readonly("K2", &HartreeSolution::K2)
      .def_readonly("eta_H", &HartreeSolution::eta_H)
      .def_readonly("grad_norm", &HartreeSolution::grad_norm)
      .def_readonly("restart_agreement", &HartreeSolution::restart_agreement)
      .def_readonly("uniqueness_warning", &HartreeSolution::uniqueness_warning)
      .def_readonly("restart_energies", &HartreeSolution::restart_energies)
      .def_readonly("rotated", &HartreeSolution::rotated);

  mod.def("hartree_energy", &hartree_energy, py::arg("model"), py::arg("u"));
  mod.def("hartree_gradient", &hartree_gradient, py::arg("model"), py::arg("u"));
  mod.def("minimize_hartree", &minimize_hartree, py::arg("model"),
          py::arg("options") = HartreeOptions{});
  mod.def("hartree_at", &hartree_at, py::arg("model"), py::arg("u0"));

  // Quadratic forms ---------------------------------------------------------

  py::class_<QuadraticForm>(mod, "QuadraticForm")
      .def_readonly("d", &QuadraticForm::d)
      .def_readonly("H", &QuadraticForm::H)
      .def_readonly("K", &QuadraticForm::K)
      .def_readonly("is_real", &QuadraticForm::is_real)
      .def("block", &QuadraticForm::block)
      .def("eta", &QuadraticForm::eta);

  py::class_<BogoliubovSpectrum>(mod, "BogoliubovSpectrum")
      .def_readonly("xi", &BogoliubovSpectrum::xi)
      .def_readonly("E0", &BogoliubovSpectrum::E0)
      .def_readonly("U", &BogoliubovSpectrum::U)
      .def_readonly("V", &BogoliubovSpectrum::V);

  py::class_<QuasiFreePair>(mod, "QuasiFreePair")
      .def_readonly("gamma", &QuasiFreePair::gamma)
      .def_readonly("alpha", &QuasiFreePair::alpha);

  mod.def("make_quadratic", &make_quadratic, py::arg("H"), py::arg("K"));
  mod.def("diagonalize", [](const QuadraticForm& qf) { return diagonalize(qf); }, py::arg("qf"));
  mod.def("ground_state_dm", &ground_state_dm, py::arg("spectrum"));
  mod.def("evaluate_q", &evaluate_q, py::arg("qf"), py::arg("pair"));
  mod.def("free_energy_bogoliubov", &free_energy_bogoliubov, py::arg("spectrum"), py::arg("beta"));
  mod.def(
      "enumerate_spectrum",
      [](const BogoliubovSpectrum& s, double window) { return enumerate_spectrum(s, window).values; },
      py::arg("spectrum"), py::arg("window"));
  mod.def(
      "xi_min_via_Xt", [](const QuadraticForm& qf, double tol) { return xi_min_via_Xt(qf, tol); },
      py::arg("qf"), py::arg("tol") = 1e-12);

  // Fock space --------------------------------------------------------------

  mod.def(
      "hn_lowest",
      [](const ModelSystem& m, int N, std::size_t k) {
        const auto H = assemble_HN(m, N);
        return eig::lanczos_lowest(H, k).values;
      },
      py::arg("model"), py::arg("N"), py::arg("k") = 3,
      "Lowest k eigenvalues of the N-particle Hamiltonian.");
  mod.def(
      "bogoliubov_fock_lowest",
      [](const QuadraticForm& qf, int cutoff, std::size_t k) {
        const auto H = assemble_bogoliubov_fock(qf, cutoff);
        return eig::lanczos_lowest(H, k).values;
      },
      py::arg("qf"), py::arg("cutoff"), py::arg("k") = 3,
      "Lowest k eigenvalues of the quadratic Hamiltonian on a truncated Fock space.");
  mod.def("set_threads", &eig::set_threads, py::arg("n"));

  // Studies -----------------------------------------------------------------

  py::class_<StudyConfig>(mod, "StudyConfig")
      .def_readonly("model", &StudyConfig::model)
      .def_readonly("model_source", &StudyConfig::model_source)
      .def_readwrite("N_list", &StudyConfig::N_list)
      .def_readwrite("L", &StudyConfig::L)
      .def_readwrite("beta", &StudyConfig::beta)
      .def_readwrite("kappa", &StudyConfig::kappa)
      .def_readwrite("cutoff", &StudyConfig::cutoff)
      .def_readwrite("M_loc_list", &StudyConfig::M_loc_list)
      .def_readwrite("seed", &StudyConfig::seed)
      .def_readwrite("ims_samples", &StudyConfig::ims_samples)
      .def("to_json", [](const StudyConfig& c) { return config_to_json(c); });

  mod.def("load_config", &load_config, py::arg("path"));
  mod.def("config_from_json", &config_from_json, py::arg("text"), py::arg("base_dir") = ".");

  mod.def(
      "run_convergence",
      [](const StudyConfig& cfg) {
        const auto r = run_convergence(cfg);
        py::dict d;
        py::list rows;
        for (const auto& row : r.rows) rows.append(row_dict(row));
        d["rows"] = rows;
        d["e_H"] = r.e_H;
        d["mu_H"] = r.mu_H;
        d["eta_H"] = r.eta_H;
        d["xi_min"] = r.xi_min;
        d["fitted_exponent"] = r.fitted_exponent;
        return d;
      },
      py::arg("config"));
  mod.def(
      "run_residual",
      [](const StudyConfig& cfg) {
        py::list out;
        for (const auto& r : run_residual(cfg)) {
          py::dict d;
          d["N"] = r.N;
          d["M_loc"] = r.M_loc;
          d["r"] = r.r;
          d["ratio"] = r.ratio;
          out.append(d);
        }
        return out;
      },
      py::arg("config"));
  mod.def(
      "run_ims",
      [](const StudyConfig& cfg) {
        py::list out;
        for (const auto& r : run_ims(cfg)) {
          py::dict d;
          d["M_loc"] = r.M_loc;
          d["cutoff"] = r.cutoff;
          d["max_defect"] = r.max_defect;
          d["bound"] = r.bound;
          d["C_f"] = r.C_f;
          d["pass"] = r.pass;
          out.append(d);
        }
        return out;
      },
      py::arg("config"));
  mod.def(
      "run_thermal",
      [](const StudyConfig& cfg) {
        py::list out;
        for (const auto& r : run_thermal(cfg)) {
          py::dict d;
          d["N"] = r.N;
          d["F_N"] = r.F_N;
          d["F_H"] = r.F_H;
          d["gap"] = r.gap;
          d["trace_dist"] = r.trace_dist;
          d["window"] = r.window;
          out.append(d);
        }
        return out;
      },
      py::arg("config"));
  mod.def(
      "validate_assumptions",
      [](const StudyConfig& cfg) {
        const auto r = validate_assumptions(cfg);
        py::dict d;
        d["restart_agreement"] = r.restart_agreement;
        d["uniqueness_warning"] = r.uniqueness_warning;
        d["eta_H"] = r.eta_H;
        d["h_min"] = r.h_min;
        d["K1_hs"] = r.K1_hs;
        d["K2_hs"] = r.K2_hs;
        d["grad_norm"] = r.grad_norm;
        py::list checks;
        for (const auto& c : r.condensation) {
          py::dict e;
          e["N"] = c.N;
          e["lambda_min_per_N"] = c.lambda_min_per_N;
          e["pass"] = c.pass;
          checks.append(e);
        }
        d["condensation"] = checks;
        d["passed"] = r.passed;
        return d;
      },
      py::arg("config"));
}
