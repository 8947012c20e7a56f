// Python bindings. Structured reports cross the boundary as JSON text and are
// decoded by the package wrapper.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hsns/bl_norms.hpp"
#include "hsns/checkpoint.hpp"
#include "hsns/closed_form.hpp"
#include "hsns/error.hpp"
#include "hsns/experiment.hpp"
#include "hsns/green_stokes.hpp"
#include "hsns/ns_solver.hpp"
#include "hsns/special.hpp"
#include "hsns/stokes_semigroup.hpp"

namespace py = pybind11;
using namespace hsns;

namespace {

// (2K+1, n) complex array, rows alpha = -K..K.
py::array_t<cd> modes_array(const SpectralField& w) {
  const int K = w.truncation();
  const auto n = static_cast<py::ssize_t>(w.n_nodes());
  py::array_t<cd> out({static_cast<py::ssize_t>(2 * K + 1), n});
  auto m = out.mutable_unchecked<2>();
  for (int a = -K; a <= K; ++a) {
    for (py::ssize_t j = 0; j < n; ++j) m(a + K, j) = w.mode(a)[static_cast<std::size_t>(j)];
  }
  return out;
}

SpectralField field_from_array(std::shared_ptr<const GradedGrid> grid, py::array_t<cd> a, bool reality) {
  if (a.ndim() != 2 || a.shape(0) % 2 != 1 || a.shape(1) != static_cast<py::ssize_t>(grid->size())) {
    throw DomainError("expected an array of shape (2K+1, n_nodes)");
  }
  const int K = static_cast<int>(a.shape(0) / 2);
  SpectralField w(std::move(grid), K, reality);
  auto m = a.unchecked<2>();
  for (int a2 = -K; a2 <= K; ++a2) {
    for (py::ssize_t j = 0; j < m.shape(1); ++j) w.mode(a2)[static_cast<std::size_t>(j)] = m(a2 + K, j);
  }
  return w;
}

py::dict trajectory_dict(const Trajectory& tr, double nu) {
  py::dict d;
  d["times"] = tr.times;
  d["energy"] = tr.energy;
  d["no_slip_residual"] = tr.no_slip_residual;
  d["u1_wall"] = tr.u1_wall;
  d["u2_wall"] = tr.u2_wall;
  d["divergence_residual"] = tr.divergence_residual;
  d["iterations"] = tr.iterations;
  d["complete"] = tr.complete;
  d["failure"] = tr.failure;
  py::list v;
  for (const auto& w : tr.vorticity) v.append(modes_array(w));
  d["vorticity"] = v;
  if (!tr.vorticity.empty()) {
    d["kato_integrand"] = kato_integrand(tr, nu);
    d["kato"] = kato_functional(tr, nu);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Half-space Navier-Stokes laboratory";

  // translators are tried newest first, so the base class goes first

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

  m.def("erfcx", &erfcx, py::arg("x"));
  m.def("green_function", &green_function, py::arg("nu"), py::arg("alpha"), py::arg("t"), py::arg("y"), py::arg("z"));
  m.def("residual_kernel", &residual_kernel, py::arg("nu"), py::arg("alpha"), py::arg("t"), py::arg("y"), py::arg("z"));
  m.def("residual_kernel_quadrature", &residual_kernel_quadrature, py::arg("nu"), py::arg("alpha"), py::arg("t"),
        py::arg("y"), py::arg("z"));
  m.def(
      "contour_residual",
      [](double nu, int alpha, double t, double y, double z) {
        return green_contour_oracle(nu, alpha, t, y, z).residual;
      },
      py::arg("nu"), py::arg("alpha"), py::arg("t"), py::arg("y"), py::arg("z"));
  m.def(
      "cross_validate_green_json",
      [](std::size_t n, std::uint64_t seed) { return to_json(cross_validate_green(n, seed)).dump(); },
      py::arg("n_samples") = 100, py::arg("seed") = 1);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("nu", &SolverConfig::nu)
      .def_readwrite("K", &SolverConfig::K)
      .def_readwrite("z_max", &SolverConfig::z_max)
      .def_readwrite("n_nodes", &SolverConfig::n_nodes)
      .def_readwrite("delta_ref", &SolverConfig::delta_ref)
      .def_readwrite("nx", &SolverConfig::nx)
      .def_readwrite("T", &SolverConfig::T)
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("picard_tol", &SolverConfig::picard_tol)
      .def_readwrite("picard_max", &SolverConfig::picard_max)
      .def_readwrite("max_halvings", &SolverConfig::max_halvings)
      .def_readwrite("dealias_fraction", &SolverConfig::dealias_fraction)
      .def_readwrite("n_time_quad", &SolverConfig::n_time_quad)
      .def_readwrite("linear", &SolverConfig::linear)
      .def("validate", &SolverConfig::validate)
      .def("grid_nodes", [](const SolverConfig& c) { return c.make_grid()->nodes; });

  m.def("datum_names", &datum_names);
  m.def(
      "sample_datum",
      [](const std::string& descriptor, const SolverConfig& c) {
        return modes_array(resolve_datum(descriptor, c.make_grid(), c.K));
      },
      py::arg("descriptor"), py::arg("config"));
  m.def(
      "apply_semigroup",
      [](py::array_t<cd> w, const SolverConfig& c, double t) {
        return modes_array(apply_semigroup(field_from_array(c.make_grid(), w, true), c.nu, t));
      },
      py::arg("modes"), py::arg("config"), py::arg("t"));
  m.def(
      "run_navier_stokes",
      [](const SolverConfig& c, const std::string& datum) {
        const auto w0 = resolve_datum(datum, c.make_grid(), c.K);
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = run_navier_stokes(c, w0);
        }
        return trajectory_dict(tr, c.nu);
      },
      py::arg("config"), py::arg("datum") = "wall_mode");
  m.def(
      "run_euler",
      [](SolverConfig c, const std::string& datum) {
        c.nu = 0.0;
        const auto w0 = resolve_datum(datum, c.make_grid(), c.K);
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = run_euler(c, w0);
        }
        return trajectory_dict(tr, 0.0);
      },
      py::arg("config"), py::arg("datum") = "wall_mode");
  m.def(
      "lemma_report_json",
      [](double rho, double sigma) {
        LemmaSuiteParams p;
        p.rho = rho;
        p.sigma = sigma;
        return to_json(verify_norm_lemmas(closed_form_corpus(), p)).dump();
      },
      py::arg("rho") = 0.5, py::arg("sigma") = 0.5);

  m.def(
      "save_checkpoint",
      [](const std::filesystem::path& path, py::array_t<cd> w, const SolverConfig& c, double t) {
        save_checkpoint(path, field_from_array(c.make_grid(), w, true), c.nu, t);
      },
      py::arg("path"), py::arg("modes"), py::arg("config"), py::arg("t") = 0.0);
  m.def(
      "load_checkpoint",
      [](const std::filesystem::path& path) {
        const auto c = load_checkpoint(path);
        py::dict d;
        d["K"] = c.K;
        d["n_nodes"] = c.n_nodes;
        d["z_max"] = c.z_max;
        d["delta_ref"] = c.delta_ref;
        d["nu"] = c.nu;
        d["t"] = c.t;
        d["modes"] = modes_array(c.field);
        return d;
      },
      py::arg("path"));

  m.def(
      "run_experiment_json",
      [](const std::string& config_text, const std::vector<std::string>& overrides) {
        auto cfg = parse_config(config_text);
        for (const auto& o : overrides) apply_override(cfg, o);
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        return r.summary.dump();
      },
      py::arg("config_text"), py::arg("overrides") = std::vector<std::string>{});
  m.def("config_keys", &config_keys);
}
