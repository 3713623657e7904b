#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include <nlac/geometry.hpp>
#include <nlac/operator.hpp>
#include <nlac/profile.hpp>
#include <nlac/runner.hpp>

namespace py = pybind11;
using namespace nlac;

PYBIND11_MODULE(_nlac, m) {
    m.doc() = "verification toolkit for the anisotropic fractional Allen-Cahn equation";
    m.attr("__version__") = kVersion;

    py::class_<SpectralMeasure>(m, "SpectralMeasure")
        .def_property_readonly("dim", [](const SpectralMeasure& mu) { return mu.dim; })
        .def_property_readonly("size", [](const SpectralMeasure& mu) { return mu.grid.size(); })
        .def_readonly("lambda_min", &SpectralMeasure::lambda)
        .def_readonly("lambda_max", &SpectralMeasure::Lambda)
        .def("at", &SpectralMeasure::at)
        .def("validate", &SpectralMeasure::validate);

    m.def("constant_measure", &constant_measure, py::arg("dim"), py::arg("count"),
          py::arg("value") = 1.0);
    m.def(
        "spectral_measure_from_ellipse",
        [](int dim, std::size_t count, double ax, double ay, double s) {
            return spectral_measure_from_body(ellipse_body(dim, count, ax, ay), s);
        },
        py::arg("dim"), py::arg("count"), py::arg("ax"), py::arg("ay"), py::arg("s"));
    m.def(
        "support_hl",
        [](const SpectralMeasure& mu, double s, const Vec& omega) {
            return support_function_hL(mu, s, omega);
        },
        py::arg("mu"), py::arg("s"), py::arg("omega"));

    py::class_<LayerProfile>(m, "LayerProfile")
        .def_readonly("s", &LayerProfile::s)
        .def_readonly("x_min", &LayerProfile::x_min)
        .def_readonly("spacing", &LayerProfile::spacing)
        .def_readonly("phi", &LayerProfile::phi)
        .def_readonly("gamma_fit", &LayerProfile::gamma_fit)
        .def_readonly("fit_r2", &LayerProfile::fit_r2)
        .def_readonly("l_kappa", &LayerProfile::l_kappa)
        .def_readonly("residual", &LayerProfile::residual)
        .def_readonly("tail_truncation", &LayerProfile::tail_truncation)
        .def_readonly("iterations", &LayerProfile::iterations)
        .def("x_max", &LayerProfile::x_max)
        .def("__call__", [](const LayerProfile& p, double z) { return p.interpolant()(z); });

    m.def(
        "solve_layer",
        [](double s, double X_max, std::size_t N, double tol) {
            return solve_layer(cubic_double_well(), s, X_max, N, tol);
        },
        py::arg("s"), py::arg("X_max"), py::arg("N"), py::arg("tol") = 2e-5);

    m.def(
        "fraclap_1d",
        [](const LayerProfile& p, double z, double r0, double r_max) {
            QuadratureSpec q;
            q.r0 = r0 > 0.0 ? r0 : p.spacing;
            q.r_max = r_max;
            q.far_reach = 50.0;
            return eval_1d_fraclap(p.interpolant(), p.s, z, q);
        },
        py::arg("profile"), py::arg("z"), py::arg("r0") = 0.0, py::arg("r_max") = 500.0);

    m.def(
        "run_experiment",
        [](const std::string& kind, const std::string& config_path) {
            std::ostringstream log;
            int rc = run_experiment(kind, config_path, log);
            return py::make_tuple(rc, log.str());
        },
        py::arg("kind"), py::arg("config_path"),
        "runs one experiment; returns (exit_status, log_text)");

    m.def(
        "verify",
        [](std::uint64_t seed) {
            std::ostringstream out;
            int rc = verify_suite(seed, out);
            return py::make_tuple(rc, out.str());
        },
        py::arg("seed") = 0, "runs the cheap-oracle verify suite; returns (exit_status, report)");
}
