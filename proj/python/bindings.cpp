#include "rdlab/errors.hpp"
#include "rdlab/studylab.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rdlab;

namespace {

struct Cell {
    MeshPtr mesh;
    ProblemSpec problem;
    FemField u;
    FluxField z;
};

Cell make_cell(const std::string& problem, std::size_t n, double sigma, const std::string& flux)
{
    auto mesh = std::make_shared<const Mesh>(build_structured_unit_square(n));
    ProblemSpec p = builtin_problem(problem, sigma);
    SolveOptions so;
    so.rel_tol = 1e-12;
    FemField u = solve_reaction_diffusion(p, mesh, so);
    const FluxField broken = numerical_flux(u, p.A);
    FluxField z = flux == "l2project" ? l2_project_flux(broken) : average_flux(broken);
    return {mesh, std::move(p), std::move(u), std::move(z)};
}

py::dict report_dict(const MajorantReport& r)
{
    py::dict d;
    d["estimator"] = r.estimator;
    d["sigma"] = r.sigma;
    d["sigma_star"] = r.sigma_star;
    d["h"] = r.h;
    d["total"] = r.total;
    d["prefactor"] = r.prefactor;
    d["diffusion"] = r.diffusion;
    d["residual_mult"] = r.residual_mult;
    d["residual_sq"] = r.residual_sq;
    d["oscillation"] = r.oscillation;
    d["constants"] = r.constants;
    return d;
}

py::dict row_dict(const SweepRow& r)
{
    py::dict d;
    d["level"] = r.level;
    d["h"] = r.h;
    d["sigma"] = r.sigma;
    d["sigma_label"] = r.sigma_label;
    d["estimator"] = r.estimator;
    d["error"] = r.error;
    if (r.ok()) {
        d["total"] = r.total;
        d["prefactor"] = r.prefactor;
        d["diffusion"] = r.diffusion;
        d["residual_mult"] = r.residual_mult;
        d["residual_sq"] = r.residual_sq;
        d["oscillation"] = r.oscillation;
    }
    d["true_energy_sq"] = r.true_energy_sq;
    d["effectivity"] = r.effectivity;
    d["rate"] = r.rate;
    return d;
}

StudyConfig config_from(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace

PYBIND11_MODULE(_rdlab, m)
{
    m.doc() = "P1 reaction-diffusion solver with guaranteed a posteriori error majorants";

    py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);

    m.attr("unit_square_friedrichs") = unit_square_friedrichs;
    m.def("builtin_problems", &builtin_problem_names);
    m.def("estimators", &estimator_names);
    m.def("critical_sigma", &critical_sigma, py::arg("c"), py::arg("h"));

    m.def(
        "solve",
        [](const std::string& problem, std::size_t n, double sigma) {
            const Cell c = make_cell(problem, n, sigma, "average");
            py::dict d;
            d["h"] = c.mesh->h();
            d["vertices"] = c.mesh->vertices().size();
            d["coefficients"] = c.u.coefficients();
            if (c.problem.exact) {
                const ErrorNorms e = error_norms(c.u, c.problem);
                d["l2"] = e.l2;
                d["h1_semi"] = e.h1_semi;
                d["energy"] = e.energy;
            }
            return d;
        },
        py::arg("problem"), py::arg("n"), py::arg("sigma") = 0.0);

    m.def(
        "estimate",
        [](const std::string& problem, std::size_t n, double sigma, const std::string& estimator,
           const std::map<std::string, double>& params, const std::string& flux) {
            const Cell c = make_cell(problem, n, sigma, flux);
            const auto get = [&](const char* key, double fallback) {
                const auto it = params.find(key);
                return it == params.end() ? fallback : it->second;
            };
            const auto need = [&](const char* key) {
                const auto it = params.find(key);
                if (it == params.end()) {
                    throw std::invalid_argument(std::string(estimator) + " needs parameter '" + key + "'");
                }
                return it->second;
            };
            const double eps = get("eps", 1.0);
            const double c_omega = get("c_omega", unit_square_friedrichs);
            MajorantReport r;
            if (estimator == "aubin") {
                r = aubin(c.problem, c.u, c.z);
            } else if (estimator == "repin_frolov") {
                r = repin_frolov(c.problem, c.u, c.z, eps, c_omega);
            } else if (estimator == "repin_frolov_opt") {
                r = repin_frolov_optimal(c.problem, c.u, c.z, c_omega);
            } else if (estimator == "churilova") {
                r = churilova(c.problem, c.u, c.z, eps, c_omega);
            } else if (estimator == "boxed_integral") {
                r = boxed_integral(c.problem, c.u, c.z);
            } else if (estimator == "consistent") {
                r = consistent_majorant(c.problem, c.u, c.z, need("sigma_star"));
            } else if (estimator == "consistent_osc_low") {
                r = consistent_osc_low(c.problem, c.u, c.z, need("sigma_star"), eps);
            } else if (estimator == "consistent_osc_high") {
                r = consistent_osc_high(c.problem, c.u, c.z, need("sigma_star"));
            } else if (estimator == "fem1") {
                r = fem_majorant_1(c.problem, c.u, c.z, need("c_dagger"));
            } else if (estimator == "fem1_osc") {
                r = fem_majorant_1_osc(c.problem, c.u, c.z, need("c_dagger"), eps);
            } else if (estimator == "fem2") {
                r = fem_majorant_2(c.problem, c.u, c.z, need("c_sz"), need("c_tilde"));
            } else if (estimator == "aive") {
                r = aive_indicator(c.problem, c.u, c.z).report;
            } else {
                throw std::invalid_argument("unknown estimator '" + estimator + "'");
            }
            py::dict d = report_dict(r);
            if (c.problem.exact) {
                const double e = error_norms(c.u, c.problem).energy;
                d["true_energy_sq"] = e * e;
                d["effectivity"] = e > 0.0 ? py::cast(effectivity(r, e)) : py::none();
            }
            return d;
        },
        py::arg("problem"), py::arg("n"), py::arg("sigma"), py::arg("estimator"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("flux") = "average");

    m.def(
        "sweep",
        [](const std::string& config) {
            const SweepResult r = run_sweep(config_from(config));
            py::list rows;
            for (const SweepRow& row : r.rows) {
                rows.append(row_dict(row));
            }
            std::ostringstream csv;
            emit_csv(r, csv);
            py::dict d;
            d["rows"] = rows;
            d["csv"] = csv.str();
            return d;
        },
        py::arg("config"), "Run a study from key=value config text.");

    m.def(
        "calibrate",
        [](const std::string& config) {
            const CalibrationOutcome o = run_calibration(config_from(config));
            py::dict d;
            d["c_dagger"] = o.constants.c_dagger;
            d["c_sz"] = o.constants.c_sz;
            d["c_tilde"] = o.constants.c_tilde;
            for (const CalibrationReport& rep : o.reports) {
                d[py::str("sup_" + rep.constant)] = rep.supremum;
            }
            return d;
        },
        py::arg("config"));

    m.def(
        "inverse_check",
        [](const std::string& config) {
            const InverseCheckResult r = run_inverse_check(config_from(config));
            py::list rows;
            for (const InverseRow& row : r.rows) {
                py::dict d;
                d["level"] = row.level;
                d["sigma"] = row.sigma;
                d["k"] = row.k;
                d["majorant"] = row.majorant;
                d["true_energy_sq"] = row.true_energy_sq;
                d["oscillation_sq"] = row.oscillation_sq;
                d["ratio"] = row.ratio;
                d["error"] = row.error;
                rows.append(d);
            }
            return rows;
        },
        py::arg("config"));
}
