#include "rdlab/studylab.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace rdlab;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::vector<std::string> settings;
    bool deterministic = false;
};

StudyConfig make_config(const Common& c)
{
    StudyConfig cfg;
    std::filesystem::path base;
    if (!c.config.empty()) {
        cfg = load_config(c.config);
        base = std::filesystem::path(c.config).parent_path();
    }
    for (const std::string& s : c.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        }
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1), base);
    }
    if (!c.out.empty()) {
        cfg.out = c.out;
    }
    if (c.deterministic) {
        cfg.threads = 1;
    }
    cfg.validate();
    return cfg;
}

// Writes to cfg.out when set, otherwise to stdout.
template <class Fn>
void with_output(const std::filesystem::path& path, Fn&& fn)
{
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    fn(out);
}

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config, "key=value study file")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output file");
    app->add_option("--set", c.settings, "override a config entry, key=value");
    app->add_flag("--seedless-deterministic", c.deterministic, "single worker, byte-identical output");
}

StudyConfig one_cell(StudyConfig cfg, std::size_t level, const std::string& sigma)
{
    if (level) {
        cfg.levels = {level};
    } else {
        cfg.levels.resize(1);
    }
    if (!sigma.empty()) {
        cfg.sigmas = {SigmaEntry::parse(sigma)};
    } else {
        cfg.sigmas.resize(1);
    }
    return cfg;
}

int run_solve(const Common& c, std::size_t level, const std::string& sigma_text)
{
    const StudyConfig cfg = one_cell(make_config(c), level, sigma_text);
    const auto mesh = std::make_shared<const Mesh>(build_structured_unit_square(cfg.levels[0]));
    const double sigma = cfg.sigmas[0].resolve(mesh->h());
    const ProblemSpec p = builtin_problem(cfg.problem, sigma, cfg.A);
    SolveOptions so;
    so.rel_tol = cfg.solver_tol;
    so.load_degree = cfg.load_degree;
    const FemField u = solve_reaction_diffusion(p, mesh, so);
    with_output(cfg.out, [&](std::ostream& out) {
        out << "x,y,u\n" << std::setprecision(17);
        for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
            out << mesh->vertex(i).x << ',' << mesh->vertex(i).y << ',' << u.coefficients()[i] << '\n';
        }
    });
    if (p.exact) {
        const ErrorNorms e = error_norms(u, p, cfg.error_degree);
        std::cerr << "n=" << cfg.levels[0] << " sigma=" << sigma << " |e|_0=" << e.l2 << " |e|_1=" << e.h1_semi
                  << " |||e|||=" << e.energy << '\n';
    }
    return 0;
}

int run_estimate(const Common& c, std::size_t level, const std::string& sigma_text)
{
    const StudyConfig cfg = one_cell(make_config(c), level, sigma_text);
    const SweepResult r = run_sweep(cfg);
    with_output(cfg.out, [&](std::ostream& out) {
        write_report_csv_header(out);
        for (const SweepRow& row : r.rows) {
            if (!row.ok()) {
                std::cerr << row.estimator << ": " << row.error << '\n';
                continue;
            }
            MajorantReport rep;
            rep.estimator = row.estimator;
            rep.sigma = row.sigma;
            rep.sigma_star = row.sigma_star;
            rep.h = row.h;
            rep.total = row.total;
            rep.diffusion = row.diffusion;
            rep.residual_mult = row.residual_mult;
            rep.residual_sq = row.residual_sq;
            rep.oscillation = row.oscillation;
            write_report_csv_row(rep, row.effectivity.value_or(std::nan("")), out);
        }
    });
    return 0;
}

int run_sweep_cmd(const Common& c)
{
    const StudyConfig cfg = make_config(c);
    const SweepResult r = run_sweep(cfg);
    if (cfg.out.empty()) {
        emit_csv(r, std::cout);
    } else {
        emit_csv(r, cfg.out);
        emit_summary(r, std::cout);
    }
    return 0;
}

int run_calibrate(const Common& c, const std::string& table)
{
    const StudyConfig cfg = make_config(c);
    const CalibrationOutcome o = run_calibration(cfg);
    with_output(cfg.out, [&](std::ostream& out) { write_constants(o.constants, out); });
    if (!table.empty()) {
        with_output(table, [&](std::ostream& out) { write_calibration_csv(o.reports, out); });
    }
    if (!cfg.out.empty()) {
        for (const CalibrationReport& rep : o.reports) {
            std::cout << rep.constant << ": sup " << rep.supremum << " x " << rep.safety_factor << " = "
                      << rep.value() << '\n';
        }
        std::cout << "c_tilde = " << *o.constants.c_tilde << '\n';
    }
    return 0;
}

int run_inverse(const Common& c)
{
    StudyConfig cfg = make_config(c);
    const InverseCheckResult r = run_inverse_check(cfg);
    if (cfg.out.empty()) {
        emit_inverse_summary(r, std::cout);
    } else {
        with_output(cfg.out, [&](std::ostream& out) { emit_inverse_csv(r, out); });
        emit_inverse_summary(r, std::cout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"reaction-diffusion a posteriori majorant lab"};
    app.require_subcommand(1);

    Common solve_opts;
    std::size_t solve_level = 0;
    std::string solve_sigma;
    CLI::App* solve = app.add_subcommand("solve", "solve one problem on one mesh, write vertex values");
    add_common(solve, solve_opts);
    solve->add_option("--level", solve_level, "subdivisions n (default: first configured level)");
    solve->add_option("--sigma", solve_sigma, "reaction value (default: first configured entry)");

    Common est_opts;
    std::size_t est_level = 0;
    std::string est_sigma;
    CLI::App* estimate = app.add_subcommand("estimate", "evaluate the configured estimators on one cell");
    add_common(estimate, est_opts);
    estimate->add_option("--level", est_level, "subdivisions n (default: first configured level)");
    estimate->add_option("--sigma", est_sigma, "reaction value (default: first configured entry)");

    Common sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "full (level, sigma) study, CSV output");
    add_common(sweep, sweep_opts);

    Common cal_opts;
    std::string cal_table;
    CLI::App* calibrate = app.add_subcommand("calibrate", "calibrate c_dagger, c_sz and c_tilde");
    add_common(calibrate, cal_opts);
    calibrate->add_option("--table", cal_table, "write the ratio table as CSV");

    Common inv_opts;
    CLI::App* inverse = app.add_subcommand("inverse-check", "majorant / (error + oscillation) ratios");
    add_common(inverse, inv_opts);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) {
            return run_solve(solve_opts, solve_level, solve_sigma);
        }
        if (*estimate) {
            return run_estimate(est_opts, est_level, est_sigma);
        }
        if (*sweep) {
            return run_sweep_cmd(sweep_opts);
        }
        if (*calibrate) {
            return run_calibrate(cal_opts, cal_table);
        }
        if (*inverse) {
            return run_inverse(inv_opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
