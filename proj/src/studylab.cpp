#include "rdlab/studylab.hpp"

#include "rdlab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rdlab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

double to_double(const std::string& s, const std::string& key)
{
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e || !std::isfinite(v)) {
        throw std::invalid_argument("config: '" + key + "' expects a number, got '" + s + "'");
    }
    return v;
}

std::size_t to_size(const std::string& s, const std::string& key)
{
    std::size_t v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) {
        throw std::invalid_argument("config: '" + key + "' expects a non-negative integer, got '" + s + "'");
    }
    return v;
}

std::vector<std::size_t> to_sizes(const std::string& s, const std::string& key)
{
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(s)) {
        out.push_back(to_size(item, key));
    }
    return out;
}

std::string shortest(double x)
{
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

std::string opt_str(const std::optional<double>& x) { return x ? shortest(*x) : std::string{}; }

const std::vector<std::string>& known_estimators()
{
    static const std::vector<std::string> names{"aubin",          "repin_frolov",       "repin_frolov_opt",
                                                "churilova",      "boxed_integral",     "consistent",
                                                "consistent_osc_low", "consistent_osc_high", "fem1",
                                                "fem1_osc",       "fem2",               "aive"};
    return names;
}

} // namespace

SigmaEntry SigmaEntry::parse(const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty()) {
        throw std::invalid_argument("sigma: empty entry");
    }
    SigmaEntry e;
    e.label = t;
    std::string coef = "1";
    std::string rest = t;
    if (const auto star = t.find('*'); star != std::string::npos && star + 1 < t.size()) {
        coef = trim(t.substr(0, star));
        rest = trim(t.substr(star + 1));
    }
    if (rest == "sigma*" || t == "sigma*") {
        e.kind = Kind::SigmaStar;
        e.coefficient = t == "sigma*" ? 1.0 : to_double(coef, "sigma");
    } else if (rest.rfind("h^-", 0) == 0) {
        e.kind = Kind::HPower;
        e.coefficient = to_double(coef, "sigma");
        e.power = static_cast<int>(to_size(rest.substr(3), "sigma"));
        if (e.power < 1) {
            throw std::invalid_argument("sigma: h power must be at least 1 in '" + t + "'");
        }
    } else {
        e.kind = Kind::Literal;
        e.coefficient = to_double(t, "sigma");
    }
    if (e.coefficient < 0.0 || (e.kind != Kind::Literal && e.coefficient == 0.0)) {
        throw std::invalid_argument("sigma: '" + t + "' must be non-negative");
    }
    return e;
}

double SigmaEntry::resolve(double h, std::optional<double> sigma_star) const
{
    switch (kind) {
    case Kind::Literal:
        return coefficient;
    case Kind::HPower:
        return coefficient * std::pow(h, -power);
    case Kind::SigmaStar:
        if (!sigma_star) {
            throw std::invalid_argument("sigma: '" + label + "' needs sigma* (calibrate or set c_dagger / sigma_star)");
        }
        return coefficient * *sigma_star;
    }
    return coefficient;
}

std::vector<std::string> estimator_names() { return known_estimators(); }

void StudyConfig::validate() const
{
    if (levels.empty()) {
        throw std::invalid_argument("config: levels must not be empty");
    }
    for (std::size_t n : levels) {
        if (n == 0) {
            throw std::invalid_argument("config: levels must be positive");
        }
    }
    if (sigmas.empty()) {
        throw std::invalid_argument("config: sigmas must not be empty");
    }
    if (estimators.empty()) {
        throw std::invalid_argument("config: estimators must not be empty");
    }
    const auto& known = known_estimators();
    for (const std::string& e : estimators) {
        if (std::find(known.begin(), known.end(), e) == known.end()) {
            throw std::invalid_argument("config: unknown estimator '" + e + "'");
        }
    }
    const auto names = builtin_problem_names();
    const auto check_problem = [&](const std::string& p) {
        if (std::find(names.begin(), names.end(), p) == names.end()) {
            throw std::invalid_argument("config: unknown problem '" + p + "'");
        }
    };
    check_problem(problem);
    for (const std::string& p : calibration_problems) {
        check_problem(p);
    }
    if (!(eps > 0.0) || !(c_omega > 0.0) || !(safety_factor >= 1.0) || !(solver_tol > 0.0)) {
        throw std::invalid_argument("config: eps, c_omega and solver_tol must be positive, safety_factor >= 1");
    }
    for (int d : {residual_degree, error_degree, load_degree}) {
        if (d < 1 || d > 6) {
            throw std::invalid_argument("config: quadrature degrees must lie in 1..6");
        }
    }
    for (const auto& c : {c_dagger, c_sz, c_tilde, sigma_star}) {
        if (c && !(*c > 0.0)) {
            throw std::invalid_argument("config: constants must be positive");
        }
    }
    if (sigma_star_source == SigmaStarSource::Explicit && !sigma_star) {
        throw std::invalid_argument("config: explicit sigma_star needs a value");
    }
    if (!A.is_symmetric() || A.symmetric_eigenvalues()[0] <= 0.0) {
        throw std::invalid_argument("config: A must be symmetric positive definite");
    }
}

void apply_setting(StudyConfig& c, const std::string& key_in, const std::string& value_in,
                   const std::filesystem::path& base)
{
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    if (key == "problem") {
        c.problem = value;
    } else if (key == "A") {
        const auto parts = split_list(value);
        if (parts.size() == 2) {
            c.A = Mat2::diag(to_double(parts[0], key), to_double(parts[1], key));
        } else if (parts.size() == 4) {
            c.A = Mat2{to_double(parts[0], key), to_double(parts[1], key), to_double(parts[2], key),
                       to_double(parts[3], key)};
        } else {
            throw std::invalid_argument("config: A expects 2 (diagonal) or 4 entries");
        }
    } else if (key == "levels") {
        c.levels = to_sizes(value, key);
    } else if (key == "sigmas" || key == "sigma") {
        c.sigmas.clear();
        for (const std::string& s : split_list(value)) {
            c.sigmas.push_back(SigmaEntry::parse(s));
        }
    } else if (key == "estimators" || key == "estimator") {
        c.estimators = split_list(value);
    } else if (key == "flux") {
        if (value == "average") {
            c.flux = FluxRecovery::Average;
        } else if (value == "l2project") {
            c.flux = FluxRecovery::L2Project;
        } else {
            throw std::invalid_argument("config: flux must be average or l2project");
        }
    } else if (key == "constants") {
        if (value == "calibrate") {
            c.calibrate = true;
        } else if (value == "explicit") {
            c.calibrate = false;
        } else {
            throw std::invalid_argument("config: constants must be calibrate or explicit");
        }
    } else if (key == "constants_file") {
        const std::filesystem::path p = base.empty() ? std::filesystem::path(value) : base / value;
        std::ifstream in(p);
        if (!in) {
            throw std::runtime_error("config: cannot open constants file " + p.string());
        }
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line.substr(0, line.find('#')));
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            const std::string k = trim(line.substr(0, eq));
            if (eq == std::string::npos || (k != "c_dagger" && k != "c_sz" && k != "c_tilde")) {
                throw std::invalid_argument("config: constants file accepts c_dagger, c_sz, c_tilde only");
            }
            apply_setting(c, k, line.substr(eq + 1), base);
        }
        c.calibrate = false;
    } else if (key == "calibration_problems") {
        c.calibration_problems = split_list(value);
    } else if (key == "calibration_levels") {
        c.calibration_levels = to_sizes(value, key);
    } else if (key == "safety_factor") {
        c.safety_factor = to_double(value, key);
    } else if (key == "c_dagger") {
        c.c_dagger = to_double(value, key);
    } else if (key == "c_sz") {
        c.c_sz = to_double(value, key);
    } else if (key == "c_tilde") {
        c.c_tilde = to_double(value, key);
    } else if (key == "sigma_star") {
        if (value == "cdagger") {
            c.sigma_star_source = SigmaStarSource::CDagger;
        } else if (value == "sz") {
            c.sigma_star_source = SigmaStarSource::ScottZhang;
        } else {
            c.sigma_star_source = SigmaStarSource::Explicit;
            c.sigma_star = to_double(value, key);
        }
    } else if (key == "eps") {
        if (value == "opt") {
            c.optimize_eps = true;
        } else {
            c.optimize_eps = false;
            c.eps = to_double(value, key);
        }
    } else if (key == "c_omega") {
        c.c_omega = to_double(value, key);
    } else if (key == "residual_degree") {
        c.residual_degree = static_cast<int>(to_size(value, key));
    } else if (key == "error_degree") {
        c.error_degree = static_cast<int>(to_size(value, key));
    } else if (key == "load_degree") {
        c.load_degree = static_cast<int>(to_size(value, key));
    } else if (key == "solver_tol") {
        c.solver_tol = to_double(value, key);
    } else if (key == "threads") {
        c.threads = to_size(value, key);
    } else if (key == "out") {
        c.out = value;
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

StudyConfig parse_config(std::istream& in, const std::filesystem::path& base)
{
    StudyConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        }
        apply_setting(c, line.substr(0, eq), line.substr(eq + 1), base);
    }
    c.validate();
    return c;
}

StudyConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    return parse_config(in, path.parent_path());
}

std::vector<std::optional<double>> observed_rates(const std::vector<std::size_t>& levels,
                                                  const std::vector<double>& values)
{
    if (levels.size() != values.size()) {
        throw std::invalid_argument("observed_rates: size mismatch");
    }
    std::vector<std::optional<double>> out(values.size());
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (levels[k] == 2 * levels[k - 1] && values[k] > 0.0 && values[k - 1] > 0.0) {
            out[k] = std::log2(values[k - 1] / values[k]);
        }
    }
    return out;
}

namespace {

std::vector<MeshPtr> build_meshes(const std::vector<std::size_t>& levels)
{
    std::vector<MeshPtr> meshes;
    for (std::size_t n : levels) {
        meshes.push_back(std::make_shared<const Mesh>(build_structured_unit_square(n)));
    }
    return meshes;
}

// Runs jobs 0..count-1 on at most `threads` workers; the first exception wins.
template <class Job>
void run_pool(std::size_t count, std::size_t threads, Job&& job)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            job(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::optional<double> sigma_star_for(const StudyConfig& c, const StudyConstants& k, double h)
{
    switch (c.sigma_star_source) {
    case SigmaStarSource::Explicit:
        return c.sigma_star;
    case SigmaStarSource::CDagger:
        return k.c_dagger ? std::optional(critical_sigma(*k.c_dagger, h)) : std::nullopt;
    case SigmaStarSource::ScottZhang:
        return k.c_sz ? std::optional(critical_sigma(*k.c_sz, h)) : std::nullopt;
    }
    return std::nullopt;
}

StudyConstants constants_for(const StudyConfig& c)
{
    if (c.calibrate) {
        return run_calibration(c).constants;
    }
    return {c.c_dagger, c.c_sz, c.c_tilde};
}

double need(const std::optional<double>& v, const char* name)
{
    if (!v) {
        throw std::invalid_argument(std::string("needs ") + name + ": calibrate or set it explicitly");
    }
    return *v;
}

MajorantReport evaluate_estimator(const std::string& name, const StudyConfig& c, const StudyConstants& k,
                                  std::optional<double> sigma_star, const ProblemSpec& p, const FemField& u,
                                  const FluxField& z)
{
    const EstimatorOptions opt{c.residual_degree};
    if (name == "aubin") {
        return aubin(p, u, z, opt);
    }
    if (name == "repin_frolov") {
        return c.optimize_eps ? repin_frolov_optimal(p, u, z, c.c_omega, opt)
                              : repin_frolov(p, u, z, c.eps, c.c_omega, opt);
    }
    if (name == "repin_frolov_opt") {
        return repin_frolov_optimal(p, u, z, c.c_omega, opt);
    }
    if (name == "churilova") {
        if (c.optimize_eps) {
            const double eps =
                minimize_over_eps([&](double e) { return churilova(p, u, z, e, c.c_omega, opt).total; });
            return churilova(p, u, z, eps, c.c_omega, opt);
        }
        return churilova(p, u, z, c.eps, c.c_omega, opt);
    }
    if (name == "boxed_integral") {
        return boxed_integral(p, u, z, {}, opt);
    }
    if (name == "consistent") {
        return consistent_majorant(p, u, z, need(sigma_star, "sigma*"), opt);
    }
    if (name == "consistent_osc_low") {
        return consistent_osc_low(p, u, z, need(sigma_star, "sigma*"), c.eps, opt);
    }
    if (name == "consistent_osc_high") {
        return consistent_osc_high(p, u, z, need(sigma_star, "sigma*"), opt);
    }
    if (name == "fem1") {
        return fem_majorant_1(p, u, z, need(k.c_dagger, "c_dagger"), opt);
    }
    if (name == "fem1_osc") {
        return fem_majorant_1_osc(p, u, z, need(k.c_dagger, "c_dagger"), c.eps, opt);
    }
    if (name == "fem2") {
        return fem_majorant_2(p, u, z, need(k.c_sz, "c_sz"), need(k.c_tilde, "c_tilde"), opt);
    }
    if (name == "aive") {
        return aive_indicator(p, u, z, opt).report;
    }
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

struct CellJob {
    std::size_t level_index = 0;
    const SigmaEntry* entry = nullptr;
};

FluxField recover(const StudyConfig& c, const FemField& u, std::size_t* ops)
{
    const FluxField broken = numerical_flux(u, c.A);
    if (c.flux == FluxRecovery::L2Project) {
        return l2_project_flux(broken);
    }
    return average_flux(broken, ops);
}

} // namespace

SweepResult run_sweep(const StudyConfig& config)
{
    config.validate();
    SweepResult result;
    result.config = config;
    result.constants = constants_for(config);
    const std::vector<MeshPtr> meshes = build_meshes(config.levels);

    std::vector<CellJob> jobs;
    for (std::size_t l = 0; l < meshes.size(); ++l) {
        for (const SigmaEntry& s : config.sigmas) {
            jobs.push_back({l, &s});
        }
    }
    const std::size_t ne = config.estimators.size();
    result.cells.resize(jobs.size());
    result.rows.resize(jobs.size() * ne);

    run_pool(jobs.size(), config.threads, [&](std::size_t j) {
        const MeshPtr& mesh = meshes[jobs[j].level_index];
        const double h = mesh->h();
        const std::optional<double> sigma_star = sigma_star_for(config, result.constants, h);
        SweepCell& cell = result.cells[j];
        cell.level = config.levels[jobs[j].level_index];
        cell.h = h;
        cell.sigma_label = jobs[j].entry->label;

        const auto fill = [&](SweepRow& row, std::size_t e) {
            row.level = cell.level;
            row.h = h;
            row.sigma = cell.sigma;
            row.sigma_label = cell.sigma_label;
            row.estimator = config.estimators[e];
        };
        double sigma = 0.0;
        try {
            sigma = jobs[j].entry->resolve(h, sigma_star);
        } catch (const std::invalid_argument& err) {
            for (std::size_t e = 0; e < ne; ++e) {
                SweepRow& row = result.rows[j * ne + e];
                fill(row, e);
                row.error = err.what();
            }
            return;
        }
        cell.sigma = sigma;

        const ProblemSpec problem = builtin_problem(config.problem, sigma, config.A);
        SolveOptions so;
        so.rel_tol = config.solver_tol;
        so.load_degree = config.load_degree;
        const FemField u = solve_reaction_diffusion(problem, mesh, so);
        const FluxField z = recover(config, u, &cell.flux_operations);
        if (problem.exact) {
            cell.errors = error_norms(u, problem, config.error_degree);
        }

        for (std::size_t e = 0; e < ne; ++e) {
            SweepRow& row = result.rows[j * ne + e];
            fill(row, e);
            try {
                const MajorantReport rep =
                    evaluate_estimator(config.estimators[e], config, result.constants, sigma_star, problem, u, z);
                row.sigma_star = rep.sigma_star;
                row.total = rep.total;
                row.prefactor = rep.prefactor;
                row.diffusion = rep.diffusion;
                row.residual_mult = rep.residual_mult;
                row.residual_sq = rep.residual_sq;
                row.oscillation = rep.oscillation;
                if (cell.errors) {
                    const double e2 = cell.errors->energy * cell.errors->energy;
                    row.true_energy_sq = e2;
                    if (e2 > 0.0) {
                        row.effectivity = std::sqrt(rep.total) / cell.errors->energy;
                    }
                }
            } catch (const RangeError& err) {
                row.error = err.what();
            } catch (const std::invalid_argument& err) {
                row.error = err.what();
            }
        }
    });

    // rates along levels for each (sigma entry, estimator)
    for (std::size_t s = 0; s < config.sigmas.size(); ++s) {
        for (std::size_t e = 0; e < ne; ++e) {
            std::vector<std::size_t> idx;
            for (std::size_t l = 0; l < meshes.size(); ++l) {
                idx.push_back((l * config.sigmas.size() + s) * ne + e);
            }
            std::vector<std::size_t> lv;
            std::vector<double> val;
            std::vector<std::size_t> which;
            for (std::size_t i : idx) {
                const SweepRow& r = result.rows[i];
                if (!r.ok()) {
                    lv.push_back(0);
                    val.push_back(0.0);
                } else {
                    lv.push_back(r.level);
                    val.push_back(r.effectivity ? *r.effectivity : std::sqrt(r.total));
                }
                which.push_back(i);
            }
            const auto rates = observed_rates(lv, val);
            for (std::size_t k = 0; k < which.size(); ++k) {
                if (result.rows[which[k]].ok()) {
                    result.rows[which[k]].rate = rates[k];
                }
            }
        }
    }
    return result;
}

CalibrationOutcome run_calibration(const StudyConfig& config)
{
    config.validate();
    const std::vector<std::size_t>& levels =
        config.calibration_levels.empty() ? config.levels : config.calibration_levels;
    const std::vector<MeshPtr> meshes = build_meshes(levels);

    std::vector<ProblemSpec> problems;
    const std::vector<std::string> names =
        config.calibration_problems.empty() ? std::vector<std::string>{config.problem} : config.calibration_problems;
    for (const std::string& n : names) {
        problems.push_back(builtin_problem(n, 0.0, config.A));
    }
    std::vector<std::function<double(double)>> sigma_of_h;
    for (const SigmaEntry& s : config.sigmas) {
        if (s.kind != SigmaEntry::Kind::SigmaStar) {
            sigma_of_h.emplace_back([s](double h) { return s.resolve(h); });
        }
    }
    if (sigma_of_h.empty()) {
        sigma_of_h.emplace_back([](double) { return 0.0; });
    }

    CalibrationOutcome out;
    CalibrationReport cd = calibrate_cdagger(problems, sigma_of_h, meshes, config.safety_factor);
    SzConstants sz = calibrate_csz(meshes, default_samples(), config.safety_factor);
    out.constants.c_dagger = cd.value();
    out.constants.c_sz = sz.c_sz.value();
    out.constants.c_tilde = sz.c_tilde;
    out.reports = {std::move(cd), std::move(sz.c_sz), std::move(sz.c_breve), std::move(sz.c_10)};
    return out;
}

void write_constants(const StudyConstants& k, std::ostream& out)
{
    if (k.c_dagger) {
        out << "c_dagger=" << shortest(*k.c_dagger) << '\n';
    }
    if (k.c_sz) {
        out << "c_sz=" << shortest(*k.c_sz) << '\n';
    }
    if (k.c_tilde) {
        out << "c_tilde=" << shortest(*k.c_tilde) << '\n';
    }
}

double InverseCheckResult::spread(int k) const
{
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const InverseRow& r : rows) {
        if (r.k != k || !r.error.empty()) {
            continue;
        }
        lo = any ? std::min(lo, r.ratio) : r.ratio;
        hi = any ? std::max(hi, r.ratio) : r.ratio;
        any = true;
    }
    if (!any || !(lo > 0.0)) {
        throw std::logic_error("inverse check: no ratios for k = " + std::to_string(k));
    }
    return hi / lo;
}

InverseCheckResult run_inverse_check(const StudyConfig& config)
{
    config.validate();
    if (config.flux != FluxRecovery::L2Project) {
        throw std::invalid_argument("inverse-check: requires flux=l2project");
    }
    InverseCheckResult result;
    result.constants = constants_for(config);
    const std::vector<MeshPtr> meshes = build_meshes(config.levels);
    std::vector<CellJob> jobs;
    for (std::size_t l = 0; l < meshes.size(); ++l) {
        for (const SigmaEntry& s : config.sigmas) {
            jobs.push_back({l, &s});
        }
    }
    result.rows.resize(2 * jobs.size());
    run_pool(jobs.size(), config.threads, [&](std::size_t j) {
        const MeshPtr& mesh = meshes[jobs[j].level_index];
        const double h = mesh->h();
        InverseRow base;
        base.level = config.levels[jobs[j].level_index];
        base.h = h;
        try {
            base.sigma = jobs[j].entry->resolve(h, sigma_star_for(config, result.constants, h));
        } catch (const std::invalid_argument& err) {
            base.error = err.what();
            result.rows[2 * j] = base;
            result.rows[2 * j + 1] = base;
            result.rows[2 * j + 1].k = 2;
            return;
        }
        const ProblemSpec problem = builtin_problem(config.problem, base.sigma, config.A);
        if (!problem.exact) {
            throw std::invalid_argument("inverse-check: problem '" + problem.name + "' has no exact solution");
        }
        SolveOptions so;
        so.rel_tol = config.solver_tol;
        so.load_degree = config.load_degree;
        const FemField u = solve_reaction_diffusion(problem, mesh, so);
        const FluxField z = recover(config, u, nullptr);
        const double energy = error_norms(u, problem, config.error_degree).energy;
        base.true_energy_sq = energy * energy;
        const ElementwiseP1 fhat = elementwise_p1_projection(mesh, problem.f, config.residual_degree);
        const std::vector<double> osc = oscillation_sq(fhat, problem.f, config.residual_degree);
        const auto& hr = mesh->element_diameters();
        for (std::size_t r = 0; r < osc.size(); ++r) {
            base.oscillation_sq += hr[r] * hr[r] / (std::numbers::pi * std::numbers::pi) * osc[r];
        }
        const EstimatorOptions opt{config.residual_degree};
        for (int k = 1; k <= 2; ++k) {
            InverseRow row = base;
            row.k = k;
            try {
                const MajorantReport rep =
                    k == 1 ? fem_majorant_1(problem, u, z, need(result.constants.c_dagger, "c_dagger"), opt)
                           : fem_majorant_2(problem, u, z, need(result.constants.c_sz, "c_sz"),
                                            need(result.constants.c_tilde, "c_tilde"), opt);
                row.majorant = rep.total;
                row.ratio = rep.total / (row.true_energy_sq + row.oscillation_sq);
            } catch (const RangeError& err) {
                row.error = err.what();
            } catch (const std::invalid_argument& err) {
                row.error = err.what();
            }
            result.rows[2 * j + static_cast<std::size_t>(k - 1)] = row;
        }
    });
    return result;
}

void emit_csv(const SweepResult& result, std::ostream& out)
{
    if (result.rows.empty()) {
        throw std::invalid_argument("emit_csv: empty result");
    }
    out << "level,h,sigma,estimator,total,diffusion,residual_mult,residual_sq,oscillation,true_energy_sq,"
           "effectivity,rate\n";
    for (const SweepRow& r : result.rows) {
        out << r.level << ',' << shortest(r.h) << ',' << shortest(r.sigma) << ',' << r.estimator << ',';
        if (r.ok()) {
            out << shortest(r.total) << ',' << shortest(r.diffusion) << ',' << shortest(r.residual_mult) << ','
                << shortest(r.residual_sq) << ',' << shortest(r.oscillation) << ',';
        } else {
            out << ",,,,,";
        }
        out << opt_str(r.true_energy_sq) << ',' << opt_str(r.effectivity) << ',' << opt_str(r.rate) << '\n';
    }
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("emit_csv: cannot write " + path.string());
    }
    emit_csv(result, out);
    if (!out) {
        throw std::runtime_error("emit_csv: write failed for " + path.string());
    }
}

std::vector<SweepRow> read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) ||
        line != "level,h,sigma,estimator,total,diffusion,residual_mult,residual_sq,oscillation,true_energy_sq,"
                "effectivity,rate") {
        throw std::invalid_argument("read_csv: unexpected header");
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream s(line);
        std::string item;
        while (std::getline(s, item, ',')) {
            f.push_back(item);
        }
        while (f.size() < 12) {
            f.emplace_back();
        }
        if (f.size() != 12) {
            throw std::invalid_argument("read_csv: expected 12 fields");
        }
        const auto opt = [](const std::string& x) -> std::optional<double> {
            if (x.empty()) {
                return std::nullopt;
            }
            return to_double(x, "csv");
        };
        SweepRow r;
        r.level = to_size(f[0], "level");
        r.h = to_double(f[1], "h");
        r.sigma = to_double(f[2], "sigma");
        r.sigma_label = f[2];
        r.estimator = f[3];
        if (f[4].empty()) {
            r.error = "out of range";
        } else {
            r.total = to_double(f[4], "total");
            r.diffusion = to_double(f[5], "diffusion");
            r.residual_mult = to_double(f[6], "residual_mult");
            r.residual_sq = to_double(f[7], "residual_sq");
            r.oscillation = to_double(f[8], "oscillation");
        }
        r.true_energy_sq = opt(f[9]);
        r.effectivity = opt(f[10]);
        r.rate = opt(f[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

std::string cellfmt(double x, int width, int prec = 4)
{
    std::ostringstream s;
    s << std::setw(width) << std::scientific << std::setprecision(prec) << x;
    return s.str();
}

std::string ratefmt(const std::optional<double>& x, int width)
{
    std::ostringstream s;
    if (x) {
        s << std::setw(width) << std::fixed << std::setprecision(2) << *x;
    } else {
        s << std::setw(width) << "-";
    }
    return s.str();
}

} // namespace

void emit_summary(const SweepResult& result, std::ostream& out)
{
    if (result.rows.empty()) {
        throw std::invalid_argument("emit_summary: empty result");
    }
    const StudyConfig& c = result.config;
    out << "problem " << c.problem << ", flux " << (c.flux == FluxRecovery::Average ? "average" : "l2project")
        << '\n';
    out << "constants:";
    if (!result.constants.c_dagger && !result.constants.c_sz && !result.constants.c_tilde) {
        out << " none";
    }
    if (result.constants.c_dagger) {
        out << " c_dagger=" << *result.constants.c_dagger;
    }
    if (result.constants.c_sz) {
        out << " c_sz=" << *result.constants.c_sz;
    }
    if (result.constants.c_tilde) {
        out << " c_tilde=" << *result.constants.c_tilde;
    }
    out << '\n';

    const std::size_t ns = c.sigmas.size();
    const std::size_t ne = c.estimators.size();
    for (std::size_t s = 0; s < ns; ++s) {
        out << "\nsigma = " << c.sigmas[s].label << '\n';
        std::vector<std::size_t> lv;
        std::vector<double> l2;
        std::vector<double> h1;
        std::vector<double> en;
        bool have_errors = true;
        for (std::size_t l = 0; l < c.levels.size(); ++l) {
            const SweepCell& cell = result.cells[l * ns + s];
            lv.push_back(cell.level);
            if (!cell.errors) {
                have_errors = false;
                break;
            }
            l2.push_back(cell.errors->l2);
            h1.push_back(cell.errors->h1_semi);
            en.push_back(cell.errors->energy);
        }
        if (have_errors) {
            const auto r0 = observed_rates(lv, l2);
            const auto r1 = observed_rates(lv, h1);
            const auto re = observed_rates(lv, en);
            out << std::setw(6) << "level" << std::setw(12) << "sigma" << std::setw(12) << "|e|_0" << std::setw(7)
                << "rate" << std::setw(12) << "|e|_1" << std::setw(7) << "rate" << std::setw(12) << "|||e|||"
                << std::setw(7) << "rate" << '\n';
            for (std::size_t l = 0; l < lv.size(); ++l) {
                out << std::setw(6) << lv[l] << cellfmt(result.cells[l * ns + s].sigma, 12, 3) << cellfmt(l2[l], 12)
                    << ratefmt(r0[l], 7) << cellfmt(h1[l], 12) << ratefmt(r1[l], 7) << cellfmt(en[l], 12)
                    << ratefmt(re[l], 7) << '\n';
            }
            out << "a priori: |e|_0 2, |e|_1 1, |||e||| 1\n";
        }

        out << std::setw(6) << "level";
        for (std::size_t e = 0; e < ne; ++e) {
            out << std::setw(20) << c.estimators[e] << std::setw(7) << "rate";
        }
        out << '\n';
        for (std::size_t l = 0; l < c.levels.size(); ++l) {
            out << std::setw(6) << c.levels[l];
            for (std::size_t e = 0; e < ne; ++e) {
                const SweepRow& r = result.rows[(l * ns + s) * ne + e];
                if (!r.ok()) {
                    out << std::setw(20) << "range" << std::setw(7) << "-";
                } else if (r.effectivity) {
                    out << std::setw(20) << std::fixed << std::setprecision(4) << *r.effectivity << ratefmt(r.rate, 7);
                } else {
                    out << cellfmt(r.total, 20) << ratefmt(r.rate, 7);
                }
            }
            out << '\n';
        }
        out << (have_errors ? "(effectivity, rate = log2 eff_h / eff_h/2)\n" : "(total, rate = log2 ratio)\n");
    }

    bool header = false;
    for (const SweepRow& r : result.rows) {
        if (r.ok()) {
            continue;
        }
        if (!header) {
            out << "\nskipped cells:\n";
            header = true;
        }
        out << "  level " << r.level << " sigma " << r.sigma_label << " " << r.estimator << ": " << r.error << '\n';
    }
}

void emit_inverse_csv(const InverseCheckResult& result, std::ostream& out)
{
    out << "level,h,sigma,k,majorant,true_energy_sq,oscillation_sq,ratio\n";
    for (const InverseRow& r : result.rows) {
        out << r.level << ',' << shortest(r.h) << ',' << shortest(r.sigma) << ',' << r.k << ',';
        if (r.error.empty()) {
            out << shortest(r.majorant) << ',' << shortest(r.true_energy_sq) << ',' << shortest(r.oscillation_sq)
                << ',' << shortest(r.ratio);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
}

void emit_inverse_summary(const InverseCheckResult& result, std::ostream& out)
{
    out << std::setw(6) << "level" << std::setw(12) << "sigma" << std::setw(4) << "k" << std::setw(14) << "majorant"
        << std::setw(14) << "|||e|||^2" << std::setw(14) << "osc^2" << std::setw(10) << "ratio" << '\n';
    for (const InverseRow& r : result.rows) {
        out << std::setw(6) << r.level << cellfmt(r.sigma, 12, 3) << std::setw(4) << r.k;
        if (r.error.empty()) {
            out << cellfmt(r.majorant, 14) << cellfmt(r.true_energy_sq, 14) << cellfmt(r.oscillation_sq, 14)
                << std::setw(10) << std::fixed << std::setprecision(4) << r.ratio << '\n';
        } else {
            out << "  " << r.error << '\n';
        }
    }
    for (int k = 1; k <= 2; ++k) {
        try {
            out << "k=" << k << " max/min ratio " << std::fixed << std::setprecision(4) << result.spread(k) << '\n';
        } catch (const std::logic_error&) {
            out << "k=" << k << " no ratios\n";
        }
    }
}

} // namespace rdlab
