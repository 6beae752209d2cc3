#pragma once

#include "rdlab/majorants.hpp"

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rdlab {

/// A reaction value: a literal, c * h^-k resolved per level, or c * sigma*.
struct SigmaEntry {
    enum class Kind { Literal, HPower, SigmaStar };
    Kind kind = Kind::Literal;
    double coefficient = 0.0;
    int power = 0; // k in h^-k
    std::string label;

    [[nodiscard]] static SigmaEntry parse(const std::string& text);
    /// Throws std::invalid_argument for a sigma* entry without a sigma* value.
    [[nodiscard]] double resolve(double h, std::optional<double> sigma_star = std::nullopt) const;
};

enum class FluxRecovery { Average, L2Project };
enum class SigmaStarSource { CDagger, ScottZhang, Explicit };

struct StudyConfig {
    std::string problem = "sinsin";
    Mat2 A = Mat2::identity();
    std::vector<std::size_t> levels{8, 16, 32, 64};
    std::vector<SigmaEntry> sigmas{SigmaEntry::parse("0")};
    std::vector<std::string> estimators{"consistent"};
    FluxRecovery flux = FluxRecovery::Average;

    bool calibrate = false; // run the calibration before sweeping
    std::vector<std::string> calibration_problems; // empty: the study problem
    std::vector<std::size_t> calibration_levels;   // empty: the study levels
    double safety_factor = 1.25;
    std::optional<double> c_dagger;
    std::optional<double> c_sz;
    std::optional<double> c_tilde;

    SigmaStarSource sigma_star_source = SigmaStarSource::CDagger;
    std::optional<double> sigma_star;
    double eps = 1.0;
    bool optimize_eps = false;
    double c_omega = unit_square_friedrichs;

    int residual_degree = 4;
    int error_degree = 6;
    int load_degree = 4;
    double solver_tol = 1e-12;
    std::size_t threads = 0; // 0: hardware concurrency
    std::filesystem::path out;

    void validate() const;
};

/// key=value lines; '#' starts a comment; lists are comma separated.
[[nodiscard]] StudyConfig parse_config(std::istream& in, const std::filesystem::path& base = {});
[[nodiscard]] StudyConfig load_config(const std::filesystem::path& path);
/// Applies one key=value pair (used for command-line overrides).
void apply_setting(StudyConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base = {});

[[nodiscard]] std::vector<std::string> estimator_names();

struct SweepRow {
    std::size_t level = 0;
    double h = 0.0;
    double sigma = 0.0;
    std::string sigma_label;
    std::string estimator;
    double sigma_star = std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    double prefactor = 1.0;
    double diffusion = 0.0;
    double residual_mult = 0.0;
    double residual_sq = 0.0;
    double oscillation = 0.0;
    std::optional<double> true_energy_sq;
    std::optional<double> effectivity;
    std::optional<double> rate;
    std::string error; // nonempty for a range violation; numeric fields unset

    [[nodiscard]] bool ok() const noexcept { return error.empty(); }
};

struct SweepCell {
    std::size_t level = 0;
    double h = 0.0;
    double sigma = 0.0;
    std::string sigma_label;
    std::optional<ErrorNorms> errors;
    std::size_t flux_operations = 0;
};

struct StudyConstants {
    std::optional<double> c_dagger;
    std::optional<double> c_sz;
    std::optional<double> c_tilde;
};

struct SweepResult {
    StudyConfig config;
    StudyConstants constants;
    std::vector<SweepCell> cells;
    std::vector<SweepRow> rows;
};

[[nodiscard]] SweepResult run_sweep(const StudyConfig& config);

struct CalibrationOutcome {
    std::vector<CalibrationReport> reports; // c_dagger, c_sz, c_breve, c_10
    StudyConstants constants;
};

[[nodiscard]] CalibrationOutcome run_calibration(const StudyConfig& config);
/// Writes the constants as key=value lines that load_config accepts.
void write_constants(const StudyConstants& constants, std::ostream& out);

struct InverseRow {
    std::size_t level = 0;
    double h = 0.0;
    double sigma = 0.0;
    int k = 1; // 1: fem_majorant_1, 2: fem_majorant_2
    double majorant = 0.0;
    double true_energy_sq = 0.0;
    double oscillation_sq = 0.0; // sum h_r^2 / pi^2 ||f - Pi f||^2
    double ratio = 0.0;
    std::string error;
};

struct InverseCheckResult {
    std::vector<InverseRow> rows;
    StudyConstants constants;
    /// max / min ratio over the successful rows for the given k.
    [[nodiscard]] double spread(int k) const;
};

/// Requires flux = l2project and an exact solution.
[[nodiscard]] InverseCheckResult run_inverse_check(const StudyConfig& config);

/// Header: level,h,sigma,estimator,total,diffusion,residual_mult,residual_sq,oscillation,true_energy_sq,effectivity,rate
void emit_csv(const SweepResult& result, std::ostream& out);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);
[[nodiscard]] std::vector<SweepRow> read_csv(std::istream& in);
void emit_summary(const SweepResult& result, std::ostream& out);

void emit_inverse_csv(const InverseCheckResult& result, std::ostream& out);
void emit_inverse_summary(const InverseCheckResult& result, std::ostream& out);

/// Observed log2 rates between consecutive entries whose level doubles.
[[nodiscard]] std::vector<std::optional<double>> observed_rates(const std::vector<std::size_t>& levels,
                                                                const std::vector<double>& values);

} // namespace rdlab
