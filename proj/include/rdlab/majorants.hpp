#pragma once

#include "rdlab/femcore.hpp"
#include "rdlab/fluxrec.hpp"
#include "rdlab/szproj.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace rdlab {

/// Friedrichs constant of the unit square, 1 / lambda_1 = 1 / (2 pi^2).
inline constexpr double unit_square_friedrichs = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);

/// Every estimator has the shape total = Theta * (diffusion + theta * residual_sq) + oscillation.
struct Factors {
    double Theta = 1.0;
    double theta = 0.0;
};

[[nodiscard]] double combine(const Factors& f, double diffusion, double residual_sq, double oscillation = 0.0);

struct MajorantReport {
    std::string estimator;
    double sigma = 0.0;
    double sigma_star = std::numeric_limits<double>::quiet_NaN(); // NaN when the estimator has none
    double h = 0.0;
    double total = 0.0; // bound for |||e|||^2
    double prefactor = 1.0;
    double diffusion = 0.0;
    double residual_mult = 0.0;
    double residual_sq = 0.0;
    double oscillation = 0.0;
    std::map<std::string, double> constants;
    // per element: diffusion, squared residual, weighted oscillation; each sums
    // to its global component (residual may be empty when it is not local)
    std::vector<double> element_diffusion;
    std::vector<double> element_residual_sq;
    std::vector<double> element_oscillation;

    [[nodiscard]] double recombined() const { return prefactor * (diffusion + residual_mult * residual_sq) + oscillation; }
};

/// int (A grad v + z) . A^-1 (A grad v + z); z must be conforming.
[[nodiscard]] double diffusion_term(const FemField& v, const FluxField& z, const Mat2& A);

/// ||g - sigma v - div z||_0 with g = f, or g = elementwise P1 projection of f.
[[nodiscard]] double residual_norm(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                   bool use_fhat = false, int degree = 4);

// Multipliers. Each throws RangeError outside its proven reaction range and
// std::invalid_argument on non-positive parameters.
[[nodiscard]] Factors aubin_factors(double sigma);
[[nodiscard]] Factors repin_frolov_factors(double eps, double c_omega);
[[nodiscard]] Factors churilova_factors(double sigma, double eps, double c_omega);
/// Theta = 2 / (1 + kappa), theta = 1 / sigma* for sigma <= sigma*; Theta = 1, theta = 1 / sigma above.
[[nodiscard]] Factors theta_factors(double sigma, double sigma_star);
/// Theta_1 * [theta_factors], for 0 <= sigma <= sigma*.
[[nodiscard]] Factors consistent_low_factors(double sigma, double sigma_star, double eps);
/// Theta_2 * [theta_factors], for sigma >= sigma*.
[[nodiscard]] Factors consistent_high_factors(double sigma, double sigma_star);
[[nodiscard]] Factors fem1_factors(double sigma, double c_dagger, double h);
[[nodiscard]] Factors fem1_osc_factors(double sigma, double c_dagger, double h, double eps);
[[nodiscard]] Factors fem2_factors(double sigma, double c_sz, double c_tilde, double h);

struct EstimatorOptions {
    int residual_degree = 4;
};

[[nodiscard]] MajorantReport aubin(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                   const EstimatorOptions& opt = {});
/// Requires sigma = 0 and A = I.
[[nodiscard]] MajorantReport repin_frolov(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                          double eps = 1.0, double c_omega = unit_square_friedrichs,
                                          const EstimatorOptions& opt = {});
/// Repin-Frolov at the minimizing eps = sqrt(c_omega) R / sqrt(D).
[[nodiscard]] MajorantReport repin_frolov_optimal(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                                  double c_omega = unit_square_friedrichs,
                                                  const EstimatorOptions& opt = {});
[[nodiscard]] MajorantReport churilova(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                       double eps = 1.0, double c_omega = unit_square_friedrichs,
                                       const EstimatorOptions& opt = {});

using WeightFn = std::function<double(const Point&)>;

/// ||grad v + z|| + sum_k || int_0^{x_k} beta_k (f - div z) ||, unit square,
/// A = I, sigma = 0. The report carries the value squared as its total.
[[nodiscard]] MajorantReport boxed_integral(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                            const WeightFn& beta1 = {}, const EstimatorOptions& opt = {});

[[nodiscard]] MajorantReport consistent_majorant(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                                 double sigma_star, const EstimatorOptions& opt = {});
[[nodiscard]] MajorantReport consistent_osc_low(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                                double sigma_star, double eps = 1.0,
                                                const EstimatorOptions& opt = {});
[[nodiscard]] MajorantReport consistent_osc_high(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                                 double sigma_star, const EstimatorOptions& opt = {});
[[nodiscard]] MajorantReport fem_majorant_1(const ProblemSpec& problem, const FemField& u, const FluxField& z,
                                            double c_dagger, const EstimatorOptions& opt = {});
[[nodiscard]] MajorantReport fem_majorant_1_osc(const ProblemSpec& problem, const FemField& u, const FluxField& z,
                                                double c_dagger, double eps = 1.0, const EstimatorOptions& opt = {});
[[nodiscard]] MajorantReport fem_majorant_2(const ProblemSpec& problem, const FemField& u, const FluxField& z,
                                            double c_sz, double c_tilde, const EstimatorOptions& opt = {});

struct AiveResult {
    double eta_sq = 0.0;                 // sum of eta_r^2
    std::vector<double> element_eta_sq;
    std::vector<bool> flux_only;         // element satisfies sqrt(sigma) h_r < 1
    double osc_sq = 0.0;                 // sum of osc_r^2
    std::vector<double> element_osc;     // osc_r
    double bound = 0.0;                  // sum of (eta_r + osc_r)^2
    MajorantReport report;
};

[[nodiscard]] AiveResult aive_indicator(const ProblemSpec& problem, const FemField& u, const FluxField& z,
                                        const EstimatorOptions& opt = {});

/// sqrt(total) / |||e|||
[[nodiscard]] double effectivity(const MajorantReport& report, double true_energy);

/// Golden-section minimum of fn over log(eps) in [log lo, log hi].
[[nodiscard]] double minimize_over_eps(const std::function<double(double)>& fn, double lo = 1e-8, double hi = 1e8,
                                       double tol = 1e-10);

/// Header: estimator,sigma,sigma_star,h,total,diffusion,residual_mult,residual_sq,oscillation,effectivity
void write_report_csv_header(std::ostream& out);
void write_report_csv_row(const MajorantReport& report, double effectivity_value, std::ostream& out);

} // namespace rdlab
