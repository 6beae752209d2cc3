#pragma once

#include "rdlab/linalg2.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rdlab {

using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<Vec2(const Point&)>;
using HessianFn = std::function<Mat2(const Point&)>;

struct ExactSolution {
    ScalarFn value;
    VectorFn gradient;
    HessianFn hessian;
};

/// -div(A grad u) + sigma u = f in the domain, u = 0 on its boundary.
struct ProblemSpec {
    std::string name;
    Mat2 A = Mat2::identity();
    double sigma = 0.0;
    ScalarFn f;
    std::optional<ExactSolution> exact;

    /// Spectral bounds (mu1, mu2) of A.
    [[nodiscard]] std::array<double, 2> spectral_bounds() const noexcept { return A.symmetric_eigenvalues(); }

    /// Throws std::invalid_argument when A is not SPD, sigma < 0, f is
    /// missing, or (when an exact solution is given) the PDE residual at
    /// sampled points exceeds 1e-8 relative to max(1, |f|).
    void validate() const;

    /// Same problem with a different reaction coefficient; builtin sources
    /// are rebuilt so the manufactured identity keeps holding.
    [[nodiscard]] ProblemSpec with_sigma(double sigma) const;

    // Set by builtin_problem so with_sigma can rebuild f.
    std::function<ProblemSpec(double)> rebuild;
};

/// Manufactured problems on the unit square: "sinsin", "polybubble", "zero",
/// and "linear" (f = 1 + x + 2y, no exact solution).
[[nodiscard]] ProblemSpec builtin_problem(std::string_view name, double sigma, const Mat2& A = Mat2::identity());

[[nodiscard]] std::vector<std::string> builtin_problem_names();

} // namespace rdlab
