#pragma once

#include "rdlab/femcore.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rdlab {

/// Per vertex i the edge tau_i = (i, far[i]) carrying its dual functional.
struct FaceAssignment {
    std::vector<std::size_t> far;

    [[nodiscard]] Edge edge(std::size_t i) const { return {i, far.at(i)}; }
};

/// theta = a * lambda_1 + b * lambda_2 on an edge, lambda_1 belonging to the
/// assigned vertex.
struct DualEdgeFunction {
    double a = 0.0;
    double b = 0.0;
};

[[nodiscard]] DualEdgeFunction dual_edge_function(double length);

/// Boundary vertices get a boundary edge, interior vertices any incident
/// edge; ties go to the smallest far endpoint index.
[[nodiscard]] FaceAssignment assign_faces(const Mesh& mesh);

/// Trace of v on the segment from a to b at parameter t in [0, 1].
using EdgeTraceFn = std::function<double(const Point& a, const Point& b, double t)>;

[[nodiscard]] FemField scott_zhang(const MeshPtr& mesh, const FaceAssignment& faces, const EdgeTraceFn& trace,
                                   int edge_degree = 5);
[[nodiscard]] FemField scott_zhang(const MeshPtr& mesh, const FaceAssignment& faces, const ScalarFn& v,
                                   int edge_degree = 5);
[[nodiscard]] FemField scott_zhang(const FemField& v, const FaceAssignment& faces);

enum class Subspace { Full, ZeroTrace };

/// Global L2 projection onto continuous P1 (optionally with zero trace).
[[nodiscard]] FemField l2_project_scalar(const MeshPtr& mesh, const ScalarFn& v, Subspace space = Subspace::Full,
                                         int degree = 6, double rel_tol = 1e-13);

/// Largest |(Qv - v, phi_i)| over the basis functions of the subspace.
[[nodiscard]] double l2_projection_residual(const FemField& qv, const ScalarFn& v, Subspace space, int degree = 6);

/// Elementwise L2 projection onto P1: per element the nodal values of the
/// local best linear approximation.
struct ElementwiseP1 {
    MeshPtr mesh;
    std::vector<std::array<double, 3>> coefficients;

    [[nodiscard]] double value(std::size_t r, const Bary& lambda) const
    {
        const auto& c = coefficients[r];
        return lambda[0] * c[0] + lambda[1] * c[1] + lambda[2] * c[2];
    }
};

[[nodiscard]] ElementwiseP1 elementwise_p1_projection(const MeshPtr& mesh, const ScalarFn& f, int degree = 4);

/// ||f - Pi^1_r f||^2 on every element.
[[nodiscard]] std::vector<double> oscillation_sq(const ElementwiseP1& fhat, const ScalarFn& f, int degree = 4);

struct CalibrationRow {
    std::string constant;
    std::size_t level = 0; // subdivision count n of the structured mesh
    double h = 0.0;
    double ratio = 0.0;
    double supremum = 0.0; // running supremum including this row
    std::string sample;
};

struct CalibrationReport {
    std::string constant;
    std::vector<CalibrationRow> rows;
    double supremum = 0.0;
    double safety_factor = 1.0;
    std::vector<std::string> samples;
    std::vector<double> sigmas;

    [[nodiscard]] double value() const noexcept { return safety_factor * supremum; }
};

/// Smooth sample with zero trace and a closed-form H1 seminorm.
struct SampleFunction {
    std::string name;
    ScalarFn value;
    VectorFn gradient;
    double h1_semi_sq = 0.0;
};

/// sin(k pi x) sin(l pi y) for k, l in {1, 2, 3} and two polynomial bumps.
[[nodiscard]] std::vector<SampleFunction> default_samples();

struct SzConstants {
    CalibrationReport c_sz;    // sup ||v - I_h v||_0 / (h |v|_1)
    CalibrationReport c_breve; // sup |I_h v|_1 / |v|_1
    CalibrationReport c_10;    // sup over P1 fields of h |w|_1 / ||w||_0
    double c_tilde = 0.0;      // c_breve + 2 c_10 c_sz from the safety-scaled parts
};

/// Rayleigh estimate of sqrt(lambda_max(M^-1 K)) on the full P1 space.
[[nodiscard]] double inverse_inequality_constant(const Mesh& mesh, std::size_t iterations = 300);

/// Needs levels of increasing refinement (at least two).
[[nodiscard]] SzConstants calibrate_csz(const std::vector<MeshPtr>& meshes,
                                        const std::vector<SampleFunction>& samples = default_samples(),
                                        double safety_factor = 1.25);

/// sup over problems, reaction values and meshes of ||e||_0 / (h ||e||_A),
/// times the safety factor. sigma_of_h entries resolve a reaction value per
/// mesh size.
[[nodiscard]] CalibrationReport calibrate_cdagger(const std::vector<ProblemSpec>& problems,
                                                  const std::vector<std::function<double(double)>>& sigma_of_h,
                                                  const std::vector<MeshPtr>& meshes, double safety_factor = 1.25);

/// 1 / (c h)^2
[[nodiscard]] double critical_sigma(double c, double h);

void write_calibration_csv(const std::vector<CalibrationReport>& reports, std::ostream& out);

} // namespace rdlab
