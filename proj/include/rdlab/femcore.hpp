#pragma once

#include "rdlab/mesh.hpp"
#include "rdlab/problem.hpp"
#include "rdlab/quadrature.hpp"
#include "rdlab/sparse.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace rdlab {

/// Continuous piecewise-linear function, one coefficient per mesh vertex.
class FemField {
public:
    FemField(MeshPtr mesh, std::vector<double> coefficients, bool zero_trace = false);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] bool zero_trace() const noexcept { return zero_trace_; }

    [[nodiscard]] double value(std::size_t r, const Bary& lambda) const;
    [[nodiscard]] Vec2 gradient(std::size_t r) const;

private:
    MeshPtr mesh_;
    std::vector<double> coefficients_;
    bool zero_trace_;
};

/// Nodal interpolant of v.
[[nodiscard]] FemField interpolate(const MeshPtr& mesh, const ScalarFn& v, bool zero_trace = false);

using LocalMatrix = std::array<std::array<double, 3>, 3>;

[[nodiscard]] LocalMatrix local_stiffness(const ElementGeometry& g, const Mat2& A);
[[nodiscard]] LocalMatrix local_mass(double area);

/// sum_r int grad phi_i . A grad phi_j (no boundary conditions applied).
[[nodiscard]] SparseMatrix assemble_stiffness(const Mesh& mesh, const Mat2& A);
/// sum_r int phi_i phi_j.
[[nodiscard]] SparseMatrix assemble_mass(const Mesh& mesh);
/// sum_r int f phi_i by quadrature.
[[nodiscard]] std::vector<double> assemble_load(const Mesh& mesh, const ScalarFn& f, const QuadRule& rule);

struct ReducedSystem {
    SparseMatrix matrix;
    std::vector<double> rhs;
    std::vector<std::size_t> dofs; // reduced index -> mesh vertex

    /// Full coefficient vector with zeros on the boundary.
    [[nodiscard]] std::vector<double> extend(std::span<const double> reduced, std::size_t num_vertices) const;
};

/// Drops boundary rows and columns (homogeneous Dirichlet data). Throws
/// std::invalid_argument when the mesh has no interior vertex.
[[nodiscard]] ReducedSystem apply_homogeneous_dirichlet(const SparseMatrix& system, std::span<const double> rhs,
                                                        const Mesh& mesh);

struct SolveOptions {
    double rel_tol = 1e-10;
    std::size_t max_iter = 0; // 0: 10 x dimension
    int load_degree = 4;
};

[[nodiscard]] FemField solve_reaction_diffusion(const ProblemSpec& problem, const MeshPtr& mesh,
                                                const SolveOptions& options = {});

/// Relative l2 norm of the interior Galerkin residual K u + sigma M u - F.
[[nodiscard]] double galerkin_residual(const ProblemSpec& problem, const FemField& u, int load_degree = 4);

[[nodiscard]] std::vector<Vec2> broken_gradient(const FemField& field);

using ElementScalarFn = std::function<double(std::size_t r, const Point& x, const Bary& lambda)>;
using ElementVectorFn = std::function<Vec2(std::size_t r, const Point& x, const Bary& lambda)>;

[[nodiscard]] double norm_L2(const Mesh& mesh, const ElementScalarFn& e, const QuadRule& rule);
[[nodiscard]] double seminorm_H1(const Mesh& mesh, const ElementVectorFn& grad_e, const QuadRule& rule);
/// (int grad e . A grad e + sigma int e^2)^(1/2).
[[nodiscard]] double energy_norm(const Mesh& mesh, const ElementVectorFn& grad_e, const ElementScalarFn& e,
                                 const ProblemSpec& problem, const QuadRule& rule);

struct ErrorNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double a_norm = 0.0;
    double energy = 0.0;
};

/// Norms of u_h - u for a problem with a known exact solution.
[[nodiscard]] ErrorNorms error_norms(const FemField& uh, const ProblemSpec& problem, int degree = 6);

struct AprioriLevel {
    std::size_t num_elements = 0;
    double h = 0.0;
    double sigma = 0.0;
    ErrorNorms errors;
    // observed orders against the previous level; nullopt on the first
    std::optional<double> rate_l2;
    std::optional<double> rate_h1;
    std::optional<double> rate_a;
    std::optional<double> rate_energy;
};

/// Solves on each mesh and reports errors with observed orders
/// log(e_prev / e) / log(h_prev / h). sigma_of_h, when given, overrides the
/// problem's reaction coefficient per level.
[[nodiscard]] std::vector<AprioriLevel> a_priori_report(const ProblemSpec& problem, const std::vector<MeshPtr>& meshes,
                                                        const std::function<double(double)>& sigma_of_h = {});

} // namespace rdlab
