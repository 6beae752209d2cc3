#pragma once

#include "rdlab/femcore.hpp"

#include <cstddef>
#include <vector>

namespace rdlab {

enum class FluxKind { Broken, Conforming };

/// Vector field on a mesh: one constant per element (broken) or one value per
/// vertex interpolated linearly (conforming, continuous, hence in H(div)).
class FluxField {
public:
    [[nodiscard]] static FluxField broken(MeshPtr mesh, std::vector<Vec2> per_element);
    [[nodiscard]] static FluxField conforming(MeshPtr mesh, std::vector<Vec2> per_vertex);

    [[nodiscard]] FluxKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_conforming() const noexcept { return kind_ == FluxKind::Conforming; }
    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] const std::vector<Vec2>& values() const noexcept { return values_; }

    [[nodiscard]] Vec2 value(std::size_t r, const Bary& lambda) const;
    /// Elementwise constant divergence; throws std::logic_error on a broken field.
    [[nodiscard]] double divergence(std::size_t r) const;

private:
    FluxField(FluxKind kind, MeshPtr mesh, std::vector<Vec2> values);

    FluxKind kind_;
    MeshPtr mesh_;
    std::vector<Vec2> values_;
};

/// Nodal interpolant of a vector function (conforming).
[[nodiscard]] FluxField interpolate_flux(const MeshPtr& mesh, const VectorFn& z);

/// -A grad u_h on every element (broken).
[[nodiscard]] FluxField numerical_flux(const FemField& u, const Mat2& A);

/// Area-weighted vertex averages of a broken field. When operations is given
/// it receives the number of element-to-vertex accumulations performed.
[[nodiscard]] FluxField average_flux(const FluxField& broken, std::size_t* operations = nullptr);

/// Componentwise L2 projection of a broken field onto continuous P1 vectors.
[[nodiscard]] FluxField l2_project_flux(const FluxField& broken, double rel_tol = 1e-13);

/// Largest |(z - z_broken, phi_i)| over vertices and both components.
[[nodiscard]] double projection_orthogonality_residual(const FluxField& projected, const FluxField& broken);

[[nodiscard]] std::vector<double> divergence(const FluxField& z);

/// L2 distance between two flux fields on the same mesh.
[[nodiscard]] double flux_distance_L2(const FluxField& a, const FluxField& b, int degree = 2);

} // namespace rdlab
