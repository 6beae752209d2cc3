#pragma once

#include "rdlab/linalg2.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace rdlab {

using Triangle = std::array<std::size_t, 3>;
using Edge = std::array<std::size_t, 2>;

struct ElementGeometry {
    double area = 0.0;
    double diameter = 0.0;   // longest edge
    double inradius = 0.0;   // 2 * area / perimeter
    std::array<Vec2, 3> grad_lambda{}; // gradients of the barycentric coordinates
};

/// Geometry of the triangle (p0, p1, p2). Throws MeshError::Degenerate on zero
/// area and MeshError::Orientation on clockwise ordering.
[[nodiscard]] ElementGeometry triangle_geometry(const Point& p0, const Point& p1, const Point& p2);

/// Conforming triangulation of a polygon. Immutable after construction; the
/// constructor audits orientation, edge conformity, hanging vertices and the
/// consistency of the boundary flags.
class Mesh {
public:
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<bool> boundary_flags);

    [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t num_elements() const noexcept { return triangles_.size(); }
    [[nodiscard]] std::size_t num_edges() const noexcept { return edges_.size(); }

    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    [[nodiscard]] const Point& vertex(std::size_t i) const { return vertices_.at(i); }
    [[nodiscard]] const Triangle& triangle(std::size_t r) const { return triangles_.at(r); }

    [[nodiscard]] bool is_boundary_vertex(std::size_t i) const { return boundary_flags_.at(i); }
    [[nodiscard]] const std::vector<bool>& boundary_flags() const noexcept { return boundary_flags_; }
    [[nodiscard]] const std::vector<std::size_t>& boundary_vertices() const noexcept { return boundary_vertices_; }
    [[nodiscard]] const std::vector<std::size_t>& interior_vertices() const noexcept { return interior_vertices_; }
    /// Oriented as in the owning triangle.
    [[nodiscard]] const std::vector<Edge>& boundary_edges() const noexcept { return boundary_edges_; }
    /// Unique edges with v0 < v1.
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    [[nodiscard]] double area(std::size_t r) const { return areas_.at(r); }
    [[nodiscard]] const std::vector<double>& areas() const noexcept { return areas_; }
    [[nodiscard]] const std::vector<double>& element_diameters() const noexcept { return diameters_; }
    [[nodiscard]] const std::vector<double>& inscribed_radii() const noexcept { return inradii_; }
    /// Constant gradients of the three barycentric coordinates of element r.
    [[nodiscard]] const std::array<Vec2, 3>& grad_lambda(std::size_t r) const { return grad_lambda_.at(r); }
    [[nodiscard]] double total_area() const noexcept;
    /// Mesh parameter h: the largest element diameter.
    [[nodiscard]] double h() const noexcept { return h_; }

    [[nodiscard]] std::span<const std::size_t> elements_of_vertex(std::size_t i) const;
    /// Vertices sharing an edge with i, ascending.
    [[nodiscard]] std::span<const std::size_t> neighbours_of_vertex(std::size_t i) const;

    friend bool operator==(const Mesh& a, const Mesh& b)
    {
        return a.vertices_ == b.vertices_ && a.triangles_ == b.triangles_ && a.boundary_flags_ == b.boundary_flags_;
    }

private:
    void audit_and_build();

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<bool> boundary_flags_;

    std::vector<std::size_t> boundary_vertices_;
    std::vector<std::size_t> interior_vertices_;
    std::vector<Edge> boundary_edges_;
    std::vector<Edge> edges_;
    std::vector<double> areas_;
    std::vector<double> diameters_;
    std::vector<double> inradii_;
    std::vector<std::array<Vec2, 3>> grad_lambda_;
    double h_ = 0.0;

    std::vector<std::size_t> vert_elem_offsets_;
    std::vector<std::size_t> vert_elem_;
    std::vector<std::size_t> vert_nbr_offsets_;
    std::vector<std::size_t> vert_nbr_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Unit square split into n x n cells, each cut along its lower-left to
/// upper-right diagonal. Vertex (i, j) has index j * (n + 1) + i.
[[nodiscard]] Mesh build_structured_unit_square(std::size_t n);

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints. Parent vertices keep their indices.
[[nodiscard]] Mesh refine_uniform(const Mesh& mesh);

/// Subdivision count n of a structured mesh, recovered as sqrt(#elements / 2).
[[nodiscard]] std::size_t mesh_level(const Mesh& mesh);

[[nodiscard]] ElementGeometry element_geometry(const Mesh& mesh, std::size_t r);

struct Patch {
    std::size_t center_element = 0;
    std::vector<std::size_t> members; // ascending, includes the center
};

[[nodiscard]] std::vector<std::size_t> vertex_patch(const Mesh& mesh, std::size_t vertex);
/// All triangles whose closure meets the closure of triangle r.
[[nodiscard]] Patch element_patch(const Mesh& mesh, std::size_t r);

struct QualityReport {
    double h = 0.0;
    double min_shape_ratio = 0.0; // min over elements of inradius / diameter
    double min_size_ratio = 0.0;  // min over elements of diameter / h
};

[[nodiscard]] QualityReport quality_report(const Mesh& mesh);

/// Text format: "vertices N", N lines "x y flag"; "triangles M", M lines
/// "i j k" (0-based, counter-clockwise). '#' starts a comment.
[[nodiscard]] Mesh read_mesh(std::istream& in);
void write_mesh(const Mesh& mesh, std::ostream& out);
[[nodiscard]] Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

} // namespace rdlab
