#include "rdlab/fluxrec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdlab {

FluxField::FluxField(FluxKind kind, MeshPtr mesh, std::vector<Vec2> values)
    : kind_(kind), mesh_(std::move(mesh)), values_(std::move(values))
{
    if (!mesh_) {
        throw std::invalid_argument("FluxField: null mesh");
    }
    const std::size_t expected = kind_ == FluxKind::Broken ? mesh_->num_elements() : mesh_->num_vertices();
    if (values_.size() != expected) {
        throw std::invalid_argument("FluxField: value count does not match the mesh");
    }
}

FluxField FluxField::broken(MeshPtr mesh, std::vector<Vec2> per_element)
{
    return FluxField(FluxKind::Broken, std::move(mesh), std::move(per_element));
}

FluxField FluxField::conforming(MeshPtr mesh, std::vector<Vec2> per_vertex)
{
    return FluxField(FluxKind::Conforming, std::move(mesh), std::move(per_vertex));
}

Vec2 FluxField::value(std::size_t r, const Bary& lambda) const
{
    if (kind_ == FluxKind::Broken) {
        return values_.at(r);
    }
    const Triangle& t = mesh_->triangle(r);
    return lambda[0] * values_[t[0]] + lambda[1] * values_[t[1]] + lambda[2] * values_[t[2]];
}

double FluxField::divergence(std::size_t r) const
{
    if (kind_ != FluxKind::Conforming) {
        throw std::logic_error("FluxField::divergence: a broken field has no global divergence");
    }
    const Triangle& t = mesh_->triangle(r);
    const auto& g = mesh_->grad_lambda(r);
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
        d += values_[t[i]].x * g[i].x + values_[t[i]].y * g[i].y;
    }
    return d;
}

FluxField interpolate_flux(const MeshPtr& mesh, const VectorFn& z)
{
    std::vector<Vec2> v(mesh->num_vertices());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = z(mesh->vertex(i));
    }
    return FluxField::conforming(mesh, std::move(v));
}

FluxField numerical_flux(const FemField& u, const Mat2& A)
{
    std::vector<Vec2> z(u.mesh().num_elements());
    for (std::size_t r = 0; r < z.size(); ++r) {
        z[r] = -(A * u.gradient(r));
    }
    return FluxField::broken(u.mesh_ptr(), std::move(z));
}

FluxField average_flux(const FluxField& broken, std::size_t* operations)
{
    if (broken.kind() != FluxKind::Broken) {
        throw std::invalid_argument("average_flux: input must be broken");
    }
    const Mesh& mesh = broken.mesh();
    std::vector<Vec2> sum(mesh.num_vertices());
    std::vector<double> weight(mesh.num_vertices(), 0.0);
    std::size_t ops = 0;
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        const double a = mesh.area(r);
        for (std::size_t v : mesh.triangle(r)) {
            sum[v] += a * broken.values()[r];
            weight[v] += a;
            ++ops;
        }
    }
    for (std::size_t v = 0; v < sum.size(); ++v) {
        sum[v] *= 1.0 / weight[v];
    }
    if (operations) {
        *operations = ops;
    }
    return FluxField::conforming(broken.mesh_ptr(), std::move(sum));
}

namespace {

// (z_broken, phi_i) per component
std::array<std::vector<double>, 2> broken_moments(const FluxField& broken)
{
    const Mesh& mesh = broken.mesh();
    std::array<std::vector<double>, 2> b{std::vector<double>(mesh.num_vertices(), 0.0),
                                         std::vector<double>(mesh.num_vertices(), 0.0)};
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        const double third = mesh.area(r) / 3.0;
        const Vec2 z = broken.values()[r];
        for (std::size_t v : mesh.triangle(r)) {
            b[0][v] += third * z.x;
            b[1][v] += third * z.y;
        }
    }
    return b;
}

} // namespace

FluxField l2_project_flux(const FluxField& broken, double rel_tol)
{
    if (broken.kind() != FluxKind::Broken) {
        throw std::invalid_argument("l2_project_flux: input must be broken");
    }
    const SparseMatrix mass = assemble_mass(broken.mesh());
    const auto b = broken_moments(broken);
    const CgResult zx = solve_cg(mass, b[0], rel_tol);
    const CgResult zy = solve_cg(mass, b[1], rel_tol);
    std::vector<Vec2> z(broken.mesh().num_vertices());
    for (std::size_t v = 0; v < z.size(); ++v) {
        z[v] = {zx.x[v], zy.x[v]};
    }
    return FluxField::conforming(broken.mesh_ptr(), std::move(z));
}

double projection_orthogonality_residual(const FluxField& projected, const FluxField& broken)
{
    const SparseMatrix mass = assemble_mass(broken.mesh());
    const auto b = broken_moments(broken);
    std::vector<double> cx(projected.values().size());
    std::vector<double> cy(projected.values().size());
    for (std::size_t v = 0; v < cx.size(); ++v) {
        cx[v] = projected.values()[v].x;
        cy[v] = projected.values()[v].y;
    }
    const std::vector<double> mx = mass.multiply(cx);
    const std::vector<double> my = mass.multiply(cy);
    double worst = 0.0;
    for (std::size_t v = 0; v < cx.size(); ++v) {
        worst = std::max({worst, std::abs(mx[v] - b[0][v]), std::abs(my[v] - b[1][v])});
    }
    return worst;
}

std::vector<double> divergence(const FluxField& z)
{
    std::vector<double> d(z.mesh().num_elements());
    for (std::size_t r = 0; r < d.size(); ++r) {
        d[r] = z.divergence(r);
    }
    return d;
}

double flux_distance_L2(const FluxField& a, const FluxField& b, int degree)
{
    if (a.mesh_ptr() != b.mesh_ptr() && !(a.mesh() == b.mesh())) {
        throw std::invalid_argument("flux_distance_L2: fields live on different meshes");
    }
    const Mesh& mesh = a.mesh();
    const QuadRule& rule = triangle_rule(degree);
    double s = 0.0;
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        for_each_qp(mesh, r, rule, [&](const Point&, const Bary& l, double w) {
            const Vec2 d = a.value(r, l) - b.value(r, l);
            s += w * dot(d, d);
        });
    }
    return std::sqrt(s);
}

} // namespace rdlab
