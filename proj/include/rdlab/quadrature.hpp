#pragma once

#include "rdlab/mesh.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace rdlab {

using Bary = std::array<double, 3>;

/// Quadrature rule on the reference triangle (weights sum to 1/2) or on the
/// reference edge [0, 1] (weights sum to 1, points stored as (1 - t, t, 0)).
struct QuadRule {
    std::vector<Bary> points;
    std::vector<double> weights;
    int degree = 0;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// Positive-weight rule exact for polynomials of total degree <= degree,
/// 1 <= degree <= 6. Degrees 1 and 2 use the symmetric centroid and
/// three-point rules; higher degrees use a collapsed Gauss-Legendre product.
[[nodiscard]] const QuadRule& triangle_rule(int degree);

/// Gauss-Legendre rule on [0, 1], exact up to the given degree (1..5).
[[nodiscard]] const QuadRule& edge_rule(int degree);

/// Nodes and weights of the n-point Gauss-Legendre rule on [0, 1].
void gauss_legendre_unit(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

[[nodiscard]] inline Point map_to_element(const Mesh& mesh, std::size_t r, const Bary& lambda)
{
    const Triangle& t = mesh.triangle(r);
    const Point& a = mesh.vertex(t[0]);
    const Point& b = mesh.vertex(t[1]);
    const Point& c = mesh.vertex(t[2]);
    return {lambda[0] * a.x + lambda[1] * b.x + lambda[2] * c.x, lambda[0] * a.y + lambda[1] * b.y + lambda[2] * c.y};
}

/// Calls fn(x, lambda, w) for each quadrature point of element r, where w is
/// the physical weight (reference weight times 2 * area).
template <class Fn>
void for_each_qp(const Mesh& mesh, std::size_t r, const QuadRule& rule, Fn&& fn)
{
    const double jac = 2.0 * mesh.area(r);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        fn(map_to_element(mesh, r, rule.points[q]), rule.points[q], jac * rule.weights[q]);
    }
}

/// Integral over element r of integrand(x).
template <class Fn>
[[nodiscard]] double integrate_on_element(const Mesh& mesh, std::size_t r, Fn&& integrand, const QuadRule& rule)
{
    double sum = 0.0;
    for_each_qp(mesh, r, rule, [&](const Point& x, const Bary&, double w) { sum += w * integrand(x); });
    return sum;
}

/// Integral over the whole mesh of integrand(x).
template <class Fn>
[[nodiscard]] double integrate_on_mesh(const Mesh& mesh, Fn&& integrand, const QuadRule& rule)
{
    double sum = 0.0;
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        sum += integrate_on_element(mesh, r, integrand, rule);
    }
    return sum;
}

} // namespace rdlab
