#include "rdlab/femcore.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace rdlab;

namespace {

MeshPtr square(std::size_t n) { return std::make_shared<const Mesh>(build_structured_unit_square(n)); }

MeshPtr unit_triangle()
{
    return std::make_shared<const Mesh>(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {true, true, true}));
}

} // namespace

TEST(FemCore, LocalMatrices)
{
    const ElementGeometry g = triangle_geometry({0, 0}, {1, 0}, {0, 1});
    const LocalMatrix k = local_stiffness(g, Mat2::identity());
    const double expected_k[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    const LocalMatrix m = local_mass(g.area);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(k[i][j], expected_k[i][j], 1e-15);
            EXPECT_NEAR(m[i][j], (i == j ? 2.0 : 1.0) / 24.0, 1e-15);
        }
    }
    // mass matrix entries against barycentric moments by quadrature
    const auto tri = unit_triangle();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for_each_qp(*tri, 0, triangle_rule(2), [&](const Point&, const Bary& l, double w) { s += w * l[i] * l[j]; });
            EXPECT_NEAR(m[i][j], s, 1e-15);
        }
    }
}

TEST(FemCore, StiffnessProperties)
{
    const Mesh m = build_structured_unit_square(5);
    const SparseMatrix k1 = assemble_stiffness(m, Mat2::identity());
    const SparseMatrix k2 = assemble_stiffness(m, Mat2::diag(2.0, 2.0));
    EXPECT_EQ(k1.max_asymmetry(), 0.0);
    const std::vector<double> ones(m.num_vertices(), 1.0);
    for (double v : k1.multiply(ones)) {
        EXPECT_NEAR(v, 0.0, 1e-13);
    }
    for (std::size_t i = 0; i < m.num_vertices(); ++i) {
        for (std::size_t j = 0; j < m.num_vertices(); ++j) {
            EXPECT_EQ(k2(i, j), 2.0 * k1(i, j));
        }
    }
    const SparseMatrix ka = assemble_stiffness(m, Mat2{2.0, 0.7, 0.7, 1.0});
    EXPECT_EQ(ka.max_asymmetry(), 0.0);
}

TEST(FemCore, MassAndLoad)
{
    const Mesh m = build_structured_unit_square(4);
    const SparseMatrix mass = assemble_mass(m);
    double total = 0.0;
    for (double v : mass.values()) {
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-14);

    const std::vector<double> b1 = assemble_load(m, [](const Point&) { return 1.0; }, triangle_rule(2));
    for (std::size_t i = 0; i < m.num_vertices(); ++i) {
        double support = 0.0;
        for (std::size_t r : m.elements_of_vertex(i)) {
            support += m.area(r);
        }
        EXPECT_NEAR(b1[i], support / 3.0, 1e-15);
    }
    const std::vector<double> b0 = assemble_load(m, [](const Point&) { return 0.0; }, triangle_rule(2));
    for (double v : b0) {
        EXPECT_EQ(v, 0.0);
    }

    // f = hat function of vertex j reproduces the j-th column of the mass matrix
    const auto mp = square(4);
    const std::size_t j = 12;
    std::vector<double> c(mp->num_vertices(), 0.0);
    c[j] = 1.0;
    const FemField hat(mp, c);
    std::vector<double> bh(mp->num_vertices(), 0.0);
    for (std::size_t r = 0; r < mp->num_elements(); ++r) {
        const Triangle& t = mp->triangle(r);
        for_each_qp(*mp, r, triangle_rule(2), [&](const Point&, const Bary& l, double w) {
            const double fx = hat.value(r, l);
            for (int i = 0; i < 3; ++i) {
                bh[t[i]] += w * fx * l[i];
            }
        });
    }
    for (std::size_t i = 0; i < mp->num_vertices(); ++i) {
        EXPECT_NEAR(bh[i], mass(i, j), 1e-15);
    }
}

TEST(FemCore, Dirichlet)
{
    for (std::size_t n : {2u, 4u}) {
        const Mesh m = build_structured_unit_square(n);
        const SparseMatrix k = assemble_stiffness(m, Mat2::identity());
        std::vector<double> b(m.num_vertices());
        for (std::size_t i = 0; i < b.size(); ++i) {
            b[i] = static_cast<double>(i);
        }
        const ReducedSystem red = apply_homogeneous_dirichlet(k, b, m);
        EXPECT_EQ(red.matrix.rows(), (n - 1) * (n - 1));
        for (std::size_t q = 0; q < red.dofs.size(); ++q) {
            EXPECT_EQ(red.rhs[q], b[red.dofs[q]]);
        }
    }
    const Mesh one = build_structured_unit_square(1);
    EXPECT_THROW((void)apply_homogeneous_dirichlet(assemble_mass(one), std::vector<double>(4, 0.0), one),
                 std::invalid_argument);
}

TEST(FemCore, BrokenGradient)
{
    const auto m = square(3);
    for (const Vec2& g : broken_gradient(interpolate(m, [](const Point& x) { return x.x; }))) {
        EXPECT_NEAR(g.x, 1.0, 1e-14);
        EXPECT_NEAR(g.y, 0.0, 1e-14);
    }
    for (const Vec2& g : broken_gradient(interpolate(m, [](const Point& x) { return x.x + 2 * x.y; }))) {
        EXPECT_NEAR(g.x, 1.0, 1e-13);
        EXPECT_NEAR(g.y, 2.0, 1e-13);
    }
    for (const Vec2& g : broken_gradient(interpolate(m, [](const Point&) { return 4.0; }))) {
        EXPECT_NEAR(norm(g), 0.0, 1e-13);
    }
    EXPECT_THROW(FemField(m, std::vector<double>(m->num_vertices(), 1.0), true), std::invalid_argument);
}

TEST(FemCore, Norms)
{
    const double pi = std::numbers::pi;
    const Mesh m = build_structured_unit_square(64);
    const QuadRule& rule = triangle_rule(6);
    const ElementScalarFn u = [pi](std::size_t, const Point& x, const Bary&) {
        return std::sin(pi * x.x) * std::sin(pi * x.y);
    };
    const ElementVectorFn gu = [pi](std::size_t, const Point& x, const Bary&) {
        return Vec2{pi * std::cos(pi * x.x) * std::sin(pi * x.y), pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
    };
    const double l2 = norm_L2(m, u, rule);
    const double h1 = seminorm_H1(m, gu, rule);
    EXPECT_NEAR(l2 * l2, 0.25, 1e-10);
    EXPECT_NEAR(h1 * h1, pi * pi / 2.0, 1e-9);
    ProblemSpec p = builtin_problem("sinsin", 4.0);
    const double en = energy_norm(m, gu, u, p, rule);
    EXPECT_NEAR(en * en, pi * pi / 2.0 + 1.0, 1e-9);

    // |||e|||^2 is affine in sigma with slope ||e||_0^2
    const Mesh c = build_structured_unit_square(8);
    const double e0 = norm_L2(c, u, rule);
    const double a0 = energy_norm(c, gu, u, builtin_problem("sinsin", 0.0), rule);
    for (double s : {1.0, 10.0, 1e3}) {
        const double es = energy_norm(c, gu, u, builtin_problem("sinsin", s), rule);
        EXPECT_NEAR(es * es, a0 * a0 + s * e0 * e0, 1e-12 * es * es);
    }
    const ElementScalarFn zero = [](std::size_t, const Point&, const Bary&) { return 0.0; };
    EXPECT_EQ(norm_L2(c, zero, rule), 0.0);
}

TEST(FemCore, SolveAndGalerkinOrthogonality)
{
    const auto m = square(16);
    for (double sigma : {0.0, 1e4}) {
        const ProblemSpec p = builtin_problem("sinsin", sigma);
        const FemField u = solve_reaction_diffusion(p, m);
        EXPECT_TRUE(u.zero_trace());
        EXPECT_LE(galerkin_residual(p, u), 1e-9);
    }
    const FemField z = solve_reaction_diffusion(builtin_problem("zero", 2.0), m);
    for (double c : z.coefficients()) {
        EXPECT_EQ(c, 0.0);
    }
    const ErrorNorms ez = error_norms(z, builtin_problem("zero", 2.0));
    EXPECT_EQ(ez.energy, 0.0);
    EXPECT_THROW((void)error_norms(z, builtin_problem("linear", 0.0)), std::invalid_argument);
}

TEST(FemCore, AprioriRates)
{
    std::vector<MeshPtr> meshes;
    for (std::size_t n : {8u, 16u, 32u, 64u}) {
        meshes.push_back(square(n));
    }
    const auto rep = a_priori_report(builtin_problem("sinsin", 0.0), meshes);
    ASSERT_EQ(rep.size(), 4u);
    EXPECT_FALSE(rep[0].rate_h1.has_value());
    for (std::size_t k = 1; k < rep.size(); ++k) {
        EXPECT_LT(rep[k].errors.energy, rep[k - 1].errors.energy);
        EXPECT_NEAR(*rep[k].rate_h1, 1.0, 0.1);
        EXPECT_NEAR(*rep[k].rate_l2, 2.0, 0.15);
    }

    const auto hm2 = a_priori_report(builtin_problem("sinsin", 0.0), meshes, [](double h) { return 1.0 / (h * h); });
    for (std::size_t k = 1; k < hm2.size(); ++k) {
        EXPECT_NEAR(hm2[k].sigma, 1.0 / (hm2[k].h * hm2[k].h), 1e-9);
        EXPECT_NEAR(*hm2[k].rate_energy, 1.0, 0.15);
    }
    EXPECT_THROW((void)a_priori_report(builtin_problem("linear", 0.0), meshes), std::invalid_argument);
}
