#include "rdlab/femcore.hpp"
#include "rdlab/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace rdlab;

TEST(Problem, BuiltinsSatisfyThePde)
{
    const double pi = std::numbers::pi;
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double sigma : {0.0, 1.0, 1e4}) {
        const ProblemSpec s = builtin_problem("sinsin", sigma);
        const ProblemSpec p = builtin_problem("polybubble", sigma);
        EXPECT_NO_THROW(s.validate());
        EXPECT_NO_THROW(p.validate());
        for (int k = 0; k < 100; ++k) {
            const Point x{unif(gen), unif(gen)};
            const double u = std::sin(pi * x.x) * std::sin(pi * x.y);
            EXPECT_NEAR(s.f(x), (2 * pi * pi + sigma) * u, 1e-9 * std::max(1.0, std::abs(s.f(x))));
            const double ub = x.x * (1 - x.x) * x.y * (1 - x.y);
            EXPECT_NEAR(p.f(x), 2 * (x.x * (1 - x.x) + x.y * (1 - x.y)) + sigma * ub, 1e-12 * (1 + sigma));
        }
    }
    const ProblemSpec z = builtin_problem("zero", 3.0);
    EXPECT_EQ(z.f({0.3, 0.4}), 0.0);
    EXPECT_THROW((void)builtin_problem("nope", 0.0), std::invalid_argument);
}

TEST(Problem, ValidationRejectsBadData)
{
    ProblemSpec p = builtin_problem("sinsin", 0.0);
    p.A = Mat2{1.0, 0.5, 0.4, 1.0};
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.A = Mat2{1.0, 2.0, 2.0, 1.0};
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = builtin_problem("sinsin", 0.0);
    p.sigma = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = builtin_problem("sinsin", 0.0);
    p.sigma = 5.0; // f no longer matches
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_NO_THROW(p.with_sigma(5.0).validate());
}

TEST(Problem, AnisotropicManufacturedSource)
{
    const Mat2 A{2.0, 0.3, 0.3, 1.5};
    const ProblemSpec p = builtin_problem("polybubble", 2.0, A);
    EXPECT_NO_THROW(p.validate());
    const auto mu = p.spectral_bounds();
    EXPECT_NEAR(mu[0] * mu[1], A.det(), 1e-14);
    EXPECT_NEAR(mu[0] + mu[1], 3.5, 1e-14);
}

TEST(Problem, PolybubbleGradientNorm)
{
    // int (1-2x)^2 y^2 (1-y)^2 = (1/3)(1/30); two such terms.
    const ProblemSpec p = builtin_problem("polybubble", 0.0);
    const Mesh m = build_structured_unit_square(8);
    const double g2 = integrate_on_mesh(
        m,
        [&](const Point& x) {
            const Vec2 g = p.exact->gradient(x);
            return dot(g, g);
        },
        triangle_rule(6));
    EXPECT_NEAR(g2, 2.0 / 90.0, 1e-14);
}
