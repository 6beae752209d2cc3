#include "rdlab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rdlab {

namespace {

constexpr double pi = std::numbers::pi;

double contract(const Mat2& a, const Mat2& hess)
{
    return a.a11 * hess.a11 + a.a12 * hess.a21 + a.a21 * hess.a12 + a.a22 * hess.a22;
}

ProblemSpec manufactured(std::string name, ExactSolution exact, double sigma, const Mat2& A)
{
    ProblemSpec p;
    p.name = std::move(name);
    p.A = A;
    p.sigma = sigma;
    p.f = [exact, sigma, A](const Point& x) { return -contract(A, exact.hessian(x)) + sigma * exact.value(x); };
    p.exact = std::move(exact);
    return p;
}

} // namespace

void ProblemSpec::validate() const
{
    if (!A.is_symmetric()) {
        throw std::invalid_argument("ProblemSpec: diffusion matrix is not symmetric");
    }
    if (!(spectral_bounds()[0] > 0.0)) {
        throw std::invalid_argument("ProblemSpec: diffusion matrix is not positive definite");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("ProblemSpec: reaction coefficient must be finite and >= 0");
    }
    if (!f) {
        throw std::invalid_argument("ProblemSpec: source term missing");
    }
    if (exact) {
        if (!exact->value || !exact->gradient || !exact->hessian) {
            throw std::invalid_argument("ProblemSpec: exact solution needs value, gradient and hessian");
        }
        // Halton points in the open unit square.
        const auto halton = [](unsigned i, unsigned base) {
            double f = 1.0;
            double r = 0.0;
            while (i > 0) {
                f /= base;
                r += f * (i % base);
                i /= base;
            }
            return r;
        };
        for (unsigned k = 1; k <= 100; ++k) {
            const Point x{halton(k, 2), halton(k, 3)};
            const double fx = f(x);
            const double lhs = -contract(A, exact->hessian(x)) + sigma * exact->value(x);
            if (std::abs(lhs - fx) > 1e-8 * std::max(1.0, std::abs(fx))) {
                throw std::invalid_argument("ProblemSpec '" + name + "': exact solution does not satisfy the PDE");
            }
        }
    }
}

ProblemSpec ProblemSpec::with_sigma(double new_sigma) const
{
    if (rebuild) {
        return rebuild(new_sigma);
    }
    if (exact) {
        throw std::logic_error("ProblemSpec::with_sigma: cannot rebuild a custom manufactured source");
    }
    ProblemSpec p = *this;
    p.sigma = new_sigma;
    return p;
}

ProblemSpec builtin_problem(std::string_view name, double sigma, const Mat2& A)
{
    ProblemSpec p;
    if (name == "sinsin") {
        ExactSolution e;
        e.value = [](const Point& x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
        e.gradient = [](const Point& x) {
            return Vec2{pi * std::cos(pi * x.x) * std::sin(pi * x.y), pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
        };
        e.hessian = [](const Point& x) {
            const double s = std::sin(pi * x.x) * std::sin(pi * x.y);
            const double c = pi * pi * std::cos(pi * x.x) * std::cos(pi * x.y);
            return Mat2{-pi * pi * s, c, c, -pi * pi * s};
        };
        p = manufactured("sinsin", std::move(e), sigma, A);
    } else if (name == "polybubble") {
        ExactSolution e;
        e.value = [](const Point& x) { return x.x * (1 - x.x) * x.y * (1 - x.y); };
        e.gradient = [](const Point& x) {
            return Vec2{(1 - 2 * x.x) * x.y * (1 - x.y), x.x * (1 - x.x) * (1 - 2 * x.y)};
        };
        e.hessian = [](const Point& x) {
            const double xy = (1 - 2 * x.x) * (1 - 2 * x.y);
            return Mat2{-2 * x.y * (1 - x.y), xy, xy, -2 * x.x * (1 - x.x)};
        };
        p = manufactured("polybubble", std::move(e), sigma, A);
    } else if (name == "zero") {
        ExactSolution e;
        e.value = [](const Point&) { return 0.0; };
        e.gradient = [](const Point&) { return Vec2{}; };
        e.hessian = [](const Point&) { return Mat2{0.0, 0.0, 0.0, 0.0}; };
        p = manufactured("zero", std::move(e), sigma, A);
    } else if (name == "linear") {
        p.name = "linear";
        p.A = A;
        p.sigma = sigma;
        p.f = [](const Point& x) { return 1.0 + x.x + 2.0 * x.y; };
    } else {
        throw std::invalid_argument("builtin_problem: unknown problem '" + std::string(name) + "'");
    }
    p.rebuild = [n = std::string(name), A](double s) { return builtin_problem(n, s, A); };
    return p;
}

std::vector<std::string> builtin_problem_names() { return {"sinsin", "polybubble", "zero", "linear"}; }

} // namespace rdlab
