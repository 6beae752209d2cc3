#include "rdlab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rdlab {

void gauss_legendre_unit(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights)
{
    if (n == 0) {
        throw std::invalid_argument("gauss_legendre_unit: n must be >= 1");
    }
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // recompute derivative at the converged root
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double dk = static_cast<double>(k);
            const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : dn * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
}

namespace {

QuadRule make_triangle_rule(int degree)
{
    QuadRule rule;
    rule.degree = degree;
    if (degree == 1) {
        rule.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
        rule.weights = {0.5};
        return rule;
    }
    if (degree == 2) {
        const double a = 2.0 / 3.0;
        const double b = 1.0 / 6.0;
        rule.points = {{a, b, b}, {b, a, b}, {b, b, a}};
        rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
        return rule;
    }
    // Collapsed map x = s, y = (1 - s) t with Jacobian (1 - s).
    const auto ns = static_cast<std::size_t>((degree + 3) / 2);
    const auto nt = static_cast<std::size_t>((degree + 2) / 2);
    std::vector<double> xs;
    std::vector<double> ws;
    std::vector<double> xt;
    std::vector<double> wt;
    gauss_legendre_unit(ns, xs, ws);
    gauss_legendre_unit(nt, xt, wt);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const double x = xs[i];
            const double y = (1.0 - xs[i]) * xt[j];
            rule.points.push_back({1.0 - x - y, x, y});
            rule.weights.push_back(ws[i] * wt[j] * (1.0 - xs[i]));
        }
    }
    return rule;
}

QuadRule make_edge_rule(int degree)
{
    QuadRule rule;
    rule.degree = degree;
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre_unit(static_cast<std::size_t>(degree + 2) / 2, x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
        rule.points.push_back({1.0 - x[i], x[i], 0.0});
        rule.weights.push_back(w[i]);
    }
    return rule;
}

} // namespace

const QuadRule& triangle_rule(int degree)
{
    static const std::array<QuadRule, 6> rules = [] {
        std::array<QuadRule, 6> r;
        for (int d = 1; d <= 6; ++d) {
            r[static_cast<std::size_t>(d - 1)] = make_triangle_rule(d);
        }
        return r;
    }();
    if (degree < 1 || degree > 6) {
        throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree) + " (1..6)");
    }
    return rules[static_cast<std::size_t>(degree - 1)];
}

const QuadRule& edge_rule(int degree)
{
    static const std::array<QuadRule, 5> rules = [] {
        std::array<QuadRule, 5> r;
        for (int d = 1; d <= 5; ++d) {
            r[static_cast<std::size_t>(d - 1)] = make_edge_rule(d);
        }
        return r;
    }();
    if (degree < 1 || degree > 5) {
        throw std::invalid_argument("edge_rule: unsupported degree " + std::to_string(degree) + " (1..5)");
    }
    return rules[static_cast<std::size_t>(degree - 1)];
}

} // namespace rdlab
