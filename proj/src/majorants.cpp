#include "rdlab/majorants.hpp"

#include "rdlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rdlab {

namespace {

constexpr double pi = std::numbers::pi;
// slack for range checks at a junction computed in floating point
constexpr double range_slack = 1e-12;

void require_positive(double x, const char* what)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

void require_sigma(double sigma)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("reaction coefficient must be finite and >= 0");
    }
}

std::string fmt(double x)
{
    std::ostringstream s;
    s << std::setprecision(6) << x;
    return s.str();
}

struct Parts {
    std::vector<double> diffusion;
    std::vector<double> residual_sq;
    double D = 0.0;
    double R2 = 0.0;
};

void check_inputs(const FemField& v, const FluxField& z)
{
    if (!z.is_conforming()) {
        throw std::invalid_argument("majorant: the flux must be conforming (a broken field is not in H(div))");
    }
    if (v.mesh_ptr() != z.mesh_ptr() && !(v.mesh() == z.mesh())) {
        throw std::invalid_argument("majorant: solution and flux live on different meshes");
    }
}

std::vector<double> element_diffusion(const FemField& v, const FluxField& z, const Mat2& A)
{
    const Mesh& mesh = v.mesh();
    const Mat2 Ainv = A.inverse();
    const QuadRule& rule = triangle_rule(2);
    std::vector<double> d(mesh.num_elements(), 0.0);
    for (std::size_t r = 0; r < d.size(); ++r) {
        const Vec2 ag = A * v.gradient(r);
        for_each_qp(mesh, r, rule, [&](const Point&, const Bary& l, double w) {
            const Vec2 q = ag + z.value(r, l);
            d[r] += w * dot(q, Ainv * q);
        });
    }
    return d;
}

std::vector<double> element_residual_sq(const ProblemSpec& problem, const FemField& v, const FluxField& z,
                                        bool use_fhat, int degree)
{
    const Mesh& mesh = v.mesh();
    const QuadRule& rule = triangle_rule(degree);
    std::vector<double> res(mesh.num_elements(), 0.0);
    ElementwiseP1 fhat;
    if (use_fhat) {
        fhat = elementwise_p1_projection(v.mesh_ptr(), problem.f, degree);
    }
    for (std::size_t r = 0; r < res.size(); ++r) {
        const double divz = z.divergence(r);
        for_each_qp(mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const double g = use_fhat ? fhat.value(r, l) : problem.f(x);
            const double q = g - problem.sigma * v.value(r, l) - divz;
            res[r] += w * q * q;
        });
    }
    return res;
}

double sum(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

Parts evaluate(const ProblemSpec& problem, const FemField& v, const FluxField& z, bool use_fhat, int degree)
{
    check_inputs(v, z);
    Parts p;
    p.diffusion = element_diffusion(v, z, problem.A);
    p.residual_sq = element_residual_sq(problem, v, z, use_fhat, degree);
    p.D = sum(p.diffusion);
    p.R2 = sum(p.residual_sq);
    return p;
}

MajorantReport make_report(std::string name, const ProblemSpec& problem, const FemField& v, const Factors& f,
                           Parts parts, std::vector<double> osc = {})
{
    MajorantReport rep;
    rep.estimator = std::move(name);
    rep.sigma = problem.sigma;
    rep.h = v.mesh().h();
    rep.prefactor = f.Theta;
    rep.residual_mult = f.theta;
    rep.diffusion = parts.D;
    rep.residual_sq = parts.R2;
    rep.oscillation = sum(osc);
    rep.element_diffusion = std::move(parts.diffusion);
    rep.element_residual_sq = std::move(parts.residual_sq);
    rep.element_oscillation = std::move(osc);
    rep.total = combine(f, rep.diffusion, rep.residual_sq, rep.oscillation);
    rep.constants["Theta"] = f.Theta;
    rep.constants["theta"] = f.theta;
    return rep;
}

// sum_r weight_r ||f - Pi^1_r f||^2_r
std::vector<double> weighted_oscillation(const ProblemSpec& problem, const FemField& v, int degree,
                                         const std::function<double(std::size_t)>& weight)
{
    const ElementwiseP1 fhat = elementwise_p1_projection(v.mesh_ptr(), problem.f, degree);
    std::vector<double> osc = oscillation_sq(fhat, problem.f, degree);
    for (std::size_t r = 0; r < osc.size(); ++r) {
        osc[r] *= weight(r);
    }
    return osc;
}

void require_unit_square(const Mesh& mesh)
{
    double xmin = 1e300;
    double xmax = -1e300;
    double ymin = 1e300;
    double ymax = -1e300;
    for (const Point& p : mesh.vertices()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    if (xmin != 0.0 || ymin != 0.0 || xmax != 1.0 || ymax != 1.0 || std::abs(mesh.total_area() - 1.0) > 1e-12) {
        throw std::invalid_argument("boxed_integral: the domain must be the unit square");
    }
}

void require_laplace(const ProblemSpec& problem, const char* who)
{
    if (problem.sigma != 0.0 || !(problem.A == Mat2::identity())) {
        throw RangeError(std::string(who) + ": defined for sigma = 0 and A = I only (sigma = " + fmt(problem.sigma) +
                         ")");
    }
}

} // namespace

double combine(const Factors& f, double diffusion, double residual_sq, double oscillation)
{
    return f.Theta * (diffusion + f.theta * residual_sq) + oscillation;
}

double diffusion_term(const FemField& v, const FluxField& z, const Mat2& A)
{
    check_inputs(v, z);
    return sum(element_diffusion(v, z, A));
}

double residual_norm(const ProblemSpec& problem, const FemField& v, const FluxField& z, bool use_fhat, int degree)
{
    check_inputs(v, z);
    return std::sqrt(sum(element_residual_sq(problem, v, z, use_fhat, degree)));
}

Factors aubin_factors(double sigma)
{
    require_sigma(sigma);
    if (sigma == 0.0) {
        throw RangeError("aubin: undefined for sigma = 0");
    }
    return {1.0, 1.0 / sigma};
}

Factors repin_frolov_factors(double eps, double c_omega)
{
    require_positive(eps, "repin_frolov: eps");
    require_positive(c_omega, "repin_frolov: c_omega");
    // (1 + eps) D + c (1 + 1/eps) R^2 = (1 + eps) [D + (c / eps) R^2]
    return {1.0 + eps, c_omega / eps};
}

Factors churilova_factors(double sigma, double eps, double c_omega)
{
    require_sigma(sigma);
    require_positive(eps, "churilova: eps");
    require_positive(c_omega, "churilova: c_omega");
    const double coef = 1.0 / (sigma + eps / (c_omega * (1.0 + eps)));
    return {1.0 + eps, coef / (1.0 + eps)};
}

Factors theta_factors(double sigma, double sigma_star)
{
    require_sigma(sigma);
    require_positive(sigma_star, "theta_factors: sigma*");
    const double kappa = sigma / sigma_star;
    if (sigma <= sigma_star) {
        return {2.0 / (1.0 + kappa), 1.0 / sigma_star};
    }
    return {1.0, 1.0 / sigma};
}

Factors consistent_low_factors(double sigma, double sigma_star, double eps)
{
    require_sigma(sigma);
    require_positive(sigma_star, "consistent_osc_low: sigma*");
    require_positive(eps, "consistent_osc_low: eps");
    if (sigma > sigma_star * (1.0 + range_slack)) {
        throw RangeError("consistent_osc_low: sigma = " + fmt(sigma) + " exceeds sigma* = " + fmt(sigma_star) +
                         "; use consistent_osc_high");
    }
    const double kappa = sigma / sigma_star;
    const double Theta1 = sigma <= sigma_star / (1.0 + eps) ? (2.0 + eps) / (1.0 + kappa) : 1.0 + eps;
    return {Theta1, 1.0 / sigma_star};
}

Factors consistent_high_factors(double sigma, double sigma_star)
{
    require_sigma(sigma);
    require_positive(sigma_star, "consistent_osc_high: sigma*");
    if (sigma < sigma_star * (1.0 - range_slack)) {
        throw RangeError("consistent_osc_high: sigma = " + fmt(sigma) + " is below sigma* = " + fmt(sigma_star) +
                         "; use consistent_osc_low");
    }
    const double kappa = sigma / sigma_star;
    return {1.0 + 1.0 / (1.0 + 1.0 / kappa), 1.0 / sigma};
}

Factors fem1_factors(double sigma, double c_dagger, double h)
{
    require_sigma(sigma);
    require_positive(c_dagger, "fem_majorant_1: c_dagger");
    require_positive(h, "fem_majorant_1: h");
    const double ch2 = c_dagger * c_dagger * h * h;
    if (ch2 * sigma > 1.0 + range_slack) {
        throw RangeError("fem_majorant_1: sigma = " + fmt(sigma) + " exceeds the critical value 1/(c_dagger h)^2 = " +
                         fmt(1.0 / ch2) + "; use aubin");
    }
    return {2.0 / (1.0 + ch2 * sigma), ch2};
}

Factors fem1_osc_factors(double sigma, double c_dagger, double h, double eps)
{
    require_sigma(sigma);
    require_positive(c_dagger, "fem_majorant_1_osc: c_dagger");
    require_positive(h, "fem_majorant_1_osc: h");
    require_positive(eps, "fem_majorant_1_osc: eps");
    const double ch2 = c_dagger * c_dagger * h * h;
    if (ch2 * sigma * (1.0 + eps) > 1.0 + range_slack) {
        throw RangeError("fem_majorant_1_osc: sigma = " + fmt(sigma) + " exceeds sigma*/(1 + eps) = " +
                         fmt(1.0 / (ch2 * (1.0 + eps))));
    }
    return {(2.0 + eps) / (1.0 + ch2 * sigma), ch2};
}

Factors fem2_factors(double sigma, double c_sz, double c_tilde, double h)
{
    require_sigma(sigma);
    require_positive(c_sz, "fem_majorant_2: c_sz");
    require_positive(c_tilde, "fem_majorant_2: c_tilde");
    require_positive(h, "fem_majorant_2: h");
    const double ch2 = c_sz * c_sz * h * h;
    if (ch2 * sigma > 1.0 + range_slack) {
        throw RangeError("fem_majorant_2: sigma = " + fmt(sigma) + " exceeds 1/(c_sz h)^2 = " + fmt(1.0 / ch2) +
                         "; use aubin");
    }
    return {(1.0 + c_tilde * c_tilde) / (1.0 + ch2 * sigma), ch2};
}

MajorantReport aubin(const ProblemSpec& problem, const FemField& v, const FluxField& z, const EstimatorOptions& opt)
{
    const Factors f = aubin_factors(problem.sigma);
    return make_report("aubin", problem, v, f, evaluate(problem, v, z, false, opt.residual_degree));
}

MajorantReport repin_frolov(const ProblemSpec& problem, const FemField& v, const FluxField& z, double eps,
                            double c_omega, const EstimatorOptions& opt)
{
    require_laplace(problem, "repin_frolov");
    const Factors f = repin_frolov_factors(eps, c_omega);
    MajorantReport rep = make_report("repin_frolov", problem, v, f, evaluate(problem, v, z, false, opt.residual_degree));
    rep.constants["eps"] = eps;
    rep.constants["c_omega"] = c_omega;
    return rep;
}

MajorantReport repin_frolov_optimal(const ProblemSpec& problem, const FemField& v, const FluxField& z, double c_omega,
                                    const EstimatorOptions& opt)
{
    require_laplace(problem, "repin_frolov");
    require_positive(c_omega, "repin_frolov: c_omega");
    Parts parts = evaluate(problem, v, z, false, opt.residual_degree);
    Factors f{1.0, c_omega};
    double eps = 0.0;
    if (parts.D > 0.0 && parts.R2 > 0.0) {
        eps = std::sqrt(c_omega * parts.R2 / parts.D);
        f = repin_frolov_factors(eps, c_omega);
    } else if (parts.R2 == 0.0) {
        f = {1.0, 0.0};
    }
    MajorantReport rep = make_report("repin_frolov_opt", problem, v, f, std::move(parts));
    rep.constants["eps"] = eps;
    rep.constants["c_omega"] = c_omega;
    return rep;
}

MajorantReport churilova(const ProblemSpec& problem, const FemField& v, const FluxField& z, double eps, double c_omega,
                         const EstimatorOptions& opt)
{
    const Factors f = churilova_factors(problem.sigma, eps, c_omega);
    MajorantReport rep = make_report("churilova", problem, v, f, evaluate(problem, v, z, false, opt.residual_degree));
    rep.constants["eps"] = eps;
    rep.constants["c_omega"] = c_omega;
    return rep;
}

namespace {

// Horizontal (axis 0) or vertical (axis 1) line integrals of an elementwise
// integrand over a triangulation, from the boundary coordinate 0.
class LineIntegrator {
public:
    LineIntegrator(const Mesh& mesh, int axis) : mesh_(mesh), axis_(axis)
    {
        nbins_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(mesh.num_elements()))));
        bins_.resize(nbins_);
        for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
            double lo = 1e300;
            double hi = -1e300;
            for (std::size_t v : mesh.triangle(r)) {
                const double c = transverse(mesh.vertex(v));
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            for (std::size_t b = bin_of(lo); b <= bin_of(hi); ++b) {
                bins_[b].push_back(r);
            }
        }
        gauss_legendre_unit(4, gl_x_, gl_w_);
    }

    // int_0^end integrand(r, point) along the line at transverse coordinate c
    template <class Fn>
    double integrate(double c, double end, Fn&& integrand) const
    {
        double total = 0.0;
        for (std::size_t r : bins_[bin_of(c)]) {
            double lo = 0.0;
            double hi = 0.0;
            if (!segment(r, c, lo, hi)) {
                continue;
            }
            hi = std::min(hi, end);
            lo = std::max(lo, 0.0);
            if (hi <= lo) {
                continue;
            }
            for (std::size_t q = 0; q < gl_x_.size(); ++q) {
                const double s = lo + (hi - lo) * gl_x_[q];
                const Point p = axis_ == 0 ? Point{s, c} : Point{c, s};
                total += (hi - lo) * gl_w_[q] * integrand(r, p);
            }
        }
        return total;
    }

    [[nodiscard]] double along(const Point& p) const { return axis_ == 0 ? p.x : p.y; }
    [[nodiscard]] double transverse(const Point& p) const { return axis_ == 0 ? p.y : p.x; }

private:
    std::size_t bin_of(double c) const
    {
        const double t = std::clamp(c, 0.0, 1.0) * static_cast<double>(nbins_);
        return std::min(nbins_ - 1, static_cast<std::size_t>(t));
    }

    // Intersection of the line {transverse = c} with triangle r as an
    // interval of the along coordinate. A line running along an edge is
    // attributed to the triangle on the positive side only.
    bool segment(std::size_t r, double c, double& lo, double& hi) const
    {
        const Triangle& t = mesh_.triangle(r);
        std::array<Point, 3> p{mesh_.vertex(t[0]), mesh_.vertex(t[1]), mesh_.vertex(t[2])};
        int on_line = 0;
        double above = 0.0;
        for (const Point& q : p) {
            if (transverse(q) == c) {
                ++on_line;
            } else {
                above = transverse(q) - c;
            }
        }
        if (on_line == 2 && above < 0.0) {
            return false;
        }
        lo = 1e300;
        hi = -1e300;
        int hits = 0;
        for (int k = 0; k < 3; ++k) {
            const Point& a = p[k];
            const Point& b = p[(k + 1) % 3];
            const double ta = transverse(a) - c;
            const double tb = transverse(b) - c;
            if (ta * tb > 0.0) {
                continue;
            }
            double s;
            if (ta == tb) {
                lo = std::min({lo, along(a), along(b)});
                hi = std::max({hi, along(a), along(b)});
                ++hits;
                continue;
            }
            s = along(a) + (along(b) - along(a)) * (ta / (ta - tb));
            lo = std::min(lo, s);
            hi = std::max(hi, s);
            ++hits;
        }
        return hits > 0 && hi > lo;
    }

    const Mesh& mesh_;
    int axis_;
    std::size_t nbins_ = 1;
    std::vector<std::vector<std::size_t>> bins_;
    std::vector<double> gl_x_;
    std::vector<double> gl_w_;
};

} // namespace

MajorantReport boxed_integral(const ProblemSpec& problem, const FemField& v, const FluxField& z, const WeightFn& beta1,
                              const EstimatorOptions& opt)
{
    require_laplace(problem, "boxed_integral");
    check_inputs(v, z);
    const Mesh& mesh = v.mesh();
    require_unit_square(mesh);
    const WeightFn b1 = beta1 ? beta1 : WeightFn([](const Point&) { return 0.5; });

    std::vector<double> divz(mesh.num_elements());
    for (std::size_t r = 0; r < divz.size(); ++r) {
        divz[r] = z.divergence(r);
    }
    const QuadRule& rule = triangle_rule(opt.residual_degree);
    std::array<double, 2> w2{0.0, 0.0};
    for (int axis = 0; axis < 2; ++axis) {
        const LineIntegrator li(mesh, axis);
        const auto integrand = [&](std::size_t r, const Point& p) {
            const double beta = axis == 0 ? b1(p) : 1.0 - b1(p);
            return beta * (problem.f(p) - divz[r]);
        };
        for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
            for_each_qp(mesh, r, rule, [&](const Point& x, const Bary&, double w) {
                const double val = li.integrate(li.transverse(x), li.along(x), integrand);
                w2[axis] += w * val * val;
            });
        }
    }
    Parts parts;
    parts.diffusion = element_diffusion(v, z, problem.A);
    parts.D = sum(parts.diffusion);
    const double d = std::sqrt(parts.D);
    const double b = std::sqrt(w2[0]) + std::sqrt(w2[1]);
    parts.R2 = b * b;
    // (d + b)^2 = (1 + b/d) [d^2 + (d/b) b^2]
    Factors f{1.0, 1.0};
    if (d > 0.0 && b > 0.0) {
        f = {1.0 + b / d, d / b};
    } else if (b == 0.0) {
        f = {1.0, 0.0};
    }
    MajorantReport rep = make_report("boxed_integral", problem, v, f, std::move(parts));
    rep.element_residual_sq.clear();
    rep.total = (d + b) * (d + b);
    rep.constants["value"] = d + b;
    rep.constants["term_x"] = std::sqrt(w2[0]);
    rep.constants["term_y"] = std::sqrt(w2[1]);
    return rep;
}

MajorantReport consistent_majorant(const ProblemSpec& problem, const FemField& v, const FluxField& z, double sigma_star,
                                   const EstimatorOptions& opt)
{
    const Factors f = theta_factors(problem.sigma, sigma_star);
    MajorantReport rep = make_report("consistent", problem, v, f, evaluate(problem, v, z, false, opt.residual_degree));
    rep.sigma_star = sigma_star;
    return rep;
}

MajorantReport consistent_osc_low(const ProblemSpec& problem, const FemField& v, const FluxField& z, double sigma_star,
                                  double eps, const EstimatorOptions& opt)
{
    const Factors f = consistent_low_factors(problem.sigma, sigma_star, eps);
    const auto& hr = v.mesh().element_diameters();
    std::vector<double> osc = weighted_oscillation(problem, v, opt.residual_degree,
                                                   [&](std::size_t r) { return hr[r] * hr[r] / (eps * pi * pi); });
    MajorantReport rep = make_report("consistent_osc_low", problem, v, f,
                                     evaluate(problem, v, z, true, opt.residual_degree), std::move(osc));
    rep.sigma_star = sigma_star;
    rep.constants["eps"] = eps;
    return rep;
}

MajorantReport consistent_osc_high(const ProblemSpec& problem, const FemField& v, const FluxField& z, double sigma_star,
                                   const EstimatorOptions& opt)
{
    const Factors f = consistent_high_factors(problem.sigma, sigma_star);
    const double inv_sigma = 1.0 / problem.sigma;
    std::vector<double> osc =
        weighted_oscillation(problem, v, opt.residual_degree, [&](std::size_t) { return inv_sigma; });
    MajorantReport rep = make_report("consistent_osc_high", problem, v, f,
                                     evaluate(problem, v, z, true, opt.residual_degree), std::move(osc));
    rep.sigma_star = sigma_star;
    return rep;
}

MajorantReport fem_majorant_1(const ProblemSpec& problem, const FemField& u, const FluxField& z, double c_dagger,
                              const EstimatorOptions& opt)
{
    const double h = u.mesh().h();
    const Factors f = fem1_factors(problem.sigma, c_dagger, h);
    MajorantReport rep = make_report("fem1", problem, u, f, evaluate(problem, u, z, false, opt.residual_degree));
    rep.sigma_star = critical_sigma(c_dagger, h);
    rep.constants["c_dagger"] = c_dagger;
    return rep;
}

MajorantReport fem_majorant_1_osc(const ProblemSpec& problem, const FemField& u, const FluxField& z, double c_dagger,
                                  double eps, const EstimatorOptions& opt)
{
    const double h = u.mesh().h();
    const Factors f = fem1_osc_factors(problem.sigma, c_dagger, h, eps);
    const auto& hr = u.mesh().element_diameters();
    std::vector<double> osc = weighted_oscillation(problem, u, opt.residual_degree,
                                                   [&](std::size_t r) { return hr[r] * hr[r] / (eps * pi * pi); });
    MajorantReport rep = make_report("fem1_osc", problem, u, f, evaluate(problem, u, z, true, opt.residual_degree),
                                     std::move(osc));
    rep.sigma_star = critical_sigma(c_dagger, h);
    rep.constants["c_dagger"] = c_dagger;
    rep.constants["eps"] = eps;
    return rep;
}

MajorantReport fem_majorant_2(const ProblemSpec& problem, const FemField& u, const FluxField& z, double c_sz,
                              double c_tilde, const EstimatorOptions& opt)
{
    const double h = u.mesh().h();
    const Factors f = fem2_factors(problem.sigma, c_sz, c_tilde, h);
    MajorantReport rep = make_report("fem2", problem, u, f, evaluate(problem, u, z, false, opt.residual_degree));
    rep.sigma_star = critical_sigma(c_sz, h);
    rep.constants["c_sz"] = c_sz;
    rep.constants["c_tilde"] = c_tilde;
    return rep;
}

AiveResult aive_indicator(const ProblemSpec& problem, const FemField& u, const FluxField& z,
                          const EstimatorOptions& opt)
{
    check_inputs(u, z);
    require_sigma(problem.sigma);
    const Mesh& mesh = u.mesh();
    const std::size_t ne = mesh.num_elements();
    const auto& hr = mesh.element_diameters();
    const double sigma = problem.sigma;
    const double sq = std::sqrt(sigma);

    const std::vector<double> flux = element_diffusion(u, z, problem.A);
    const std::vector<double> res = element_residual_sq(problem, u, z, true, opt.residual_degree);
    const ElementwiseP1 fhat = elementwise_p1_projection(u.mesh_ptr(), problem.f, opt.residual_degree);
    const std::vector<double> osc_sq = oscillation_sq(fhat, problem.f, opt.residual_degree);

    AiveResult out;
    out.element_eta_sq.resize(ne);
    out.flux_only.resize(ne);
    out.element_osc.resize(ne);
    std::vector<double> res_part(ne, 0.0);
    std::vector<double> cross(ne, 0.0);
    for (std::size_t r = 0; r < ne; ++r) {
        out.flux_only[r] = sq * hr[r] < 1.0;
        double eta2 = flux[r];
        if (!out.flux_only[r]) {
            res_part[r] = res[r];
            eta2 += res[r] / sigma;
        }
        out.element_eta_sq[r] = eta2;
        const double weight = sigma > 0.0 ? std::min(hr[r] / pi, 1.0 / sq) : hr[r] / pi;
        out.element_osc[r] = weight * std::sqrt(osc_sq[r]);
        const double eta = std::sqrt(eta2);
        out.eta_sq += eta2;
        out.osc_sq += out.element_osc[r] * out.element_osc[r];
        out.bound += (eta + out.element_osc[r]) * (eta + out.element_osc[r]);
        cross[r] = 2.0 * eta * out.element_osc[r] + out.element_osc[r] * out.element_osc[r];
    }

    Parts parts;
    parts.diffusion = flux;
    parts.residual_sq = res_part;
    parts.D = sum(flux);
    parts.R2 = sum(res_part);
    const Factors f{1.0, sigma > 0.0 ? 1.0 / sigma : 0.0};
    out.report = make_report("aive", problem, u, f, std::move(parts), std::move(cross));
    out.report.total = out.bound;
    return out;
}

double effectivity(const MajorantReport& report, double true_energy)
{
    if (!(true_energy > 0.0)) {
        throw std::invalid_argument("effectivity: the true error is zero");
    }
    return std::sqrt(report.total) / true_energy;
}

double minimize_over_eps(const std::function<double(double)>& fn, double lo, double hi, double tol)
{
    require_positive(lo, "minimize_over_eps: lower bound");
    if (!(hi > lo)) {
        throw std::invalid_argument("minimize_over_eps: empty interval");
    }
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo);
    double b = std::log(hi);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = fn(std::exp(c));
    double fd = fn(std::exp(d));
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = fn(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = fn(std::exp(d));
        }
    }
    return std::exp(0.5 * (a + b));
}

void write_report_csv_header(std::ostream& out)
{
    out << "estimator,sigma,sigma_star,h,total,diffusion,residual_mult,residual_sq,oscillation,effectivity\n";
}

void write_report_csv_row(const MajorantReport& r, double effectivity_value, std::ostream& out)
{
    std::ostringstream s;
    s << std::setprecision(12);
    s << r.estimator << ',' << r.sigma << ',';
    if (!std::isnan(r.sigma_star)) {
        s << r.sigma_star;
    }
    s << ',' << r.h << ',' << r.total << ',' << r.diffusion << ',' << r.residual_mult << ',' << r.residual_sq << ','
      << r.oscillation << ',';
    if (!std::isnan(effectivity_value)) {
        s << effectivity_value;
    }
    out << s.str() << '\n';
}

} // namespace rdlab
