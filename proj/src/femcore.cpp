#include "rdlab/femcore.hpp"

#include <cmath>
#include <stdexcept>

namespace rdlab {

FemField::FemField(MeshPtr mesh, std::vector<double> coefficients, bool zero_trace)
    : mesh_(std::move(mesh)), coefficients_(std::move(coefficients)), zero_trace_(zero_trace)
{
    if (!mesh_) {
        throw std::invalid_argument("FemField: null mesh");
    }
    if (coefficients_.size() != mesh_->num_vertices()) {
        throw std::invalid_argument("FemField: coefficient count does not match vertex count");
    }
    if (zero_trace_) {
        for (std::size_t v : mesh_->boundary_vertices()) {
            if (coefficients_[v] != 0.0) {
                throw std::invalid_argument("FemField: zero_trace field has a nonzero boundary coefficient at vertex " +
                                            std::to_string(v));
            }
        }
    }
}

double FemField::value(std::size_t r, const Bary& lambda) const
{
    const Triangle& t = mesh_->triangle(r);
    return lambda[0] * coefficients_[t[0]] + lambda[1] * coefficients_[t[1]] + lambda[2] * coefficients_[t[2]];
}

Vec2 FemField::gradient(std::size_t r) const
{
    const Triangle& t = mesh_->triangle(r);
    const auto& g = mesh_->grad_lambda(r);
    return coefficients_[t[0]] * g[0] + coefficients_[t[1]] * g[1] + coefficients_[t[2]] * g[2];
}

FemField interpolate(const MeshPtr& mesh, const ScalarFn& v, bool zero_trace)
{
    std::vector<double> c(mesh->num_vertices());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = (zero_trace && mesh->is_boundary_vertex(i)) ? 0.0 : v(mesh->vertex(i));
    }
    return FemField(mesh, std::move(c), zero_trace);
}

LocalMatrix local_stiffness(const ElementGeometry& g, const Mat2& A)
{
    LocalMatrix k{};
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            k[i][j] = g.area * dot(g.grad_lambda[i], A * g.grad_lambda[j]);
            k[j][i] = k[i][j];
        }
    }
    return k;
}

LocalMatrix local_mass(double area)
{
    LocalMatrix m{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
        }
    }
    return m;
}

namespace {

template <class LocalFn>
SparseMatrix assemble(const Mesh& mesh, LocalFn&& local)
{
    std::vector<Triplet> trip;
    trip.reserve(9 * mesh.num_elements());
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        const LocalMatrix m = local(r);
        const Triangle& t = mesh.triangle(r);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                trip.push_back({t[i], t[j], m[i][j]});
            }
        }
    }
    return SparseMatrix(mesh.num_vertices(), mesh.num_vertices(), std::move(trip), true);
}

} // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const Mat2& A)
{
    return assemble(mesh, [&](std::size_t r) {
        ElementGeometry g;
        g.area = mesh.area(r);
        g.grad_lambda = mesh.grad_lambda(r);
        return local_stiffness(g, A);
    });
}

SparseMatrix assemble_mass(const Mesh& mesh)
{
    return assemble(mesh, [&](std::size_t r) { return local_mass(mesh.area(r)); });
}

std::vector<double> assemble_load(const Mesh& mesh, const ScalarFn& f, const QuadRule& rule)
{
    std::vector<double> b(mesh.num_vertices(), 0.0);
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        const Triangle& t = mesh.triangle(r);
        for_each_qp(mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const double fx = f(x) * w;
            for (int i = 0; i < 3; ++i) {
                b[t[i]] += fx * l[i];
            }
        });
    }
    return b;
}

std::vector<double> ReducedSystem::extend(std::span<const double> reduced, std::size_t num_vertices) const
{
    if (reduced.size() != dofs.size()) {
        throw std::invalid_argument("ReducedSystem::extend: size mismatch");
    }
    std::vector<double> full(num_vertices, 0.0);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        full[dofs[k]] = reduced[k];
    }
    return full;
}

ReducedSystem apply_homogeneous_dirichlet(const SparseMatrix& system, std::span<const double> rhs, const Mesh& mesh)
{
    if (system.rows() != mesh.num_vertices() || rhs.size() != mesh.num_vertices()) {
        throw std::invalid_argument("apply_homogeneous_dirichlet: system does not match mesh");
    }
    const auto& interior = mesh.interior_vertices();
    if (interior.empty()) {
        throw std::invalid_argument("apply_homogeneous_dirichlet: mesh has no interior vertex");
    }
    ReducedSystem out;
    out.dofs = interior;
    out.matrix = system.restrict_to(interior);
    out.rhs.reserve(interior.size());
    for (std::size_t v : interior) {
        out.rhs.push_back(rhs[v]);
    }
    return out;
}

namespace {

SparseMatrix operator_matrix(const ProblemSpec& problem, const Mesh& mesh)
{
    SparseMatrix k = assemble_stiffness(mesh, problem.A);
    if (problem.sigma != 0.0) {
        k = SparseMatrix::add(k, assemble_mass(mesh), problem.sigma);
    }
    return k;
}

} // namespace

FemField solve_reaction_diffusion(const ProblemSpec& problem, const MeshPtr& mesh, const SolveOptions& options)
{
    problem.validate();
    const SparseMatrix k = operator_matrix(problem, *mesh);
    const std::vector<double> b = assemble_load(*mesh, problem.f, triangle_rule(options.load_degree));
    const ReducedSystem red = apply_homogeneous_dirichlet(k, b, *mesh);
    const CgResult cg = solve_cg(red.matrix, red.rhs, options.rel_tol, options.max_iter);
    return FemField(mesh, red.extend(cg.x, mesh->num_vertices()), true);
}

double galerkin_residual(const ProblemSpec& problem, const FemField& u, int load_degree)
{
    const Mesh& mesh = u.mesh();
    const SparseMatrix k = operator_matrix(problem, mesh);
    const std::vector<double> b = assemble_load(mesh, problem.f, triangle_rule(load_degree));
    const std::vector<double> ku = k.multiply(u.coefficients());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t v : mesh.interior_vertices()) {
        num += (ku[v] - b[v]) * (ku[v] - b[v]);
        den += b[v] * b[v];
    }
    if (den == 0.0) {
        return std::sqrt(num);
    }
    return std::sqrt(num / den);
}

std::vector<Vec2> broken_gradient(const FemField& field)
{
    std::vector<Vec2> g(field.mesh().num_elements());
    for (std::size_t r = 0; r < g.size(); ++r) {
        g[r] = field.gradient(r);
    }
    return g;
}

double norm_L2(const Mesh& mesh, const ElementScalarFn& e, const QuadRule& rule)
{
    double sum = 0.0;
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        for_each_qp(mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const double v = e(r, x, l);
            sum += w * v * v;
        });
    }
    return std::sqrt(sum);
}

double seminorm_H1(const Mesh& mesh, const ElementVectorFn& grad_e, const QuadRule& rule)
{
    double sum = 0.0;
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        for_each_qp(mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const Vec2 g = grad_e(r, x, l);
            sum += w * dot(g, g);
        });
    }
    return std::sqrt(sum);
}

double energy_norm(const Mesh& mesh, const ElementVectorFn& grad_e, const ElementScalarFn& e, const ProblemSpec& problem,
                   const QuadRule& rule)
{
    double sum = 0.0;
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        for_each_qp(mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const Vec2 g = grad_e(r, x, l);
            double v = dot(g, problem.A * g);
            if (problem.sigma != 0.0) {
                const double ev = e(r, x, l);
                v += problem.sigma * ev * ev;
            }
            sum += w * v;
        });
    }
    return std::sqrt(sum);
}

ErrorNorms error_norms(const FemField& uh, const ProblemSpec& problem, int degree)
{
    if (!problem.exact) {
        throw std::invalid_argument("error_norms: problem '" + problem.name + "' has no exact solution");
    }
    const ExactSolution& ex = *problem.exact;
    const Mesh& mesh = uh.mesh();
    const QuadRule& rule = triangle_rule(degree);
    double l2 = 0.0;
    double h1 = 0.0;
    double a = 0.0;
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        const Vec2 gh = uh.gradient(r);
        for_each_qp(mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const double e = uh.value(r, l) - ex.value(x);
            const Vec2 g = gh - ex.gradient(x);
            l2 += w * e * e;
            h1 += w * dot(g, g);
            a += w * dot(g, problem.A * g);
        });
    }
    ErrorNorms n;
    n.l2 = std::sqrt(l2);
    n.h1_semi = std::sqrt(h1);
    n.a_norm = std::sqrt(a);
    n.energy = std::sqrt(a + problem.sigma * l2);
    return n;
}

std::vector<AprioriLevel> a_priori_report(const ProblemSpec& problem, const std::vector<MeshPtr>& meshes,
                                          const std::function<double(double)>& sigma_of_h)
{
    if (!problem.exact) {
        throw std::invalid_argument("a_priori_report: problem '" + problem.name + "' has no exact solution");
    }
    std::vector<AprioriLevel> out;
    for (const MeshPtr& mesh : meshes) {
        AprioriLevel lv;
        lv.num_elements = mesh->num_elements();
        lv.h = mesh->h();
        const ProblemSpec p = sigma_of_h ? problem.with_sigma(sigma_of_h(lv.h)) : problem;
        lv.sigma = p.sigma;
        lv.errors = error_norms(solve_reaction_diffusion(p, mesh), p);
        if (!out.empty()) {
            const AprioriLevel& prev = out.back();
            const double lh = std::log(prev.h / lv.h);
            const auto rate = [lh](double a, double b) -> std::optional<double> {
                if (a <= 0.0 || b <= 0.0) {
                    return std::nullopt;
                }
                return std::log(a / b) / lh;
            };
            lv.rate_l2 = rate(prev.errors.l2, lv.errors.l2);
            lv.rate_h1 = rate(prev.errors.h1_semi, lv.errors.h1_semi);
            lv.rate_a = rate(prev.errors.a_norm, lv.errors.a_norm);
            lv.rate_energy = rate(prev.errors.energy, lv.errors.energy);
        }
        out.push_back(lv);
    }
    return out;
}

} // namespace rdlab
