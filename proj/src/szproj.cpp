#include "rdlab/szproj.hpp"

#include "rdlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rdlab {

DualEdgeFunction dual_edge_function(double length)
{
    if (!(length > 0.0)) {
        throw std::invalid_argument("dual_edge_function: edge length must be positive");
    }
    // Gram system [[L/3, L/6], [L/6, L/3]] (a, b) = (1, 0)
    const double g11 = length / 3.0;
    const double g12 = length / 6.0;
    const double det = g11 * g11 - g12 * g12;
    return {g11 / det, -g12 / det};
}

FaceAssignment assign_faces(const Mesh& mesh)
{
    std::vector<Edge> bnd;
    bnd.reserve(mesh.boundary_edges().size());
    for (const Edge& e : mesh.boundary_edges()) {
        bnd.push_back({std::min(e[0], e[1]), std::max(e[0], e[1])});
    }
    std::sort(bnd.begin(), bnd.end());

    FaceAssignment fa;
    fa.far.resize(mesh.num_vertices());
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        const auto nbrs = mesh.neighbours_of_vertex(i);
        bool found = false;
        for (std::size_t j : nbrs) {
            if (mesh.is_boundary_vertex(i)) {
                const Edge e{std::min(i, j), std::max(i, j)};
                if (!std::binary_search(bnd.begin(), bnd.end(), e)) {
                    continue;
                }
            }
            fa.far[i] = j;
            found = true;
            break;
        }
        if (!found) {
            throw std::invalid_argument("assign_faces: vertex " + std::to_string(i) + " has no admissible edge");
        }
    }
    return fa;
}

namespace {

template <class Trace>
FemField scott_zhang_core(const MeshPtr& mesh, const FaceAssignment& faces, Trace&& trace, int edge_degree)
{
    if (faces.far.size() != mesh->num_vertices()) {
        throw std::invalid_argument("scott_zhang: face assignment does not match the mesh");
    }
    const QuadRule& rule = edge_rule(edge_degree);
    std::vector<double> c(mesh->num_vertices());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const std::size_t j = faces.far[i];
        const double len = norm(mesh->vertex(j) - mesh->vertex(i));
        const DualEdgeFunction th = dual_edge_function(len);
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = rule.points[q][1];
            const double v = trace(i, j, t);
            if (!std::isfinite(v)) {
                throw std::runtime_error("scott_zhang: non-finite trace value on edge (" + std::to_string(i) + ", " +
                                         std::to_string(j) + ")");
            }
            s += rule.weights[q] * (th.a * (1.0 - t) + th.b * t) * v;
        }
        c[i] = len * s;
    }
    return FemField(mesh, std::move(c));
}

} // namespace

FemField scott_zhang(const MeshPtr& mesh, const FaceAssignment& faces, const EdgeTraceFn& trace, int edge_degree)
{
    return scott_zhang_core(
        mesh, faces,
        [&](std::size_t i, std::size_t j, double t) { return trace(mesh->vertex(i), mesh->vertex(j), t); },
        edge_degree);
}

FemField scott_zhang(const MeshPtr& mesh, const FaceAssignment& faces, const ScalarFn& v, int edge_degree)
{
    return scott_zhang_core(
        mesh, faces,
        [&](std::size_t i, std::size_t j, double t) {
            const Point& a = mesh->vertex(i);
            const Point& b = mesh->vertex(j);
            return v(Point{(1.0 - t) * a.x + t * b.x, (1.0 - t) * a.y + t * b.y});
        },
        edge_degree);
}

FemField scott_zhang(const FemField& v, const FaceAssignment& faces)
{
    const auto& c = v.coefficients();
    return scott_zhang_core(
        v.mesh_ptr(), faces, [&](std::size_t i, std::size_t j, double t) { return (1.0 - t) * c[i] + t * c[j]; }, 2);
}

FemField l2_project_scalar(const MeshPtr& mesh, const ScalarFn& v, Subspace space, int degree, double rel_tol)
{
    const SparseMatrix mass = assemble_mass(*mesh);
    const std::vector<double> b = assemble_load(*mesh, v, triangle_rule(degree));
    if (space == Subspace::Full) {
        return FemField(mesh, solve_cg(mass, b, rel_tol).x);
    }
    const ReducedSystem red = apply_homogeneous_dirichlet(mass, b, *mesh);
    return FemField(mesh, red.extend(solve_cg(red.matrix, red.rhs, rel_tol).x, mesh->num_vertices()), true);
}

double l2_projection_residual(const FemField& qv, const ScalarFn& v, Subspace space, int degree)
{
    const Mesh& mesh = qv.mesh();
    const std::vector<double> mq = assemble_mass(mesh).multiply(qv.coefficients());
    const std::vector<double> b = assemble_load(mesh, v, triangle_rule(degree));
    double worst = 0.0;
    for (std::size_t i = 0; i < mq.size(); ++i) {
        if (space == Subspace::ZeroTrace && mesh.is_boundary_vertex(i)) {
            continue;
        }
        worst = std::max(worst, std::abs(mq[i] - b[i]));
    }
    return worst;
}

ElementwiseP1 elementwise_p1_projection(const MeshPtr& mesh, const ScalarFn& f, int degree)
{
    const QuadRule& rule = triangle_rule(degree);
    ElementwiseP1 out;
    out.mesh = mesh;
    out.coefficients.resize(mesh->num_elements());
    for (std::size_t r = 0; r < mesh->num_elements(); ++r) {
        std::array<double, 3> m{};
        for_each_qp(*mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const double fx = w * f(x);
            for (int i = 0; i < 3; ++i) {
                m[i] += fx * l[i];
            }
        });
        // local mass inverse: (3 / area) [[3, -1, -1], [-1, 3, -1], [-1, -1, 3]]
        const double s = 3.0 / mesh->area(r);
        const double sum = m[0] + m[1] + m[2];
        for (int i = 0; i < 3; ++i) {
            out.coefficients[r][i] = s * (4.0 * m[i] - sum);
        }
    }
    return out;
}

std::vector<double> oscillation_sq(const ElementwiseP1& fhat, const ScalarFn& f, int degree)
{
    const Mesh& mesh = *fhat.mesh;
    const QuadRule& rule = triangle_rule(degree);
    std::vector<double> osc(mesh.num_elements(), 0.0);
    for (std::size_t r = 0; r < osc.size(); ++r) {
        for_each_qp(mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
            const double d = f(x) - fhat.value(r, l);
            osc[r] += w * d * d;
        });
    }
    return osc;
}

std::vector<SampleFunction> default_samples()
{
    constexpr double pi = std::numbers::pi;
    std::vector<SampleFunction> out;
    for (int k = 1; k <= 3; ++k) {
        for (int l = 1; l <= 3; ++l) {
            SampleFunction s;
            s.name = "sin" + std::to_string(k) + std::to_string(l);
            const double kp = k * pi;
            const double lp = l * pi;
            s.value = [kp, lp](const Point& x) { return std::sin(kp * x.x) * std::sin(lp * x.y); };
            s.gradient = [kp, lp](const Point& x) {
                return Vec2{kp * std::cos(kp * x.x) * std::sin(lp * x.y), lp * std::sin(kp * x.x) * std::cos(lp * x.y)};
            };
            s.h1_semi_sq = (kp * kp + lp * lp) / 4.0;
            out.push_back(std::move(s));
        }
    }
    SampleFunction b1;
    b1.name = "bubble";
    b1.value = [](const Point& x) { return x.x * (1 - x.x) * x.y * (1 - x.y); };
    b1.gradient = [](const Point& x) {
        return Vec2{(1 - 2 * x.x) * x.y * (1 - x.y), x.x * (1 - x.x) * (1 - 2 * x.y)};
    };
    b1.h1_semi_sq = 1.0 / 45.0;
    out.push_back(std::move(b1));
    SampleFunction b2;
    b2.name = "skewbubble";
    b2.value = [](const Point& x) { return x.x * x.x * (1 - x.x) * x.y * (1 - x.y); };
    b2.gradient = [](const Point& x) {
        return Vec2{(2 * x.x - 3 * x.x * x.x) * x.y * (1 - x.y), x.x * x.x * (1 - x.x) * (1 - 2 * x.y)};
    };
    b2.h1_semi_sq = 4.0 / 525.0;
    out.push_back(std::move(b2));
    return out;
}

double inverse_inequality_constant(const Mesh& mesh, std::size_t iterations)
{
    const SparseMatrix k = assemble_stiffness(mesh, Mat2::identity());
    const SparseMatrix m = assemble_mass(mesh);
    const std::size_t n = mesh.num_vertices();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = 1.0 + std::cos(2.3 * static_cast<double>(i)) + ((i % 2) ? 0.5 : -0.5);
    }
    const auto inner = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            s += a[i] * b[i];
        }
        return s;
    };
    double lambda = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        const std::vector<double> kx = k.multiply(x);
        x = solve_cg(m, kx, 1e-12).x;
        const double nx = std::sqrt(inner(x, x));
        for (double& v : x) {
            v /= nx;
        }
        lambda = inner(x, k.multiply(x)) / inner(x, m.multiply(x));
    }
    return mesh.h() * std::sqrt(lambda);
}

namespace {

void push_row(CalibrationReport& rep, std::size_t level, double h, double ratio, const std::string& sample)
{
    rep.supremum = std::max(rep.supremum, ratio);
    rep.rows.push_back({rep.constant, level, h, ratio, rep.supremum, sample});
}

} // namespace

SzConstants calibrate_csz(const std::vector<MeshPtr>& meshes, const std::vector<SampleFunction>& samples,
                          double safety_factor)
{
    if (meshes.size() < 2) {
        throw std::invalid_argument("calibrate_csz: needs at least two mesh levels");
    }
    SzConstants out;
    out.c_sz.constant = "c_sz";
    out.c_breve.constant = "c_breve";
    out.c_10.constant = "c_10";
    for (CalibrationReport* r : {&out.c_sz, &out.c_breve, &out.c_10}) {
        r->safety_factor = safety_factor;
    }
    for (const SampleFunction& s : samples) {
        out.c_sz.samples.push_back(s.name);
        out.c_breve.samples.push_back(s.name);
    }
    out.c_10.samples.push_back("P1 Rayleigh");
    const QuadRule& rule = triangle_rule(6);
    for (const MeshPtr& mesh : meshes) {
        const FaceAssignment faces = assign_faces(*mesh);
        const std::size_t level = mesh_level(*mesh);
        const double h = mesh->h();
        for (const SampleFunction& s : samples) {
            const FemField iv = scott_zhang(mesh, faces, s.value);
            double l2 = 0.0;
            double h1 = 0.0;
            for (std::size_t r = 0; r < mesh->num_elements(); ++r) {
                const Vec2 g = iv.gradient(r);
                h1 += mesh->area(r) * dot(g, g);
                for_each_qp(*mesh, r, rule, [&](const Point& x, const Bary& l, double w) {
                    const double d = s.value(x) - iv.value(r, l);
                    l2 += w * d * d;
                });
            }
            const double v1 = std::sqrt(s.h1_semi_sq);
            push_row(out.c_sz, level, h, std::sqrt(l2) / (h * v1), s.name);
            push_row(out.c_breve, level, h, std::sqrt(h1) / v1, s.name);
        }
        push_row(out.c_10, level, h, inverse_inequality_constant(*mesh), "P1 Rayleigh");
    }
    out.c_tilde = out.c_breve.value() + 2.0 * out.c_10.value() * out.c_sz.value();
    return out;
}

CalibrationReport calibrate_cdagger(const std::vector<ProblemSpec>& problems,
                                    const std::vector<std::function<double(double)>>& sigma_of_h,
                                    const std::vector<MeshPtr>& meshes, double safety_factor)
{
    if (meshes.size() < 2) {
        throw std::invalid_argument("calibrate_cdagger: needs at least two mesh levels");
    }
    CalibrationReport rep;
    rep.constant = "c_dagger";
    rep.safety_factor = safety_factor;
    for (const MeshPtr& mesh : meshes) {
        const double h = mesh->h();
        for (const ProblemSpec& base : problems) {
            for (const auto& sig : sigma_of_h) {
                const ProblemSpec p = base.with_sigma(sig(h));
                const ErrorNorms e = error_norms(solve_reaction_diffusion(p, mesh), p);
                if (!(e.a_norm > 0.0)) {
                    throw std::invalid_argument("calibrate_cdagger: zero energy error for problem '" + p.name +
                                                "'; its solution lies in the finite element space");
                }
                std::ostringstream tag;
                tag << p.name << "@sigma=" << p.sigma;
                push_row(rep, mesh_level(*mesh), h, e.l2 / (h * e.a_norm), tag.str());
                if (mesh == meshes.front()) {
                    rep.samples.push_back(tag.str());
                }
                if (mesh == meshes.front() && &base == &problems.front()) {
                    rep.sigmas.push_back(p.sigma);
                }
            }
        }
    }
    return rep;
}

double critical_sigma(double c, double h)
{
    if (!(c > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("critical_sigma: constant and mesh size must be positive");
    }
    return 1.0 / (c * h * c * h);
}

void write_calibration_csv(const std::vector<CalibrationReport>& reports, std::ostream& out)
{
    out << "constant,level,h,ratio,supremum\n";
    out << std::setprecision(12);
    for (const CalibrationReport& rep : reports) {
        for (const CalibrationRow& row : rep.rows) {
            out << row.constant << ',' << row.level << ',' << row.h << ',' << row.ratio << ',' << row.supremum << '\n';
        }
    }
}

} // namespace rdlab
