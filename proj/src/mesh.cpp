#include "rdlab/mesh.hpp"

#include "rdlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>

namespace rdlab {

namespace {

std::string tri_name(std::size_t r) { return "triangle " + std::to_string(r); }

struct HalfEdge {
    std::size_t lo;
    std::size_t hi;
    std::size_t element;
    bool forward; // stored as lo -> hi in the element
};

} // namespace

ElementGeometry triangle_geometry(const Point& p0, const Point& p1, const Point& p2)
{
    const Vec2 e1 = p1 - p0;
    const Vec2 e2 = p2 - p0;
    const double det = cross(e1, e2);
    const double l01 = norm(p1 - p0);
    const double l12 = norm(p2 - p1);
    const double l20 = norm(p0 - p2);
    const double scale = std::max({l01, l12, l20});
    if (std::abs(det) <= 1e-14 * scale * scale) {
        throw MeshError(MeshError::Kind::Degenerate, "triangle has zero area");
    }
    if (det < 0.0) {
        throw MeshError(MeshError::Kind::Orientation, "triangle is clockwise (negative signed area)");
    }
    ElementGeometry g;
    g.area = 0.5 * det;
    g.diameter = scale;
    g.inradius = 2.0 * g.area / (l01 + l12 + l20);
    // grad lambda_1 and lambda_2 are the rows of the inverse Jacobian.
    const Vec2 g1{e2.y / det, -e2.x / det};
    const Vec2 g2{-e1.y / det, e1.x / det};
    g.grad_lambda = {-(g1 + g2), g1, g2};
    return g;
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<bool> boundary_flags)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_flags_(std::move(boundary_flags))
{
    audit_and_build();
}

void Mesh::audit_and_build()
{
    const std::size_t nv = vertices_.size();
    if (nv == 0 || triangles_.empty()) {
        throw MeshError(MeshError::Kind::Malformed, "mesh has no vertices or no triangles");
    }
    if (boundary_flags_.size() != nv) {
        throw MeshError(MeshError::Kind::Malformed, "boundary flag count does not match vertex count");
    }

    std::vector<char> used(nv, 0);
    areas_.resize(triangles_.size());
    diameters_.resize(triangles_.size());
    inradii_.resize(triangles_.size());
    grad_lambda_.resize(triangles_.size());
    for (std::size_t r = 0; r < triangles_.size(); ++r) {
        const Triangle& t = triangles_[r];
        for (std::size_t v : t) {
            if (v >= nv) {
                throw MeshError(MeshError::Kind::Malformed, tri_name(r) + " references vertex " + std::to_string(v) +
                                                                " out of range");
            }
            used[v] = 1;
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            throw MeshError(MeshError::Kind::Degenerate, tri_name(r) + " repeats a vertex");
        }
        try {
            const ElementGeometry g = triangle_geometry(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
            areas_[r] = g.area;
            diameters_[r] = g.diameter;
            inradii_[r] = g.inradius;
            grad_lambda_[r] = g.grad_lambda;
        } catch (const MeshError& e) {
            throw MeshError(e.kind(), tri_name(r) + ": " + e.what());
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (!used[v]) {
            throw MeshError(MeshError::Kind::Malformed, "vertex " + std::to_string(v) + " belongs to no triangle");
        }
    }
    h_ = *std::max_element(diameters_.begin(), diameters_.end());

    std::vector<HalfEdge> half;
    half.reserve(3 * triangles_.size());
    for (std::size_t r = 0; r < triangles_.size(); ++r) {
        const Triangle& t = triangles_[r];
        for (int k = 0; k < 3; ++k) {
            const std::size_t a = t[k];
            const std::size_t b = t[(k + 1) % 3];
            half.push_back({std::min(a, b), std::max(a, b), r, a < b});
        }
    }
    std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
        return std::tie(x.lo, x.hi, x.element) < std::tie(y.lo, y.hi, y.element);
    });

    edges_.clear();
    boundary_edges_.clear();
    for (std::size_t i = 0; i < half.size();) {
        std::size_t j = i + 1;
        while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) {
            ++j;
        }
        const std::size_t count = j - i;
        const Edge e{half[i].lo, half[i].hi};
        if (count > 2) {
            throw MeshError(MeshError::Kind::Conformity, "edge (" + std::to_string(e[0]) + ", " + std::to_string(e[1]) +
                                                              ") is shared by more than two triangles");
        }
        if (count == 2 && half[i].forward == half[i + 1].forward) {
            throw MeshError(MeshError::Kind::Conformity,
                            "edge (" + std::to_string(e[0]) + ", " + std::to_string(e[1]) +
                                ") appears with the same orientation in triangles " +
                                std::to_string(half[i].element) + " and " + std::to_string(half[i + 1].element));
        }
        edges_.push_back(e);
        if (count == 1) {
            boundary_edges_.push_back(half[i].forward ? e : Edge{e[1], e[0]});
        }
        i = j;
    }

    // A hanging vertex sits strictly inside an edge that only one triangle owns.
    std::vector<std::size_t> candidates;
    for (const Edge& e : boundary_edges_) {
        candidates.push_back(e[0]);
        candidates.push_back(e[1]);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (const Edge& e : boundary_edges_) {
        const Point& a = vertices_[e[0]];
        const Vec2 d = vertices_[e[1]] - a;
        const double len2 = dot(d, d);
        for (std::size_t v : candidates) {
            if (v == e[0] || v == e[1]) {
                continue;
            }
            const Vec2 w = vertices_[v] - a;
            const double t = dot(w, d) / len2;
            if (t > 1e-12 && t < 1.0 - 1e-12 && std::abs(cross(d, w)) <= 1e-12 * len2) {
                throw MeshError(MeshError::Kind::Conformity, "hanging vertex " + std::to_string(v) + " on edge (" +
                                                                  std::to_string(e[0]) + ", " +
                                                                  std::to_string(e[1]) + ")");
            }
        }
    }

    std::vector<char> on_boundary(nv, 0);
    for (const Edge& e : boundary_edges_) {
        on_boundary[e[0]] = 1;
        on_boundary[e[1]] = 1;
    }
    boundary_vertices_.clear();
    interior_vertices_.clear();
    for (std::size_t v = 0; v < nv; ++v) {
        if (static_cast<bool>(on_boundary[v]) != boundary_flags_[v]) {
            throw MeshError(MeshError::Kind::BoundaryFlags,
                            "vertex " + std::to_string(v) + (boundary_flags_[v] ? " is flagged boundary but lies inside"
                                                                                : " lies on the boundary but is not flagged"));
        }
        (on_boundary[v] ? boundary_vertices_ : interior_vertices_).push_back(v);
    }

    // vertex -> elements
    vert_elem_offsets_.assign(nv + 1, 0);
    for (const Triangle& t : triangles_) {
        for (std::size_t v : t) {
            ++vert_elem_offsets_[v + 1];
        }
    }
    std::partial_sum(vert_elem_offsets_.begin(), vert_elem_offsets_.end(), vert_elem_offsets_.begin());
    vert_elem_.resize(vert_elem_offsets_.back());
    {
        std::vector<std::size_t> fill(vert_elem_offsets_.begin(), vert_elem_offsets_.end() - 1);
        for (std::size_t r = 0; r < triangles_.size(); ++r) {
            for (std::size_t v : triangles_[r]) {
                vert_elem_[fill[v]++] = r;
            }
        }
    }

    // vertex -> neighbouring vertices
    vert_nbr_offsets_.assign(nv + 1, 0);
    for (const Edge& e : edges_) {
        ++vert_nbr_offsets_[e[0] + 1];
        ++vert_nbr_offsets_[e[1] + 1];
    }
    std::partial_sum(vert_nbr_offsets_.begin(), vert_nbr_offsets_.end(), vert_nbr_offsets_.begin());
    vert_nbr_.resize(vert_nbr_offsets_.back());
    {
        std::vector<std::size_t> fill(vert_nbr_offsets_.begin(), vert_nbr_offsets_.end() - 1);
        for (const Edge& e : edges_) {
            vert_nbr_[fill[e[0]]++] = e[1];
            vert_nbr_[fill[e[1]]++] = e[0];
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        std::sort(vert_nbr_.begin() + static_cast<std::ptrdiff_t>(vert_nbr_offsets_[v]),
                  vert_nbr_.begin() + static_cast<std::ptrdiff_t>(vert_nbr_offsets_[v + 1]));
    }
}

double Mesh::total_area() const noexcept { return std::accumulate(areas_.begin(), areas_.end(), 0.0); }

std::span<const std::size_t> Mesh::elements_of_vertex(std::size_t i) const
{
    if (i >= vertices_.size()) {
        throw std::out_of_range("Mesh::elements_of_vertex: vertex out of range");
    }
    return {vert_elem_.data() + vert_elem_offsets_[i], vert_elem_offsets_[i + 1] - vert_elem_offsets_[i]};
}

std::span<const std::size_t> Mesh::neighbours_of_vertex(std::size_t i) const
{
    if (i >= vertices_.size()) {
        throw std::out_of_range("Mesh::neighbours_of_vertex: vertex out of range");
    }
    return {vert_nbr_.data() + vert_nbr_offsets_[i], vert_nbr_offsets_[i + 1] - vert_nbr_offsets_[i]};
}

Mesh build_structured_unit_square(std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("build_structured_unit_square: n must be >= 1");
    }
    const std::size_t m = n + 1;
    std::vector<Point> vertices;
    std::vector<bool> flags;
    vertices.reserve(m * m);
    flags.reserve(m * m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            vertices.push_back({static_cast<double>(i) / static_cast<double>(n),
                                static_cast<double>(j) / static_cast<double>(n)});
            flags.push_back(i == 0 || j == 0 || i == n || j == n);
        }
    }
    std::vector<Triangle> triangles;
    triangles.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = j * m + i;
            const std::size_t b = a + 1;
            const std::size_t c = a + m + 1;
            const std::size_t d = a + m;
            triangles.push_back({a, b, c});
            triangles.push_back({a, c, d});
        }
    }
    return Mesh(std::move(vertices), std::move(triangles), std::move(flags));
}

Mesh refine_uniform(const Mesh& mesh)
{
    std::vector<Point> vertices = mesh.vertices();
    std::vector<bool> flags = mesh.boundary_flags();
    const auto& edges = mesh.edges();

    std::vector<std::size_t> midpoint(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        midpoint[e] = vertices.size();
        vertices.push_back(0.5 * (mesh.vertex(edges[e][0]) + mesh.vertex(edges[e][1])));
        flags.push_back(false);
    }
    for (const Edge& be : mesh.boundary_edges()) {
        const Edge key{std::min(be[0], be[1]), std::max(be[0], be[1])};
        const auto it = std::lower_bound(edges.begin(), edges.end(), key);
        flags[midpoint[static_cast<std::size_t>(it - edges.begin())]] = true;
    }
    const auto mid = [&](std::size_t a, std::size_t b) {
        const Edge key{std::min(a, b), std::max(a, b)};
        const auto it = std::lower_bound(edges.begin(), edges.end(), key);
        return midpoint[static_cast<std::size_t>(it - edges.begin())];
    };

    std::vector<Triangle> triangles;
    triangles.reserve(4 * mesh.num_elements());
    for (const Triangle& t : mesh.triangles()) {
        const std::size_t m01 = mid(t[0], t[1]);
        const std::size_t m12 = mid(t[1], t[2]);
        const std::size_t m20 = mid(t[2], t[0]);
        triangles.push_back({t[0], m01, m20});
        triangles.push_back({m01, t[1], m12});
        triangles.push_back({m20, m12, t[2]});
        triangles.push_back({m01, m12, m20});
    }
    return Mesh(std::move(vertices), std::move(triangles), std::move(flags));
}

std::size_t mesh_level(const Mesh& mesh)
{
    return static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(mesh.num_elements()) / 2.0)));
}

ElementGeometry element_geometry(const Mesh& mesh, std::size_t r)
{
    const Triangle& t = mesh.triangle(r);
    return triangle_geometry(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
}

std::vector<std::size_t> vertex_patch(const Mesh& mesh, std::size_t vertex)
{
    const auto span = mesh.elements_of_vertex(vertex);
    std::vector<std::size_t> out(span.begin(), span.end());
    std::sort(out.begin(), out.end());
    return out;
}

Patch element_patch(const Mesh& mesh, std::size_t r)
{
    Patch p;
    p.center_element = r;
    for (std::size_t v : mesh.triangle(r)) {
        const auto span = mesh.elements_of_vertex(v);
        p.members.insert(p.members.end(), span.begin(), span.end());
    }
    std::sort(p.members.begin(), p.members.end());
    p.members.erase(std::unique(p.members.begin(), p.members.end()), p.members.end());
    return p;
}

QualityReport quality_report(const Mesh& mesh)
{
    QualityReport q;
    q.h = mesh.h();
    q.min_shape_ratio = std::numeric_limits<double>::infinity();
    q.min_size_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < mesh.num_elements(); ++r) {
        const double hr = mesh.element_diameters()[r];
        q.min_shape_ratio = std::min(q.min_shape_ratio, mesh.inscribed_radii()[r] / hr);
        q.min_size_ratio = std::min(q.min_size_ratio, hr / q.h);
    }
    return q;
}

namespace {

// Next non-empty, comment-stripped line; false at end of stream.
bool next_line(std::istream& in, std::string& line, std::size_t& lineno)
{
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            return true;
        }
    }
    return false;
}

[[noreturn]] void malformed(std::size_t lineno, const std::string& what)
{
    throw MeshError(MeshError::Kind::Malformed, "line " + std::to_string(lineno) + ": " + what);
}

std::size_t read_header(std::istream& in, std::size_t& lineno, const std::string& keyword)
{
    std::string line;
    if (!next_line(in, line, lineno)) {
        malformed(lineno, "expected '" + keyword + " <count>', got end of file");
    }
    std::istringstream ss(line);
    std::string word;
    long long count = -1;
    std::string extra;
    if (!(ss >> word >> count) || word != keyword || count < 0 || (ss >> extra)) {
        malformed(lineno, "expected '" + keyword + " <count>'");
    }
    return static_cast<std::size_t>(count);
}

} // namespace

Mesh read_mesh(std::istream& in)
{
    std::size_t lineno = 0;
    std::string line;

    const std::size_t nv = read_header(in, lineno, "vertices");
    std::vector<Point> vertices(nv);
    std::vector<bool> flags(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        if (!next_line(in, line, lineno)) {
            malformed(lineno, "unexpected end of file in vertex block");
        }
        std::istringstream ss(line);
        int flag = -1;
        std::string extra;
        if (!(ss >> vertices[i].x >> vertices[i].y >> flag) || (flag != 0 && flag != 1) || (ss >> extra)) {
            malformed(lineno, "expected 'x y boundary_flag(0|1)'");
        }
        flags[i] = flag == 1;
    }

    const std::size_t nt = read_header(in, lineno, "triangles");
    std::vector<Triangle> triangles(nt);
    for (std::size_t r = 0; r < nt; ++r) {
        if (!next_line(in, line, lineno)) {
            malformed(lineno, "unexpected end of file in triangle block");
        }
        std::istringstream ss(line);
        long long a = -1;
        long long b = -1;
        long long c = -1;
        std::string extra;
        if (!(ss >> a >> b >> c) || a < 0 || b < 0 || c < 0 || (ss >> extra)) {
            malformed(lineno, "expected 'i j k' with non-negative indices");
        }
        triangles[r] = {static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c)};
    }
    if (next_line(in, line, lineno)) {
        malformed(lineno, "trailing content after triangle block");
    }
    return Mesh(std::move(vertices), std::move(triangles), std::move(flags));
}

void write_mesh(const Mesh& mesh, std::ostream& out)
{
    out << "vertices " << mesh.num_vertices() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        const Point& p = mesh.vertex(i);
        out << p.x << ' ' << p.y << ' ' << (mesh.is_boundary_vertex(i) ? 1 : 0) << '\n';
    }
    out << "triangles " << mesh.num_elements() << '\n';
    for (const Triangle& t : mesh.triangles()) {
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
}

Mesh load_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MeshError(MeshError::Kind::Io, "cannot open mesh file " + path.string());
    }
    return read_mesh(in);
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw MeshError(MeshError::Kind::Io, "cannot write mesh file " + path.string());
    }
    write_mesh(mesh, out);
    if (!out) {
        throw MeshError(MeshError::Kind::Io, "write failed for " + path.string());
    }
}

} // namespace rdlab
