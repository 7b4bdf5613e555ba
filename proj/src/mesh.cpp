#include "roughstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace roughstokes {
namespace {

std::uint64_t edge_key(int a, int b)
{
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double edge_length(const std::vector<Vec2>& x, const Triangle& t, int local)
{
    return (x[t[(local + 1) % 3]] - x[t[(local + 2) % 3]]).norm();
}

// Rotate so that local edge 0 is the longest (lowest local index on ties).
Triangle rotate_longest_first(const std::vector<Vec2>& x, Triangle t)
{
    int best = 0;
    double longest = edge_length(x, t, 0);
    for (int i = 1; i < 3; ++i) {
        const double len = edge_length(x, t, i);
        if (len > longest * (1.0 + 1e-14)) {
            longest = len;
            best = i;
        }
    }
    return {t[best], t[(best + 1) % 3], t[(best + 2) % 3]};
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary, std::vector<int> parent_of,
           bool keep_refinement_edges)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)),
      boundary_(std::move(boundary)), parent_(std::move(parent_of))
{
    const int nv = num_vertices();
    if (!parent_.empty() && parent_.size() != triangles_.size()) {
        throw MeshError("parent map size does not match triangle count");
    }
    for (auto& t : triangles_) {
        for (int v : t) {
            if (v < 0 || v >= nv) {
                throw MeshError("triangle references vertex " + std::to_string(v) + " out of range");
            }
        }
        const Vec2 &a = vertices_[t[0]], &b = vertices_[t[1]], &c = vertices_[t[2]];
        double area = signed_area(a, b, c);
        const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
        if (std::abs(area) <= 1e-14 * scale) {
            throw MeshError("degenerate triangle");
        }
        if (area < 0.0) {
            if (keep_refinement_edges) {
                throw MeshError("triangle with negative orientation");
            }
            std::swap(t[1], t[2]);
        }
        if (!keep_refinement_edges) {
            t = rotate_longest_first(vertices_, t);
        }
    }
    build_edges();
    build_segments();
}

void Mesh::build_edges()
{
    triangle_edges_.resize(triangles_.size());
    edge_lookup_.reserve(triangles_.size() * 2);
    for (int t = 0; t < num_triangles(); ++t) {
        const Triangle& tri = triangles_[t];
        for (int i = 0; i < 3; ++i) {
            const int a = tri[(i + 1) % 3];
            const int b = tri[(i + 2) % 3];
            auto [it, inserted] = edge_lookup_.try_emplace(edge_key(a, b), num_edges());
            if (inserted) {
                edges_.push_back(Edge{{a, b}, t, -1, -1});
            } else {
                Edge& e = edges_[it->second];
                if (e.right >= 0) {
                    throw MeshError("edge shared by more than two triangles");
                }
                if (e.v[0] != b || e.v[1] != a) {
                    throw MeshError("inconsistent orientation across an interior edge");
                }
                e.right = t;
            }
            triangle_edges_[t][i] = it->second;
        }
    }

    boundary_vertex_.assign(vertices_.size(), false);
    for (auto& be : boundary_) {
        const int e = find_edge(be.v[0], be.v[1]);
        if (e < 0 || !edges_[e].on_boundary()) {
            throw MeshError("boundary edge is not a boundary edge of the triangulation");
        }
        if (be.segment < 0) {
            throw MeshError("negative boundary segment id");
        }
        if (edges_[e].segment >= 0) {
            throw MeshError("duplicate boundary edge");
        }
        be.v = edges_[e].v;
        edges_[e].segment = be.segment;
        boundary_vertex_[be.v[0]] = boundary_vertex_[be.v[1]] = true;
    }
    for (const Edge& e : edges_) {
        if (e.on_boundary() && e.segment < 0) {
            throw MeshError("boundary edge without a segment id");
        }
    }
}

void Mesh::build_segments()
{
    int count = 0;
    for (const auto& be : boundary_) {
        count = std::max(count, be.segment + 1);
    }
    segments_.resize(count);
    for (int s = 0; s < count; ++s) {
        std::unordered_map<int, int> next;
        std::unordered_map<int, int> in_degree;
        for (const auto& be : boundary_) {
            if (be.segment == s) {
                next[be.v[0]] = be.v[1];
                ++in_degree[be.v[1]];
            }
        }
        if (next.empty()) {
            throw MeshError("boundary segment " + std::to_string(s) + " has no edges");
        }
        int start = -1;
        for (const auto& [from, to] : next) {
            if (!in_degree.contains(from)) {
                if (start >= 0) {
                    throw MeshError("boundary segment " + std::to_string(s) + " is not a single chain");
                }
                start = from;
            }
        }
        if (start < 0) {
            throw MeshError("boundary segment " + std::to_string(s) + " is a closed loop");
        }
        int end = start;
        std::size_t steps = 0;
        while (next.contains(end)) {
            end = next[end];
            ++steps;
        }
        if (steps != next.size()) {
            throw MeshError("boundary segment " + std::to_string(s) + " is not a single chain");
        }
        Segment seg{vertices_[start], vertices_[end]};
        const double len = seg.length();
        for (const auto& [from, to] : next) {
            for (int v : {from, to}) {
                const double dist = std::abs(signed_area(seg.a, seg.b, vertices_[v])) * 2.0 / len;
                if (dist > 1e-12 * std::max(1.0, len)) {
                    throw MeshError("boundary segment " + std::to_string(s) + " is not straight");
                }
            }
        }
        segments_[s] = seg;
    }
}

int Mesh::find_edge(int a, int b) const
{
    auto it = edge_lookup_.find(edge_key(a, b));
    return it == edge_lookup_.end() ? -1 : it->second;
}

std::array<Vec2, 3> Mesh::corners(int t) const
{
    const Triangle& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

Vec2 Mesh::centroid(int t) const
{
    const auto c = corners(t);
    return (c[0] + c[1] + c[2]) / 3.0;
}

double Mesh::area(int t) const
{
    const auto c = corners(t);
    return signed_area(c[0], c[1], c[2]);
}

double Mesh::diameter(int t) const
{
    const auto c = corners(t);
    return std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
}

double Mesh::min_angle(int t) const
{
    const auto c = corners(t);
    double smallest = std::numbers::pi;
    for (int i = 0; i < 3; ++i) {
        const Vec2 u = c[(i + 1) % 3] - c[i];
        const Vec2 w = c[(i + 2) % 3] - c[i];
        const double angle = std::atan2(std::abs(u.x() * w.y() - u.y() * w.x()), u.dot(w));
        smallest = std::min(smallest, angle);
    }
    return smallest;
}

double Mesh::total_area() const
{
    double sum = 0.0;
    for (int t = 0; t < num_triangles(); ++t) {
        sum += area(t);
    }
    return sum;
}

double Mesh::min_angle() const
{
    double smallest = std::numbers::pi;
    for (int t = 0; t < num_triangles(); ++t) {
        smallest = std::min(smallest, min_angle(t));
    }
    return smallest;
}

Mesh build_structured_unit_square(int n)
{
    if (n < 1) {
        throw std::invalid_argument("build_structured_unit_square: n must be >= 1");
    }
    std::vector<Vec2> x;
    x.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            x.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
        }
    }
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<Triangle> tris;
    tris.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
            tris.push_back({v00, v10, v11});
            tris.push_back({v00, v11, v01});
        }
    }
    std::vector<BoundaryEdge> boundary;
    for (int j = n; j > 0; --j) {
        boundary.push_back({{id(0, j), id(0, j - 1)}, 0});
    }
    for (int i = 0; i < n; ++i) {
        boundary.push_back({{id(i, 0), id(i + 1, 0)}, 1});
    }
    for (int j = 0; j < n; ++j) {
        boundary.push_back({{id(n, j), id(n, j + 1)}, 2});
    }
    for (int i = n; i > 0; --i) {
        boundary.push_back({{id(i, n), id(i - 1, n)}, 3});
    }
    return Mesh(std::move(x), std::move(tris), std::move(boundary));
}

Mesh refine_uniform(const Mesh& mesh)
{
    const int nv = mesh.num_vertices();
    std::vector<Vec2> x = mesh.vertices();
    x.reserve(nv + mesh.num_edges());
    for (const Edge& e : mesh.edges()) {
        x.push_back(0.5 * (mesh.vertex(e.v[0]) + mesh.vertex(e.v[1])));
    }
    std::vector<Triangle> tris;
    std::vector<int> parent;
    tris.reserve(4 * mesh.num_triangles());
    parent.reserve(4 * mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle& v = mesh.triangle(t);
        const auto& e = mesh.triangle_edges(t);
        const int m0 = nv + e[0], m1 = nv + e[1], m2 = nv + e[2];
        for (const Triangle& child : {Triangle{v[0], m2, m1}, Triangle{m2, v[1], m0},
                                      Triangle{m1, m0, v[2]}, Triangle{m0, m1, m2}}) {
            tris.push_back(child);
            parent.push_back(t);
        }
    }
    std::vector<BoundaryEdge> boundary;
    boundary.reserve(2 * mesh.boundary_edges().size());
    for (const auto& be : mesh.boundary_edges()) {
        const int m = nv + mesh.find_edge(be.v[0], be.v[1]);
        boundary.push_back({{be.v[0], m}, be.segment});
        boundary.push_back({{m, be.v[1]}, be.segment});
    }
    return Mesh(std::move(x), std::move(tris), std::move(boundary), std::move(parent));
}

Mesh refine_marked(const Mesh& mesh, std::span<const int> marked, Bisection rule)
{
    const int ne = mesh.num_edges();
    std::vector<char> edge_marked(ne, 0);
    std::vector<int> work;
    for (int t : marked) {
        if (t < 0 || t >= mesh.num_triangles()) {
            throw std::out_of_range("refine_marked: triangle id out of range");
        }
        const int count = rule == Bisection::AllEdges ? 3 : 1;
        for (int k = 0; k < count; ++k) {
            const int e = mesh.triangle_edges(t)[k];
            if (!edge_marked[e]) {
                edge_marked[e] = 1;
                const Edge& edge = mesh.edge(e);
                work.push_back(edge.left);
                if (edge.right >= 0) {
                    work.push_back(edge.right);
                }
            }
        }
    }
    // Closure: a triangle with any marked edge must have its refinement edge marked.
    while (!work.empty()) {
        const int t = work.back();
        work.pop_back();
        const int ref = mesh.triangle_edges(t)[0];
        if (edge_marked[ref]) {
            continue;
        }
        edge_marked[ref] = 1;
        const Edge& edge = mesh.edge(ref);
        work.push_back(edge.left);
        if (edge.right >= 0) {
            work.push_back(edge.right);
        }
    }

    std::vector<Vec2> x = mesh.vertices();
    std::vector<int> midpoint(ne, -1);
    for (int e = 0; e < ne; ++e) {
        if (edge_marked[e]) {
            midpoint[e] = static_cast<int>(x.size());
            const Edge& edge = mesh.edge(e);
            x.push_back(0.5 * (mesh.vertex(edge.v[0]) + mesh.vertex(edge.v[1])));
        }
    }
    if (x.size() == mesh.vertices().size()) {
        return mesh;
    }

    auto mid_of = [&](int a, int b) {
        const int e = mesh.find_edge(a, b);
        return e >= 0 ? midpoint[e] : -1;
    };

    std::vector<Triangle> tris;
    std::vector<int> parent;
    // (p0, p1, p2): p0 newest vertex, p1-p2 refinement edge.
    auto bisect = [&](auto&& self, const Triangle& tri, int from) -> void {
        const int m = mid_of(tri[1], tri[2]);
        if (m < 0) {
            tris.push_back(tri);
            parent.push_back(from);
            return;
        }
        self(self, Triangle{m, tri[0], tri[1]}, from);
        self(self, Triangle{m, tri[2], tri[0]}, from);
    };
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        bisect(bisect, mesh.triangle(t), t);
    }

    std::vector<BoundaryEdge> boundary;
    for (const auto& be : mesh.boundary_edges()) {
        const int m = mid_of(be.v[0], be.v[1]);
        if (m < 0) {
            boundary.push_back(be);
        } else {
            boundary.push_back({{be.v[0], m}, be.segment});
            boundary.push_back({{m, be.v[1]}, be.segment});
        }
    }
    return Mesh(std::move(x), std::move(tris), std::move(boundary), std::move(parent), true);
}

std::optional<Barycentric> contains(const Mesh& mesh, int t, const Vec2& p, double tol)
{
    const auto c = mesh.corners(t);
    Barycentric l = barycentric(c[0], c[1], c[2], p);
    const double twice_area = 2.0 * signed_area(c[0], c[1], c[2]);
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (l[i] < 0.0) {
            const double height = twice_area / (c[(i + 1) % 3] - c[(i + 2) % 3]).norm();
            if (-l[i] * height > tol) {
                return std::nullopt;
            }
            l[i] = 0.0;
        }
        total += l[i];
    }
    for (double& v : l) {
        v /= total;
    }
    return l;
}

Location locate_point(const Mesh& mesh, const Vec2& p)
{
    return locate_point(mesh, p, {});
}

Location locate_point(const Mesh& mesh, const Vec2& p, std::span<const int> candidates)
{
    for (int t : candidates) {
        if (auto l = contains(mesh, t, p)) {
            return {t, *l};
        }
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (auto l = contains(mesh, t, p)) {
            return {t, *l};
        }
    }
    std::ostringstream msg;
    msg << "point (" << p.x() << ", " << p.y() << ") is outside the domain";
    throw PointOutsideDomainError(msg.str());
}

Mesh read_mesh(std::istream& in)
{
    int nv = 0, nt = 0, nbe = 0;
    if (!(in >> nv >> nt >> nbe) || nv < 3 || nt < 1 || nbe < 3) {
        throw MeshError("mesh file: bad header");
    }
    std::vector<Vec2> x(nv);
    for (auto& p : x) {
        if (!(in >> p.x() >> p.y())) {
            throw MeshError("mesh file: truncated vertex block");
        }
    }
    std::vector<Triangle> tris(nt);
    for (auto& t : tris) {
        if (!(in >> t[0] >> t[1] >> t[2])) {
            throw MeshError("mesh file: truncated triangle block");
        }
    }
    std::vector<BoundaryEdge> boundary(nbe);
    for (auto& be : boundary) {
        if (!(in >> be.v[0] >> be.v[1] >> be.segment)) {
            throw MeshError("mesh file: truncated boundary block");
        }
        if (be.v[0] < 0 || be.v[0] >= nv || be.v[1] < 0 || be.v[1] >= nv) {
            throw MeshError("mesh file: boundary vertex out of range");
        }
    }
    return Mesh(std::move(x), std::move(tris), std::move(boundary));
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MeshError("cannot open mesh file " + path);
    }
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    out.precision(std::numeric_limits<double>::max_digits10);
    out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges().size() << '\n';
    for (const Vec2& p : mesh.vertices()) {
        out << p.x() << ' ' << p.y() << '\n';
    }
    for (const Triangle& t : mesh.triangles()) {
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    for (const auto& be : mesh.boundary_edges()) {
        out << be.v[0] << ' ' << be.v[1] << ' ' << be.segment << '\n';
    }
}

void write_vtk(std::ostream& out, const Mesh& mesh,
               std::span<const std::pair<std::string, std::vector<double>>> cell_data)
{
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "# vtk DataFile Version 3.0\nroughstokes mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const Vec2& p : mesh.vertices()) {
        out << p.x() << ' ' << p.y() << " 0\n";
    }
    out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const Triangle& t : mesh.triangles()) {
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    out << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        out << "5\n";
    }
    if (!cell_data.empty()) {
        out << "CELL_DATA " << mesh.num_triangles() << '\n';
        for (const auto& [name, values] : cell_data) {
            if (values.size() != static_cast<std::size_t>(mesh.num_triangles())) {
                throw std::invalid_argument("write_vtk: cell data '" + name + "' has wrong length");
            }
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : values) {
                out << v << '\n';
            }
        }
    }
}

}  // namespace roughstokes
