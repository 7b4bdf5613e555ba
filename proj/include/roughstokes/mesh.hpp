#pragma once

#include "roughstokes/geometry.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace roughstokes {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PointOutsideDomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

using Triangle = std::array<int, 3>;

/// Boundary edge oriented counterclockwise (domain on the left).
struct BoundaryEdge {
    std::array<int, 2> v;
    int segment = 0;
};

/// Unique mesh edge. `left` owns the edge in counterclockwise order;
/// `right` is -1 on the boundary.
struct Edge {
    std::array<int, 2> v;
    int left = -1;
    int right = -1;
    int segment = -1;

    bool on_boundary() const { return right < 0; }
};

/// Straight boundary piece Gamma_i, traversed from `a` to `b`.
struct Segment {
    Vec2 a;
    Vec2 b;

    double length() const { return (b - a).norm(); }
    Vec2 tangent() const { return (b - a).normalized(); }
    Vec2 normal() const
    {
        const Vec2 t = tangent();
        return {t.y(), -t.x()};
    }
    /// Arclength parameter of p scaled to [0, 1].
    double parameter(const Vec2& p) const { return (p - a).dot(b - a) / (b - a).squaredNorm(); }
};

/// Conforming triangulation of a polygon.
///
/// Every triangle is stored counterclockwise with its refinement edge at local
/// position 0, i.e. opposite vertex 0 (the newest vertex under bisection).
/// Local edge i is opposite local vertex i. Meshes are immutable; refinement
/// returns a new mesh that records the parent of every child triangle.
class Mesh {
public:
    /// Triangles may come in either orientation and with any rotation; they
    /// are normalized (counterclockwise, longest edge first) unless
    /// `keep_refinement_edges` is set, in which case the given rotation is
    /// trusted. Boundary edges are re-oriented to match the triangles.
    Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary, std::vector<int> parent_of = {},
         bool keep_refinement_edges = false);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const Vec2& vertex(int i) const { return vertices_[i]; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const Triangle& triangle(int t) const { return triangles_[t]; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[e]; }
    /// Global edge ids of triangle t, ordered by local edge index.
    const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
    /// Edge id joining vertices a and b, or -1.
    int find_edge(int a, int b) const;
    /// Local index of the refinement edge; always 0 by storage convention.
    int refinement_edge(int) const { return 0; }

    /// Parent triangle in the mesh this one was refined from, or -1.
    int parent_of(int t) const { return parent_.empty() ? -1 : parent_[t]; }
    bool has_hierarchy() const { return !parent_.empty(); }
    const std::vector<int>& parents() const { return parent_; }

    /// Boundary segments indexed by segment id.
    const std::vector<Segment>& segments() const { return segments_; }
    bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }

    double area(int t) const;
    double diameter(int t) const;
    double min_angle(int t) const;
    std::array<Vec2, 3> corners(int t) const;
    Vec2 centroid(int t) const;

    double total_area() const;
    double min_angle() const;

private:
    void build_edges();
    void build_segments();

    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<int> parent_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> triangle_edges_;
    std::vector<Segment> segments_;
    std::vector<bool> boundary_vertex_;
    std::unordered_map<std::uint64_t, int> edge_lookup_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// n x n squares on [0,1]^2, each split along its bottom-left to top-right
/// diagonal. Segments: 0 left, 1 bottom, 2 right, 3 top.
Mesh build_structured_unit_square(int n);

/// Red refinement: every triangle into four similar children.
Mesh refine_uniform(const Mesh& mesh);

/// Edges of a marked triangle that are split: only the refinement edge (one
/// bisection) or all three (three bisections, four children).
enum class Bisection { RefinementEdge, AllEdges };

/// Newest-vertex bisection of the marked triangles plus the closure needed to
/// keep the mesh conforming. Every marked triangle is bisected at least once.
Mesh refine_marked(const Mesh& mesh, std::span<const int> marked, Bisection rule = Bisection::AllEdges);

struct Location {
    int triangle = -1;
    Barycentric bary{};
};

inline constexpr double kLocateTolerance = 1e-12;

/// Containing triangle of p with the lowest id.
Location locate_point(const Mesh& mesh, const Vec2& p);

/// Searches `candidates` first (e.g. the children of a known coarse ancestor)
/// and falls back to a full scan.
Location locate_point(const Mesh& mesh, const Vec2& p, std::span<const int> candidates);

/// Whether p lies in triangle t up to `tol` in barycentric coordinates.
std::optional<Barycentric> contains(const Mesh& mesh, int t, const Vec2& p, double tol = kLocateTolerance);

/// Plain-text format: `nv nt nbe`, then vertex, triangle and boundary rows.
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);

/// Legacy ASCII VTK unstructured grid with optional per-cell data.
void write_vtk(std::ostream& out, const Mesh& mesh,
               std::span<const std::pair<std::string, std::vector<double>>> cell_data = {});

}  // namespace roughstokes
