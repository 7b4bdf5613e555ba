#pragma once

#include "roughstokes/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace roughstokes {

enum class Family { P1, P1Bubble, P2, P1Pressure };

std::string_view to_string(Family family);
int local_dof_count(Family family);
/// Highest polynomial degree of the local shape functions.
int polynomial_degree(Family family);

/// Local shape functions on the reference triangle. Local order: the three
/// vertex functions, then either the bubble 27 l0 l1 l2 (P1Bubble) or the
/// three edge functions 4 lj lk for the edge opposite vertex i (P2).
struct BasisValues {
    int count = 0;
    std::array<double, 6> values{};
    std::array<Vec2, 6> gradients{};  // with respect to reference (x, y)
};

BasisValues eval_basis(Family family, const Barycentric& l);

/// Reference Hessians of the local shape functions.
std::array<Eigen::Matrix2d, 6> eval_basis_hessians(Family family, const Barycentric& l);

/// x = origin + J xi on triangle t.
struct AffineMap {
    Vec2 origin;
    Eigen::Matrix2d jacobian;
    Eigen::Matrix2d inverse_transpose;
    double det = 0.0;

    Vec2 gradient(const Vec2& reference) const { return inverse_transpose * reference; }
    Eigen::Matrix2d hessian(const Eigen::Matrix2d& reference) const
    {
        return inverse_transpose * reference * inverse_transpose.transpose();
    }
    Vec2 point(const Vec2& reference) const { return origin + jacobian * reference; }
};

AffineMap affine_map(const Mesh& mesh, int t);

/// Continuous Lagrange-type space with `components` copies of the scalar
/// space. Scalar DOFs are numbered vertices first (by vertex index), then
/// edges (P2) or bubbles (P1Bubble) by edge/triangle index; the vector DOF of
/// component c is c * scalar_dof_count() + scalar.
class FESpace {
public:
    FESpace(MeshPtr mesh, Family family, int components);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    Family family() const { return family_; }
    int components() const { return components_; }
    int scalar_dof_count() const { return scalar_count_; }
    int dof_count() const { return components_ * scalar_count_; }
    int local_count() const { return local_count_; }

    std::span<const int> cell_dofs(int t) const
    {
        return {cell_dofs_.data() + static_cast<std::size_t>(t) * local_count_,
                static_cast<std::size_t>(local_count_)};
    }
    int dof(int component, int scalar) const { return component * scalar_count_ + scalar; }

    /// Scalar DOFs whose nodal point lies on the boundary, ascending.
    const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
    bool is_boundary_dof(int scalar) const { return on_boundary_[scalar]; }
    Vec2 nodal_point(int scalar) const;

    /// Value of the field at (t, l); vector-valued spaces return the first
    /// two components.
    Vec2 value(const Eigen::VectorXd& coeffs, int t, const Barycentric& l) const;
    double scalar_value(const Eigen::VectorXd& coeffs, int t, const Barycentric& l) const;
    /// Row c holds the physical gradient of component c.
    Eigen::Matrix2d gradient(const Eigen::VectorXd& coeffs, int t, const Barycentric& l) const;

private:
    MeshPtr mesh_;
    Family family_;
    int components_;
    int local_count_;
    int scalar_count_ = 0;
    std::vector<int> cell_dofs_;
    std::vector<int> boundary_dofs_;
    std::vector<char> on_boundary_;
};

/// Velocity families get two components, P1Pressure one.
FESpace build_space(MeshPtr mesh, Family family);
FESpace build_space(MeshPtr mesh, Family family, int components);

/// Coefficients reproducing f at every nodal point (vertices, edge midpoints,
/// and barycenters for the bubble DOFs).
Eigen::VectorXd interpolate_nodal(const FESpace& space, const std::function<Vec2(const Vec2&)>& f);
Eigen::VectorXd interpolate_nodal(const FESpace& space, const std::function<double(const Vec2&)>& f);

/// Boundary nodes B_0..B_{M-1} in counterclockwise order starting at the
/// lowest-index boundary vertex; edge i joins B_i and B_{i+1 mod M}.
class BoundaryTraceSpace {
public:
    explicit BoundaryTraceSpace(MeshPtr mesh);

    const Mesh& mesh() const { return *mesh_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    int node(int i) const { return nodes_[i]; }
    const Vec2& point(int i) const { return mesh_->vertex(nodes_[i]); }
    double edge_length(int i) const { return lengths_[i]; }
    int edge_segment(int i) const { return segments_[i]; }
    const Vec2& edge_normal(int i) const { return normals_[i]; }
    Vec2 edge_tangent(int i) const { return {-normals_[i].y(), normals_[i].x()}; }
    int next(int i) const { return i + 1 == size() ? 0 : i + 1; }
    int prev(int i) const { return i == 0 ? size() - 1 : i - 1; }
    /// Node where two different segments meet.
    bool is_corner(int i) const { return segments_[prev(i)] != segments_[i]; }
    /// Position of mesh vertex v in the node list, or -1.
    int position(int v) const;
    double perimeter() const;

private:
    MeshPtr mesh_;
    std::vector<int> nodes_;
    std::vector<double> lengths_;
    std::vector<int> segments_;
    std::vector<Vec2> normals_;
    std::vector<int> position_;
};

}  // namespace roughstokes
