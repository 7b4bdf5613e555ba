#include "roughstokes/spaces.hpp"

#include <stdexcept>
#include <unordered_map>

namespace roughstokes {
namespace {

const std::array<Vec2, 3> kLambdaGrad = {Vec2(-1.0, -1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};

Eigen::Matrix2d sym_outer(const Vec2& a, const Vec2& b)
{
    return a * b.transpose() + b * a.transpose();
}

}  // namespace

std::string_view to_string(Family family)
{
    switch (family) {
    case Family::P1:
        return "P1";
    case Family::P1Bubble:
        return "P1Bubble";
    case Family::P2:
        return "P2";
    case Family::P1Pressure:
        return "P1Pressure";
    }
    return "?";
}

int local_dof_count(Family family)
{
    switch (family) {
    case Family::P1:
    case Family::P1Pressure:
        return 3;
    case Family::P1Bubble:
        return 4;
    case Family::P2:
        return 6;
    }
    return 0;
}

int polynomial_degree(Family family)
{
    switch (family) {
    case Family::P1Bubble:
        return 3;
    case Family::P2:
        return 2;
    default:
        return 1;
    }
}

BasisValues eval_basis(Family family, const Barycentric& l)
{
    BasisValues b;
    b.count = local_dof_count(family);
    if (family == Family::P2) {
        for (int i = 0; i < 3; ++i) {
            b.values[i] = l[i] * (2.0 * l[i] - 1.0);
            b.gradients[i] = (4.0 * l[i] - 1.0) * kLambdaGrad[i];
            const int j = (i + 1) % 3, k = (i + 2) % 3;
            b.values[3 + i] = 4.0 * l[j] * l[k];
            b.gradients[3 + i] = 4.0 * (l[k] * kLambdaGrad[j] + l[j] * kLambdaGrad[k]);
        }
        return b;
    }
    for (int i = 0; i < 3; ++i) {
        b.values[i] = l[i];
        b.gradients[i] = kLambdaGrad[i];
    }
    if (family == Family::P1Bubble) {
        b.values[3] = 27.0 * l[0] * l[1] * l[2];
        b.gradients[3] = 27.0 * (l[1] * l[2] * kLambdaGrad[0] + l[0] * l[2] * kLambdaGrad[1] +
                                 l[0] * l[1] * kLambdaGrad[2]);
    }
    return b;
}

std::array<Eigen::Matrix2d, 6> eval_basis_hessians(Family family, const Barycentric& l)
{
    std::array<Eigen::Matrix2d, 6> h;
    for (auto& m : h) {
        m.setZero();
    }
    const auto& g = kLambdaGrad;
    if (family == Family::P2) {
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3, k = (i + 2) % 3;
            h[i] = 4.0 * g[i] * g[i].transpose();
            h[3 + i] = 4.0 * sym_outer(g[j], g[k]);
        }
    } else if (family == Family::P1Bubble) {
        h[3] = 27.0 * (l[2] * sym_outer(g[0], g[1]) + l[1] * sym_outer(g[0], g[2]) + l[0] * sym_outer(g[1], g[2]));
    }
    return h;
}

AffineMap affine_map(const Mesh& mesh, int t)
{
    const auto c = mesh.corners(t);
    AffineMap map;
    map.origin = c[0];
    map.jacobian.col(0) = c[1] - c[0];
    map.jacobian.col(1) = c[2] - c[0];
    map.det = map.jacobian.determinant();
    map.inverse_transpose = map.jacobian.inverse().transpose();
    return map;
}

FESpace::FESpace(MeshPtr mesh, Family family, int components)
    : mesh_(std::move(mesh)), family_(family), components_(components), local_count_(local_dof_count(family))
{
    if (!mesh_) {
        throw std::invalid_argument("FESpace: null mesh");
    }
    if (components_ < 1) {
        throw std::invalid_argument("FESpace: components must be positive");
    }
    const Mesh& m = *mesh_;
    const int nv = m.num_vertices();
    scalar_count_ = nv;
    if (family_ == Family::P2) {
        scalar_count_ += m.num_edges();
    } else if (family_ == Family::P1Bubble) {
        scalar_count_ += m.num_triangles();
    }
    cell_dofs_.resize(static_cast<std::size_t>(m.num_triangles()) * local_count_);
    for (int t = 0; t < m.num_triangles(); ++t) {
        int* d = cell_dofs_.data() + static_cast<std::size_t>(t) * local_count_;
        const Triangle& tri = m.triangle(t);
        d[0] = tri[0];
        d[1] = tri[1];
        d[2] = tri[2];
        if (family_ == Family::P2) {
            const auto& e = m.triangle_edges(t);
            d[3] = nv + e[0];
            d[4] = nv + e[1];
            d[5] = nv + e[2];
        } else if (family_ == Family::P1Bubble) {
            d[3] = nv + t;
        }
    }
    on_boundary_.assign(scalar_count_, 0);
    for (int v = 0; v < nv; ++v) {
        on_boundary_[v] = m.is_boundary_vertex(v) ? 1 : 0;
    }
    if (family_ == Family::P2) {
        for (int e = 0; e < m.num_edges(); ++e) {
            on_boundary_[nv + e] = m.edge(e).on_boundary() ? 1 : 0;
        }
    }
    for (int s = 0; s < scalar_count_; ++s) {
        if (on_boundary_[s]) {
            boundary_dofs_.push_back(s);
        }
    }
}

Vec2 FESpace::nodal_point(int scalar) const
{
    const Mesh& m = *mesh_;
    const int nv = m.num_vertices();
    if (scalar < nv) {
        return m.vertex(scalar);
    }
    if (family_ == Family::P2) {
        const Edge& e = m.edge(scalar - nv);
        return 0.5 * (m.vertex(e.v[0]) + m.vertex(e.v[1]));
    }
    return m.centroid(scalar - nv);
}

Vec2 FESpace::value(const Eigen::VectorXd& coeffs, int t, const Barycentric& l) const
{
    const BasisValues b = eval_basis(family_, l);
    const auto dofs = cell_dofs(t);
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < b.count; ++i) {
        v.x() += coeffs[dof(0, dofs[i])] * b.values[i];
        if (components_ > 1) {
            v.y() += coeffs[dof(1, dofs[i])] * b.values[i];
        }
    }
    return v;
}

double FESpace::scalar_value(const Eigen::VectorXd& coeffs, int t, const Barycentric& l) const
{
    const BasisValues b = eval_basis(family_, l);
    const auto dofs = cell_dofs(t);
    double v = 0.0;
    for (int i = 0; i < b.count; ++i) {
        v += coeffs[dofs[i]] * b.values[i];
    }
    return v;
}

Eigen::Matrix2d FESpace::gradient(const Eigen::VectorXd& coeffs, int t, const Barycentric& l) const
{
    const BasisValues b = eval_basis(family_, l);
    const AffineMap map = affine_map(*mesh_, t);
    const auto dofs = cell_dofs(t);
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (int i = 0; i < b.count; ++i) {
        const Vec2 grad = map.gradient(b.gradients[i]);
        for (int c = 0; c < std::min(components_, 2); ++c) {
            g.row(c) += coeffs[dof(c, dofs[i])] * grad.transpose();
        }
    }
    return g;
}

FESpace build_space(MeshPtr mesh, Family family)
{
    return FESpace(std::move(mesh), family, family == Family::P1Pressure ? 1 : 2);
}

FESpace build_space(MeshPtr mesh, Family family, int components)
{
    return FESpace(std::move(mesh), family, components);
}

Eigen::VectorXd interpolate_nodal(const FESpace& space, const std::function<Vec2(const Vec2&)>& f)
{
    const Mesh& m = space.mesh();
    const int n = space.scalar_dof_count();
    const int nv = m.num_vertices();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(space.dof_count());
    const int comps = std::min(space.components(), 2);
    for (int s = 0; s < n; ++s) {
        const Vec2 value = f(space.nodal_point(s));
        for (int k = 0; k < comps; ++k) {
            c[space.dof(k, s)] = value[k];
        }
    }
    if (space.family() == Family::P1Bubble) {
        // The bubble coefficient corrects the linear part at the barycenter.
        for (int t = 0; t < m.num_triangles(); ++t) {
            const Triangle& tri = m.triangle(t);
            for (int k = 0; k < comps; ++k) {
                const double linear = (c[space.dof(k, tri[0])] + c[space.dof(k, tri[1])] + c[space.dof(k, tri[2])]) / 3.0;
                c[space.dof(k, nv + t)] -= linear;
            }
        }
    }
    return c;
}

Eigen::VectorXd interpolate_nodal(const FESpace& space, const std::function<double(const Vec2&)>& f)
{
    if (space.components() != 1) {
        throw std::invalid_argument("interpolate_nodal: scalar function on a vector space");
    }
    return interpolate_nodal(space, std::function<Vec2(const Vec2&)>([&f](const Vec2& p) { return Vec2(f(p), 0.0); }));
}

BoundaryTraceSpace::BoundaryTraceSpace(MeshPtr mesh) : mesh_(std::move(mesh))
{
    const Mesh& m = *mesh_;
    std::unordered_map<int, const BoundaryEdge*> outgoing;
    int start = -1;
    for (const auto& be : m.boundary_edges()) {
        outgoing[be.v[0]] = &be;
        if (start < 0 || be.v[0] < start) {
            start = be.v[0];
        }
    }
    if (start < 0) {
        throw MeshError("BoundaryTraceSpace: mesh has no boundary");
    }
    position_.assign(m.num_vertices(), -1);
    int v = start;
    do {
        auto it = outgoing.find(v);
        if (it == outgoing.end()) {
            throw MeshError("BoundaryTraceSpace: boundary is not closed");
        }
        const BoundaryEdge& be = *it->second;
        position_[v] = static_cast<int>(nodes_.size());
        nodes_.push_back(v);
        lengths_.push_back((m.vertex(be.v[1]) - m.vertex(be.v[0])).norm());
        segments_.push_back(be.segment);
        normals_.push_back(m.segments()[be.segment].normal());
        v = be.v[1];
    } while (v != start && nodes_.size() <= m.boundary_edges().size());
    if (nodes_.size() != m.boundary_edges().size()) {
        throw MeshError("BoundaryTraceSpace: boundary must be a single closed curve");
    }
}

int BoundaryTraceSpace::position(int v) const
{
    return v >= 0 && v < static_cast<int>(position_.size()) ? position_[v] : -1;
}

double BoundaryTraceSpace::perimeter() const
{
    double sum = 0.0;
    for (double h : lengths_) {
        sum += h;
    }
    return sum;
}

}  // namespace roughstokes
