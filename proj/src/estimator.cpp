#include "roughstokes/estimator.hpp"

#include "parallel.hpp"
#include "roughstokes/adaptivity.hpp"
#include "roughstokes/quadrature.hpp"

#include <cmath>
#include <string>

namespace roughstokes {
namespace {

constexpr int kElementDegree = 4;
constexpr int kEdgeDegree = 5;

// du/dn - p n on the side of triangle t, evaluated at point x.
Vec2 normal_stress(const StokesSolution& sol, int t, const Vec2& x, const Vec2& n)
{
    const auto c = sol.mesh->corners(t);
    Barycentric l = barycentric(c[0], c[1], c[2], x);
    const Eigen::Matrix2d grad = sol.velocity.gradient(sol.u, t, l);
    return grad * n - sol.pressure_at(t, l) * n;
}

EdgeJump from_samples(const Vec2& a, const Vec2& b, const std::array<Vec2, 3>& samples)
{
    EdgeJump jump{a, b, {}};
    jump.coefficients[0] = samples[0];
    jump.coefficients[1] = 4.0 * samples[1] - 3.0 * samples[0] - samples[2];
    jump.coefficients[2] = 2.0 * samples[0] + 2.0 * samples[2] - 4.0 * samples[1];
    return jump;
}

}  // namespace

std::string_view to_string(EstimatorEdges edges)
{
    return edges == EstimatorEdges::All ? "all" : "interior";
}

EstimatorEdges parse_estimator_edges(std::string_view text)
{
    if (text == "interior") {
        return EstimatorEdges::Interior;
    }
    if (text == "all") {
        return EstimatorEdges::All;
    }
    throw std::invalid_argument("unknown estimator edge set '" + std::string(text) + "'");
}

double EdgeJump::squared_norm() const
{
    const QuadratureRule& rule = segment_rule(kEdgeDegree);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        sum += rule.weights[q] * (*this)(rule.points[q].x()).squaredNorm();
    }
    return sum * length();
}

EdgeJump edge_jump(const StokesSolution& sol, int edge)
{
    const Mesh& mesh = *sol.mesh;
    const Edge& e = mesh.edge(edge);
    if (e.on_boundary()) {
        throw BoundaryEdgeError("edge_jump: edge " + std::to_string(edge) + " lies on the boundary");
    }
    const Vec2 a = mesh.vertex(e.v[0]);
    const Vec2 b = mesh.vertex(e.v[1]);
    const Vec2 t = (b - a).normalized();
    const Vec2 n_left(t.y(), -t.x());
    std::array<Vec2, 3> samples;
    for (int k = 0; k < 3; ++k) {
        const Vec2 x = a + 0.5 * k * (b - a);
        samples[k] = normal_stress(sol, e.left, x, n_left) + normal_stress(sol, e.right, x, -n_left);
    }
    return from_samples(a, b, samples);
}

EdgeJump boundary_stress(const StokesSolution& sol, int edge)
{
    const Mesh& mesh = *sol.mesh;
    const Edge& e = mesh.edge(edge);
    if (!e.on_boundary()) {
        throw std::invalid_argument("boundary_stress: edge " + std::to_string(edge) + " is interior");
    }
    const Vec2 a = mesh.vertex(e.v[0]);
    const Vec2 b = mesh.vertex(e.v[1]);
    Vec2 n = mesh.segments()[e.segment].normal();
    if (n.dot(mesh.centroid(e.left) - a) > 0.0) {
        n = -n;
    }
    std::array<Vec2, 3> samples;
    for (int k = 0; k < 3; ++k) {
        samples[k] = normal_stress(sol, e.left, a + 0.5 * k * (b - a), n);
    }
    return from_samples(a, b, samples);
}

std::vector<double> IndicatorField::eta_squared() const
{
    std::vector<double> out(eta.size());
    for (std::size_t t = 0; t < eta.size(); ++t) {
        out[t] = eta[t] * eta[t];
    }
    return out;
}

IndicatorField indicators(const StokesSolution& sol, EstimatorEdges edges)
{
    const Mesh& mesh = *sol.mesh;
    const int nt = mesh.num_triangles();
    const int ne = mesh.num_edges();
    const int threads = worker_threads();
    IndicatorField f;
    f.edge_jump_norm2.assign(ne, 0.0);
    detail::parallel_chunks(ne, threads, [&](int begin, int end) {
        for (int e = begin; e < end; ++e) {
            if (!mesh.edge(e).on_boundary()) {
                f.edge_jump_norm2[e] = edge_jump(sol, e).squared_norm();
            } else if (edges == EstimatorEdges::All) {
                f.edge_jump_norm2[e] = boundary_stress(sol, e).squared_norm();
            }
        }
    });

    f.residual.assign(nt, 0.0);
    f.divergence.assign(nt, 0.0);
    f.jump.assign(nt, 0.0);
    f.eta.assign(nt, 0.0);
    const Family family = sol.velocity.family();
    const QuadratureRule& rule = triangle_rule(kElementDegree);
    detail::parallel_chunks(nt, threads, [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
            const AffineMap map = affine_map(mesh, t);
            const double jac = std::abs(map.det);
            const auto vd = sol.velocity.cell_dofs(t);
            const auto pd = sol.pressure.cell_dofs(t);
            const int n = sol.velocity.local_count();
            Vec2 grad_p = Vec2::Zero();
            {
                const BasisValues pb = eval_basis(Family::P1, {1.0 / 3, 1.0 / 3, 1.0 / 3});
                for (int k = 0; k < 3; ++k) {
                    grad_p += sol.p[pd[k]] * map.gradient(pb.gradients[k]);
                }
            }
            double residual = 0.0;
            double divergence = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Barycentric l = rule.barycentric(q);
                const auto hess = eval_basis_hessians(family, l);
                const BasisValues b = eval_basis(family, l);
                Vec2 laplacian = Vec2::Zero();
                double div = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double lap_i = map.hessian(hess[i]).trace();
                    const Vec2 g = map.gradient(b.gradients[i]);
                    const double ux = sol.u[sol.velocity.dof(0, vd[i])];
                    const double uy = sol.u[sol.velocity.dof(1, vd[i])];
                    laplacian += lap_i * Vec2(ux, uy);
                    div += ux * g.x() + uy * g.y();
                }
                const double w = rule.weights[q] * jac;
                residual += w * (grad_p - laplacian).squaredNorm();
                divergence += w * div * div;
            }
            const double h = mesh.diameter(t);
            double jump = 0.0;
            for (int e : mesh.triangle_edges(t)) {
                jump += f.edge_jump_norm2[e];
            }
            f.residual[t] = std::pow(h, 4) * residual;
            f.divergence[t] = h * h * divergence;
            f.jump[t] = 0.5 * std::pow(h, 3) * jump;
            f.eta[t] = std::sqrt(f.residual[t] + f.divergence[t] + f.jump[t]);
        }
    });
    double total = 0.0;
    for (int t = 0; t < nt; ++t) {
        total += f.residual[t] + f.divergence[t] + f.jump[t];
    }
    f.global = std::sqrt(total);
    return f;
}

std::vector<double> effectivity(std::span<const StokesSolution> levels, EstimatorEdges edges)
{
    if (levels.size() < 3) {
        throw InsufficientLevelsError("effectivity: needs at least 3 nested levels");
    }
    std::vector<double> out;
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const double eta = indicators(levels[k], edges).global;
        const double err = consecutive_error(levels[k - 1], levels[k]);
        out.push_back(eta <= kZeroFloor && err <= kZeroFloor ? 0.0 : eta / err);
    }
    return out;
}

}  // namespace roughstokes
