#include "roughstokes/stokes_solver.hpp"

#include "parallel.hpp"
#include "roughstokes/quadrature.hpp"

#include <Eigen/UmfPackSupport>

#include <cstdlib>
#include <string>
#include <thread>

namespace roughstokes {
namespace {

constexpr int kAssemblyDegree = 4;

struct ElementBlocks {
    Eigen::MatrixXd stiffness;   // nloc x nloc, scalar
    Eigen::MatrixXd divergence;  // 3 x (2 nloc), columns component-major
    Eigen::Vector3d mass;
};

ElementBlocks element_blocks(const Mesh& mesh, int t, Family family)
{
    const int n = local_dof_count(family);
    const QuadratureRule& rule = triangle_rule(kAssemblyDegree);
    const AffineMap map = affine_map(mesh, t);
    const double jac = std::abs(map.det);
    ElementBlocks e{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(3, 2 * n), Eigen::Vector3d::Zero()};
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Barycentric l = rule.barycentric(q);
        const BasisValues b = eval_basis(family, l);
        const double w = rule.weights[q] * jac;
        std::array<Vec2, 6> g;
        for (int i = 0; i < n; ++i) {
            g[i] = map.gradient(b.gradients[i]);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                e.stiffness(i, j) += w * g[i].dot(g[j]);
            }
        }
        for (int k = 0; k < 3; ++k) {
            e.mass[k] += w * l[k];
            for (int j = 0; j < n; ++j) {
                e.divergence(k, j) -= w * l[k] * g[j].x();
                e.divergence(k, n + j) -= w * l[k] * g[j].y();
            }
        }
    }
    return e;
}

}  // namespace

std::string_view to_string(Method method)
{
    return method == Method::Mini ? "mini" : "hood-taylor";
}

Method parse_method(std::string_view name)
{
    if (name == "mini") {
        return Method::Mini;
    }
    if (name == "hood-taylor") {
        return Method::HoodTaylor;
    }
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

Family velocity_family(Method method)
{
    return method == Method::Mini ? Family::P1Bubble : Family::P2;
}

int velocity_nodes(const Mesh& mesh, Method method)
{
    return method == Method::HoodTaylor ? mesh.num_vertices() + mesh.num_edges() : mesh.num_vertices();
}

int worker_threads()
{
    if (const char* env = std::getenv("STOKES_ROUGHBC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Eigen::MatrixXd local_stiffness(const Mesh& mesh, int t, Family family)
{
    return element_blocks(mesh, t, family).stiffness;
}

SaddlePointBlocks assemble(const FESpace& velocity, const FESpace& pressure)
{
    if (velocity.mesh_ptr() != pressure.mesh_ptr()) {
        throw std::invalid_argument("assemble: spaces live on different meshes");
    }
    const bool stable = (velocity.family() == Family::P1Bubble || velocity.family() == Family::P2) &&
                        velocity.components() == 2 && pressure.family() == Family::P1Pressure &&
                        pressure.components() == 1;
    if (!stable) {
        throw UnstablePairError("assemble: unsupported velocity/pressure pair " +
                                std::string(to_string(velocity.family())) + "/" +
                                std::string(to_string(pressure.family())));
    }
    const Mesh& mesh = velocity.mesh();
    const int nt = mesh.num_triangles();
    const int n = velocity.local_count();
    const int ns = velocity.scalar_dof_count();

    std::vector<ElementBlocks> blocks(nt);
    detail::parallel_chunks(nt, worker_threads(), [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
            blocks[t] = element_blocks(mesh, t, velocity.family());
        }
    });

    std::vector<Eigen::Triplet<double>> a_entries, b_entries;
    a_entries.reserve(static_cast<std::size_t>(nt) * 2 * n * n);
    b_entries.reserve(static_cast<std::size_t>(nt) * 3 * 2 * n);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(pressure.dof_count());
    for (int t = 0; t < nt; ++t) {
        const auto vd = velocity.cell_dofs(t);
        const auto pd = pressure.cell_dofs(t);
        const ElementBlocks& e = blocks[t];
        for (int c = 0; c < 2; ++c) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    a_entries.emplace_back(c * ns + vd[i], c * ns + vd[j], e.stiffness(i, j));
                }
            }
        }
        for (int k = 0; k < 3; ++k) {
            m[pd[k]] += e.mass[k];
            for (int c = 0; c < 2; ++c) {
                for (int j = 0; j < n; ++j) {
                    b_entries.emplace_back(pd[k], c * ns + vd[j], e.divergence(k, c * n + j));
                }
            }
        }
    }
    SaddlePointBlocks out;
    out.A.resize(velocity.dof_count(), velocity.dof_count());
    out.A.setFromTriplets(a_entries.begin(), a_entries.end());
    out.B.resize(pressure.dof_count(), velocity.dof_count());
    out.B.setFromTriplets(b_entries.begin(), b_entries.end());
    out.m = std::move(m);
    return out;
}

Eigen::VectorXd lift_boundary_data(const FESpace& velocity, const BoundaryField& gh)
{
    const Mesh& mesh = velocity.mesh();
    const BoundaryTraceSpace& trace = *gh.trace;
    if (&trace.mesh() != &mesh) {
        throw std::invalid_argument("lift_boundary_data: boundary field lives on a different mesh");
    }
    const int nv = mesh.num_vertices();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(velocity.dof_count());
    for (int i = 0; i < trace.size(); ++i) {
        const int v = trace.node(i);
        g[velocity.dof(0, v)] = gh.values[i].x();
        g[velocity.dof(1, v)] = gh.values[i].y();
    }
    if (velocity.family() == Family::P2) {
        for (int i = 0; i < trace.size(); ++i) {
            const int e = mesh.find_edge(trace.node(i), trace.node(trace.next(i)));
            const Vec2 mid = gh.at(i, 0.5);
            g[velocity.dof(0, nv + e)] = mid.x();
            g[velocity.dof(1, nv + e)] = mid.y();
        }
    }
    return g;
}

StokesSolution solve(MeshPtr mesh, Method method, const BoundaryField& gh)
{
    if (!gh.trace || &gh.trace->mesh() != mesh.get()) {
        throw std::invalid_argument("solve: boundary field does not belong to this mesh");
    }
    const double defect = compatibility_defect(gh);
    if (std::abs(defect) > 1e-9 * (1.0 + gh.sup_norm()) * gh.trace->perimeter()) {
        throw IncompatibleDatumError("solve: boundary field violates the compatibility condition (flux " +
                                     std::to_string(defect) + ")");
    }

    FESpace velocity = build_space(mesh, velocity_family(method));
    FESpace pressure = build_space(mesh, Family::P1Pressure);
    const SaddlePointBlocks blocks = assemble(velocity, pressure);

    const int nu = velocity.dof_count();
    const int ns = velocity.scalar_dof_count();
    const int np = pressure.dof_count();
    std::vector<int> free_index(nu, -1);
    int nf = 0;
    for (int c = 0; c < 2; ++c) {
        for (int s = 0; s < ns; ++s) {
            if (!velocity.is_boundary_dof(s)) {
                free_index[c * ns + s] = nf++;
            }
        }
    }
    const int n = nf + np + 1;
    const Eigen::VectorXd lift = lift_boundary_data(velocity, gh);
    const Eigen::VectorXd a_lift = blocks.A * lift;
    const Eigen::VectorXd b_lift = blocks.B * lift;

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(blocks.A.nonZeros() + 2 * blocks.B.nonZeros() + 2 * np);
    for (int col = 0; col < blocks.A.outerSize(); ++col) {
        if (free_index[col] < 0) {
            continue;
        }
        for (SparseMatrix::InnerIterator it(blocks.A, col); it; ++it) {
            if (free_index[it.row()] >= 0) {
                entries.emplace_back(free_index[it.row()], free_index[col], it.value());
            }
        }
    }
    for (int col = 0; col < blocks.B.outerSize(); ++col) {
        if (free_index[col] < 0) {
            continue;
        }
        for (SparseMatrix::InnerIterator it(blocks.B, col); it; ++it) {
            entries.emplace_back(nf + it.row(), free_index[col], it.value());
            entries.emplace_back(free_index[col], nf + it.row(), it.value());
        }
    }
    for (int k = 0; k < np; ++k) {
        entries.emplace_back(nf + k, nf + np, blocks.m[k]);
        entries.emplace_back(nf + np, nf + k, blocks.m[k]);
    }
    SparseMatrix system(n, n);
    system.setFromTriplets(entries.begin(), entries.end());

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < nu; ++i) {
        if (free_index[i] >= 0) {
            rhs[free_index[i]] = -a_lift[i];
        }
    }
    rhs.segment(nf, np) = -b_lift;

    // The symmetric strategy keeps the dense multiplier row from wrecking the
    // fill-reducing ordering.
    Eigen::UmfPackLU<SparseMatrix> lu;
    lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
    lu.compute(system);
    if (lu.info() != Eigen::Success) {
        throw SolverError("solve: sparse factorization failed");
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw SolverError("solve: back substitution failed");
    }
    const double rhs_norm = rhs.norm();
    const double residual = (system * x - rhs).norm() / (rhs_norm > 0.0 ? rhs_norm : 1.0);
    if (residual > kSolverTolerance) {
        throw SolverError("solve: relative residual " + std::to_string(residual) + " above tolerance");
    }

    Eigen::VectorXd u = lift;
    for (int i = 0; i < nu; ++i) {
        if (free_index[i] >= 0) {
            u[i] = x[free_index[i]];
        }
    }
    StokesSolution sol{mesh, method, std::move(velocity), std::move(pressure), std::move(u), x.segment(nf, np),
                       x[nf + np], residual};
    return sol;
}

}  // namespace roughstokes
