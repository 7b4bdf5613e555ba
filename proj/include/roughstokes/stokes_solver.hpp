#pragma once

#include "roughstokes/boundary_data.hpp"
#include "roughstokes/spaces.hpp"

#include <Eigen/Sparse>

#include <stdexcept>
#include <string_view>

namespace roughstokes {

class UnstablePairError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Method { Mini, HoodTaylor };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
Family velocity_family(Method method);

/// Lagrange nodes of one velocity component, interior bubbles excluded:
/// vertices for Mini, vertices plus edge midpoints for Hood-Taylor.
int velocity_nodes(const Mesh& mesh, Method method);

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Blocks of the saddle-point operator
///   [ A  B^T  0 ]
///   [ B  0    m ]
///   [ 0  m^T  0 ]
/// with A the vector Laplacian, B_ij = -(q_i, div v_j), m_i = (q_i, 1).
struct SaddlePointBlocks {
    SparseMatrix A;
    SparseMatrix B;
    Eigen::VectorXd m;
};

inline constexpr double kSolverTolerance = 1e-9;

/// Assembles the blocks for a stable velocity/pressure pair (P1Bubble/P1 or
/// P2/P1) on the same mesh. Element matrices are computed in parallel (see
/// STOKES_ROUGHBC_THREADS) and summed in element order.
SaddlePointBlocks assemble(const FESpace& velocity, const FESpace& pressure);

/// Element stiffness matrix of a scalar family, local DOF order.
Eigen::MatrixXd local_stiffness(const Mesh& mesh, int t, Family family);

struct StokesSolution {
    MeshPtr mesh;
    Method method;
    FESpace velocity;
    FESpace pressure;
    Eigen::VectorXd u;
    Eigen::VectorXd p;
    double multiplier = 0.0;
    double relative_residual = 0.0;

    Vec2 velocity_at(int t, const Barycentric& l) const { return velocity.value(u, t, l); }
    double pressure_at(int t, const Barycentric& l) const { return pressure.scalar_value(p, t, l); }
};

/// Velocity coefficients with boundary DOFs set from gh (P2 edge midpoints
/// take the midpoint value of the piecewise-linear gh) and zero elsewhere.
Eigen::VectorXd lift_boundary_data(const FESpace& velocity, const BoundaryField& gh);

/// Solves the discrete Stokes problem with u_h = gh on the boundary and
/// zero-mean pressure enforced by a scalar multiplier.
StokesSolution solve(MeshPtr mesh, Method method, const BoundaryField& gh);

/// Number of worker threads used by assembly and the estimator.
int worker_threads();

}  // namespace roughstokes
