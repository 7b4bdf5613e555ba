#pragma once

#include "roughstokes/stokes_solver.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace roughstokes {

class BoundaryEdgeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientLevelsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Jump of the discrete normal stress du/dn - p n across an interior edge,
/// J(s) = c0 + c1 s + c2 s^2 for s in [0, 1] from `a` to `b`. Exact for both
/// methods: the traces are at most quadratic along the edge.
struct EdgeJump {
    Vec2 a;
    Vec2 b;
    std::array<Vec2, 3> coefficients;

    Vec2 operator()(double s) const { return coefficients[0] + s * (coefficients[1] + s * coefficients[2]); }
    double length() const { return (b - a).norm(); }
    /// ||J||^2 over the edge.
    double squared_norm() const;
};

EdgeJump edge_jump(const StokesSolution& sol, int edge);

/// One-sided normal stress du/dn - p n on a boundary edge, outward normal.
EdgeJump boundary_stress(const StokesSolution& sol, int edge);

/// Edges entering the jump sum of eta_T. `All` adds boundary edges with the
/// one-sided normal stress; it does not vanish on exact discrete solutions.
enum class EstimatorEdges { Interior, All };

std::string_view to_string(EstimatorEdges edges);
EstimatorEdges parse_estimator_edges(std::string_view text);

/// Per-element terms of
///   eta_T^2 = h_T^4 ||-lap u + grad p||^2 + h_T^2 ||div u||^2 + 1/2 sum_e h_T^3 ||J_e||^2
/// with h_T the element diameter and the sum over the edges of T selected by
/// EstimatorEdges.
struct IndicatorField {
    std::vector<double> residual;
    std::vector<double> divergence;
    std::vector<double> jump;
    std::vector<double> eta;              // eta_T
    std::vector<double> edge_jump_norm2;  // ||J_e||^2, zero on excluded edges
    double global = 0.0;                  // sqrt(sum eta_T^2), summed in element order

    std::vector<double> eta_squared() const;
};

IndicatorField indicators(const StokesSolution& sol, EstimatorEdges edges = EstimatorEdges::Interior);

/// eta_k / ||u_k - u_{k-1}|| for k = 1..n-1 on nested solutions. Zero when
/// both quantities vanish (exact discrete solution).
std::vector<double> effectivity(std::span<const StokesSolution> levels,
                                EstimatorEdges edges = EstimatorEdges::Interior);

}  // namespace roughstokes
