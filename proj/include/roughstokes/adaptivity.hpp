#pragma once

#include "roughstokes/boundary_data.hpp"
#include "roughstokes/estimator.hpp"
#include "roughstokes/stokes_solver.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughstokes {

class AllZeroIndicatorsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotNestedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonPositiveValueError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Values at or below this are treated as exactly zero when forming orders
/// and effectivities (e.g. a reproduced linear solution).
inline constexpr double kZeroFloor = 1e-12;

/// Minimal set of largest indicators whose squares reach theta * sum of
/// squares. Sorted by decreasing eta, ties by ascending triangle id.
std::vector<int> dorfler_mark(std::span<const double> eta, double theta);

/// ||u_fine - u_coarse|| in L2, integrated on the fine mesh; `fine` must live
/// on a mesh refined directly from the coarse one.
double consecutive_error(const StokesSolution& coarse, const StokesSolution& fine);

/// order_k = log(v_{k-1} / v_k) / log(nv_k / nv_{k-1}); entry 0 is NaN.
std::vector<double> convergence_order(std::span<const int> nv, std::span<const double> values);

/// `nv` counts velocity nodes (see velocity_nodes).
struct ConvergenceRow {
    int nv = 0;
    double err_u = 0.0;
    double eta = 0.0;
    double order_u = std::numeric_limits<double>::quiet_NaN();
    double order_eta = std::numeric_limits<double>::quiet_NaN();
};

enum class RefinementMode { Uniform, Adaptive };

struct ConvergenceRecord {
    std::vector<ConvergenceRow> rows;
    Method method = Method::Mini;
    RefinementMode mode = RefinementMode::Uniform;
    double theta = 0.0;
    JumpPolicy jump_policy = JumpPolicy::LowerSegment;
    Regularizer regularizer = Regularizer::ModifiedLagrange;
    EstimatorEdges estimator_edges = EstimatorEdges::Interior;

    std::vector<int> nv() const;
    std::vector<double> err_u() const;
    std::vector<double> eta() const;
};

enum class Column { ErrU, Eta };

/// Recomputes the order column from the record's nv and values. Orders are
/// NaN where a value is at or below kZeroFloor.
std::vector<double> convergence_order(const ConvergenceRecord& record, Column column);

/// Called once per solved level with the level index (0 = initial mesh), the
/// solution, its indicators, and the elements marked for the next step.
using LevelObserver = std::function<void(int, const StokesSolution&, const IndicatorField&, const std::vector<int>&)>;

struct StudyConfig {
    BoundaryDatum datum = cavity_datum();
    Regularizer regularizer = Regularizer::ModifiedLagrange;
    Method method = Method::Mini;
    MeshPtr initial_mesh;
    EstimatorEdges estimator_edges = EstimatorEdges::Interior;
    int levels = 5;         // uniform: recorded levels
    double theta = 0.5;     // adaptive
    int max_dofs = 70000;   // adaptive: largest velocity node count solved
    int max_iters = 25;     // adaptive: refinement steps
    LevelObserver observer;
};

/// Solves on the initial mesh and on `levels` successive red refinements.
/// Row k reports the mesh of refinement k, its estimator, and the distance to
/// the previous level's solution.
ConvergenceRecord run_uniform(const StudyConfig& config);

/// Solve, estimate, mark (bulk criterion), bisect; rows as in run_uniform.
ConvergenceRecord run_adaptive(const StudyConfig& config);

/// `nv,err_u,eta,order_u,order_eta`, 6 significant digits, header included.
void write_csv(std::ostream& out, const ConvergenceRecord& record);
/// Aligned table in the same column order.
void write_table(std::ostream& out, const ConvergenceRecord& record);

}  // namespace roughstokes
