#pragma once

#include "roughstokes/mesh.hpp"
#include "roughstokes/spaces.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace roughstokes {

class IncompatibleDatumError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NoCorrectionNodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value assigned to a boundary node where the datum jumps. Left and right
/// refer to the counterclockwise traversal: the left limit comes from the
/// piece ending at the node, the right limit from the piece starting there.
enum class JumpPolicy { LowerSegment, LeftLimit, RightLimit, Average };

std::string_view to_string(JumpPolicy policy);
JumpPolicy parse_jump_policy(std::string_view name);

using BoundaryFunction = std::function<Vec2(const Vec2&)>;

/// Smooth piece of the datum on the parameter range [begin, end] of one
/// segment (parameter 0 at Segment::a, 1 at Segment::b).
struct DatumPiece {
    int segment = 0;
    double begin = 0.0;
    double end = 1.0;
    BoundaryFunction f;
};

/// Boundary point where the datum is discontinuous.
struct JumpPoint {
    int segment;       // segment whose parameter range contains the point
    double parameter;  // 1.0 for corners (end of `segment`)
    Vec2 point;
};

inline constexpr double kDatumCompatibilityTolerance = 1e-10;

/// Piecewise-smooth vector field g on the boundary of a polygon.
class BoundaryDatum {
public:
    BoundaryDatum(std::vector<Segment> segments, std::vector<DatumPiece> pieces,
                  JumpPolicy policy = JumpPolicy::LowerSegment,
                  double compatibility_tolerance = kDatumCompatibilityTolerance);

    const std::vector<Segment>& segments() const { return segments_; }
    JumpPolicy policy() const { return policy_; }
    BoundaryDatum with_policy(JumpPolicy policy) const;
    BoundaryDatum scaled(double factor) const;

    /// One-sided values at p on `segment`, approached from lower / higher
    /// parameter values.
    Vec2 from_below(int segment, const Vec2& p) const;
    Vec2 from_above(int segment, const Vec2& p) const;

    /// Nodal value at a boundary node whose incoming edge lies on `segment_in`
    /// and outgoing edge on `segment_out`, resolved by the jump policy.
    Vec2 nodal_value(int segment_in, int segment_out, const Vec2& p) const;

    /// Interior break parameters of a segment, sorted, excluding 0 and 1.
    std::vector<double> breakpoints(int segment) const;
    std::vector<JumpPoint> jump_points() const;

    /// Integral of g . n over the whole boundary.
    double flux() const;

    /// Integrates fn(point, g(point)) * weight over the straight piece of
    /// `segment` between parameters t0 < t1, splitting at breakpoints and
    /// using the degree-9 Gauss rule on each part.
    void integrate(int segment, double t0, double t1,
                   const std::function<void(const Vec2&, const Vec2&, double)>& fn) const;

private:
    const DatumPiece& piece_at(int segment, double t, bool from_below) const;

    std::vector<Segment> segments_;
    std::vector<std::vector<DatumPiece>> pieces_;  // per segment, sorted
    JumpPolicy policy_;
};

/// Member of G_h: continuous, piecewise linear along the boundary mesh.
struct BoundaryField {
    std::shared_ptr<const BoundaryTraceSpace> trace;
    std::vector<Vec2> values;  // per boundary node
    int corrected_node = -1;   // node adjusted for compatibility, if any
    Vec2 correction = Vec2::Zero();
    double multiplier = 0.0;  // constraint multiplier of the L2 projection

    /// Value at parameter s in [0, 1] along boundary edge i.
    Vec2 at(int edge, double s) const;
    double sup_norm() const;
};

/// Unit-square segments, counterclockwise: 0 left, 1 bottom, 2 right, 3 top.
/// The lid comes last so the lower-segment policy puts zero at its corners.
std::vector<Segment> unit_square_segments();

/// Lid-driven cavity: (1, 0) on the top side, zero elsewhere.
BoundaryDatum cavity_datum(JumpPolicy policy = JumpPolicy::LowerSegment);
/// Trace of the divergence-free field (x, -y).
BoundaryDatum linear_datum(JumpPolicy policy = JumpPolicy::LowerSegment);
/// g . n = x (1 - x) - 1/6 on top, zero normal flux elsewhere; continuous.
BoundaryDatum parabolic_normal_datum(JumpPolicy policy = JumpPolicy::LowerSegment);
/// One of "cavity", "linear", "parabolic-normal".
BoundaryDatum named_datum(std::string_view name, JumpPolicy policy = JumpPolicy::LowerSegment);

/// Continuous datum equal to the piecewise-linear field on its trace mesh.
BoundaryDatum as_datum(const BoundaryField& field, const std::vector<Segment>& segments);

/// Exact integral of gh . n (trapezoid per edge).
double compatibility_defect(const BoundaryField& gh);

/// Plain nodal interpolation with the datum's jump policy.
BoundaryField lagrange_interpolant(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace);

/// Node used by the single-node compatibility correction: away from corners
/// and their neighbors, maximizing min(h_{k-1}, h_k), lowest index on ties.
int correction_node(const BoundaryTraceSpace& trace);

/// L1(g) for node k: minus the flux of gh outside the two edges at B_k minus
/// the trapezoid contributions of the neighbors B_{k-1}, B_{k+1} on them.
double compatibility_functional(const BoundaryField& gh, int k);

/// Resets the normal component of gh at node k so that the total flux
/// vanishes; the tangential component is left untouched.
void enforce_compatibility(BoundaryField& gh, int k);

BoundaryField modified_lagrange(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace);
BoundaryField l2_projection(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace);
BoundaryField carstensen(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace);

enum class Regularizer { ModifiedLagrange, L2Projection, Carstensen };
std::string_view to_string(Regularizer regularizer);
Regularizer parse_regularizer(std::string_view name);
BoundaryField regularize(Regularizer regularizer, const BoundaryDatum& datum,
                         std::shared_ptr<const BoundaryTraceSpace> trace);

/// ||g - gh|| in L2 of the boundary.
double boundary_l2_error(const BoundaryDatum& datum, const BoundaryField& gh);

}  // namespace roughstokes
