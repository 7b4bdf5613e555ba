#include "roughstokes/boundary_data.hpp"

#include "roughstokes/quadrature.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace roughstokes {
namespace {

constexpr double kParamTol = 1e-12;

bool same_value(const Vec2& a, const Vec2& b)
{
    return (a - b).norm() <= 1e-14 * (1.0 + std::max(a.norm(), b.norm()));
}

// Parameter range of boundary edge i on its datum segment.
std::pair<double, double> edge_parameters(const BoundaryDatum& datum, const BoundaryTraceSpace& trace, int i)
{
    const int s = trace.edge_segment(i);
    if (s >= static_cast<int>(datum.segments().size())) {
        throw std::invalid_argument("boundary datum has no segment " + std::to_string(s));
    }
    const Segment& seg = datum.segments()[s];
    const Vec2& p0 = trace.point(i);
    const Vec2& p1 = trace.point(trace.next(i));
    const double len = seg.length();
    for (const Vec2* p : {&p0, &p1}) {
        if (std::abs(signed_area(seg.a, seg.b, *p)) * 2.0 / len > 1e-9 * std::max(1.0, len)) {
            throw std::invalid_argument("boundary datum segments do not match the mesh boundary");
        }
    }
    const double t0 = seg.parameter(p0);
    const double t1 = seg.parameter(p1);
    if (!(t0 < t1) || t0 < -1e-9 || t1 > 1.0 + 1e-9) {
        throw std::invalid_argument("boundary datum segments do not match the mesh boundary");
    }
    return {t0, t1};
}

// Integrates fn(phi_start, phi_end, g) over boundary edge i, where phi are the
// two hat functions of the edge.
template <typename Fn>
void integrate_edge(const BoundaryDatum& datum, const BoundaryTraceSpace& trace, int i, Fn&& fn)
{
    const auto [t0, t1] = edge_parameters(datum, trace, i);
    const Vec2& a = trace.point(i);
    const double h = trace.edge_length(i);
    datum.integrate(trace.edge_segment(i), t0, t1, [&](const Vec2& p, const Vec2& g, double w) {
        const double s = std::clamp((p - a).norm() / h, 0.0, 1.0);
        fn(1.0 - s, s, g, w);
    });
}

}  // namespace

std::string_view to_string(JumpPolicy policy)
{
    switch (policy) {
    case JumpPolicy::LowerSegment:
        return "lower-segment";
    case JumpPolicy::LeftLimit:
        return "left";
    case JumpPolicy::RightLimit:
        return "right";
    case JumpPolicy::Average:
        return "average";
    }
    return "?";
}

JumpPolicy parse_jump_policy(std::string_view name)
{
    if (name == "lower-segment") {
        return JumpPolicy::LowerSegment;
    }
    if (name == "left") {
        return JumpPolicy::LeftLimit;
    }
    if (name == "right") {
        return JumpPolicy::RightLimit;
    }
    if (name == "average") {
        return JumpPolicy::Average;
    }
    throw std::invalid_argument("unknown jump policy '" + std::string(name) + "'");
}

std::string_view to_string(Regularizer regularizer)
{
    switch (regularizer) {
    case Regularizer::ModifiedLagrange:
        return "modified-lagrange";
    case Regularizer::L2Projection:
        return "l2-projection";
    case Regularizer::Carstensen:
        return "carstensen";
    }
    return "?";
}

Regularizer parse_regularizer(std::string_view name)
{
    if (name == "modified-lagrange") {
        return Regularizer::ModifiedLagrange;
    }
    if (name == "l2-projection") {
        return Regularizer::L2Projection;
    }
    if (name == "carstensen") {
        return Regularizer::Carstensen;
    }
    throw std::invalid_argument("unknown regularizer '" + std::string(name) + "'");
}

BoundaryDatum::BoundaryDatum(std::vector<Segment> segments, std::vector<DatumPiece> pieces, JumpPolicy policy,
                             double compatibility_tolerance)
    : segments_(std::move(segments)), pieces_(segments_.size()), policy_(policy)
{
    for (auto& piece : pieces) {
        if (piece.segment < 0 || piece.segment >= static_cast<int>(segments_.size())) {
            throw std::invalid_argument("datum piece on unknown segment");
        }
        if (!piece.f) {
            throw std::invalid_argument("datum piece without a function");
        }
        if (!(piece.begin < piece.end)) {
            throw std::invalid_argument("datum piece with empty parameter range");
        }
        pieces_[piece.segment].push_back(std::move(piece));
    }
    for (std::size_t s = 0; s < pieces_.size(); ++s) {
        auto& list = pieces_[s];
        std::sort(list.begin(), list.end(), [](const DatumPiece& a, const DatumPiece& b) { return a.begin < b.begin; });
        if (list.empty() || std::abs(list.front().begin) > kParamTol || std::abs(list.back().end - 1.0) > kParamTol) {
            throw std::invalid_argument("datum pieces must cover segment " + std::to_string(s));
        }
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (std::abs(list[i].begin - list[i - 1].end) > kParamTol) {
                throw std::invalid_argument("datum pieces on segment " + std::to_string(s) + " leave a gap or overlap");
            }
        }
    }
    if (std::isfinite(compatibility_tolerance)) {
        double scale = 0.0;
        double perimeter = 0.0;
        for (std::size_t s = 0; s < segments_.size(); ++s) {
            perimeter += segments_[s].length();
            integrate(static_cast<int>(s), 0.0, 1.0,
                      [&](const Vec2&, const Vec2& g, double) { scale = std::max(scale, g.norm()); });
        }
        const double defect = flux();
        if (std::abs(defect) > compatibility_tolerance * (1.0 + scale * perimeter)) {
            throw IncompatibleDatumError("boundary datum violates the compatibility condition: flux = " +
                                         std::to_string(defect));
        }
    }
}

BoundaryDatum BoundaryDatum::with_policy(JumpPolicy policy) const
{
    BoundaryDatum copy = *this;
    copy.policy_ = policy;
    return copy;
}

BoundaryDatum BoundaryDatum::scaled(double factor) const
{
    BoundaryDatum copy = *this;
    for (auto& list : copy.pieces_) {
        for (auto& piece : list) {
            piece.f = [f = piece.f, factor](const Vec2& p) { return Vec2(factor * f(p)); };
        }
    }
    return copy;
}

const DatumPiece& BoundaryDatum::piece_at(int segment, double t, bool from_below) const
{
    const auto& list = pieces_.at(segment);
    for (const auto& piece : list) {
        if (from_below ? (t > piece.begin + kParamTol && t <= piece.end + kParamTol)
                       : (t >= piece.begin - kParamTol && t < piece.end - kParamTol)) {
            return piece;
        }
    }
    return from_below ? list.front() : list.back();
}

Vec2 BoundaryDatum::from_below(int segment, const Vec2& p) const
{
    return piece_at(segment, segments_.at(segment).parameter(p), true).f(p);
}

Vec2 BoundaryDatum::from_above(int segment, const Vec2& p) const
{
    return piece_at(segment, segments_.at(segment).parameter(p), false).f(p);
}

Vec2 BoundaryDatum::nodal_value(int segment_in, int segment_out, const Vec2& p) const
{
    const Vec2 left = from_below(segment_in, p);
    const Vec2 right = from_above(segment_out, p);
    if (same_value(left, right)) {
        return left;
    }
    switch (policy_) {
    case JumpPolicy::LowerSegment:
        return segment_out < segment_in ? right : left;
    case JumpPolicy::LeftLimit:
        return left;
    case JumpPolicy::RightLimit:
        return right;
    case JumpPolicy::Average:
        return 0.5 * (left + right);
    }
    return left;
}

std::vector<double> BoundaryDatum::breakpoints(int segment) const
{
    std::vector<double> out;
    const auto& list = pieces_.at(segment);
    for (std::size_t i = 1; i < list.size(); ++i) {
        out.push_back(list[i].begin);
    }
    return out;
}

std::vector<JumpPoint> BoundaryDatum::jump_points() const
{
    std::vector<JumpPoint> out;
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const Segment& seg = segments_[s];
        for (double t : breakpoints(static_cast<int>(s))) {
            const Vec2 p = seg.a + t * (seg.b - seg.a);
            if (!same_value(from_below(static_cast<int>(s), p), from_above(static_cast<int>(s), p))) {
                out.push_back({static_cast<int>(s), t, p});
            }
        }
        for (std::size_t r = 0; r < segments_.size(); ++r) {
            if ((segments_[r].a - seg.b).norm() <= 1e-12 * std::max(1.0, seg.length())) {
                if (!same_value(from_below(static_cast<int>(s), seg.b), from_above(static_cast<int>(r), seg.b))) {
                    out.push_back({static_cast<int>(s), 1.0, seg.b});
                }
            }
        }
    }
    return out;
}

void BoundaryDatum::integrate(int segment, double t0, double t1,
                              const std::function<void(const Vec2&, const Vec2&, double)>& fn) const
{
    const Segment& seg = segments_.at(segment);
    const double len = seg.length();
    const QuadratureRule& rule = segment_rule(9);
    for (const auto& piece : pieces_.at(segment)) {
        const double lo = std::max(t0, piece.begin);
        const double hi = std::min(t1, piece.end);
        if (hi <= lo) {
            continue;
        }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = lo + (hi - lo) * rule.points[q].x();
            const Vec2 p = seg.a + t * (seg.b - seg.a);
            fn(p, piece.f(p), rule.weights[q] * (hi - lo) * len);
        }
    }
}

double BoundaryDatum::flux() const
{
    // Composite rule: the pieces need not be polynomial.
    constexpr int kParts = 32;
    double sum = 0.0;
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const Vec2 n = segments_[s].normal();
        for (int k = 0; k < kParts; ++k) {
            integrate(static_cast<int>(s), static_cast<double>(k) / kParts, static_cast<double>(k + 1) / kParts,
                      [&](const Vec2&, const Vec2& g, double w) { sum += w * g.dot(n); });
        }
    }
    return sum;
}

Vec2 BoundaryField::at(int edge, double s) const
{
    return (1.0 - s) * values[edge] + s * values[trace->next(edge)];
}

double BoundaryField::sup_norm() const
{
    double m = 0.0;
    for (const Vec2& v : values) {
        m = std::max(m, v.norm());
    }
    return m;
}

std::vector<Segment> unit_square_segments()
{
    return {Segment{Vec2(0, 1), Vec2(0, 0)}, Segment{Vec2(0, 0), Vec2(1, 0)}, Segment{Vec2(1, 0), Vec2(1, 1)},
            Segment{Vec2(1, 1), Vec2(0, 1)}};
}

BoundaryDatum cavity_datum(JumpPolicy policy)
{
    const BoundaryFunction zero = [](const Vec2&) { return Vec2(0.0, 0.0); };
    const BoundaryFunction lid = [](const Vec2&) { return Vec2(1.0, 0.0); };
    return BoundaryDatum(unit_square_segments(), {{0, 0.0, 1.0, zero}, {1, 0.0, 1.0, zero}, {2, 0.0, 1.0, zero},
                                                  {3, 0.0, 1.0, lid}},
                         policy);
}

BoundaryDatum linear_datum(JumpPolicy policy)
{
    const BoundaryFunction f = [](const Vec2& p) { return Vec2(p.x(), -p.y()); };
    return BoundaryDatum(unit_square_segments(), {{0, 0.0, 1.0, f}, {1, 0.0, 1.0, f}, {2, 0.0, 1.0, f},
                                                  {3, 0.0, 1.0, f}},
                         policy);
}

BoundaryDatum parabolic_normal_datum(JumpPolicy policy)
{
    const BoundaryFunction zero = [](const Vec2&) { return Vec2(0.0, 0.0); };
    const BoundaryFunction side = [](const Vec2& p) { return Vec2(0.0, -p.y() / 6.0); };
    const BoundaryFunction top = [](const Vec2& p) { return Vec2(0.0, p.x() * (1.0 - p.x()) - 1.0 / 6.0); };
    return BoundaryDatum(unit_square_segments(), {{0, 0.0, 1.0, side}, {1, 0.0, 1.0, zero}, {2, 0.0, 1.0, side},
                                                  {3, 0.0, 1.0, top}},
                         policy);
}

BoundaryDatum named_datum(std::string_view name, JumpPolicy policy)
{
    if (name == "cavity") {
        return cavity_datum(policy);
    }
    if (name == "linear") {
        return linear_datum(policy);
    }
    if (name == "parabolic-normal") {
        return parabolic_normal_datum(policy);
    }
    throw std::invalid_argument("unknown datum '" + std::string(name) + "'");
}

BoundaryDatum as_datum(const BoundaryField& field, const std::vector<Segment>& segments)
{
    const BoundaryTraceSpace& trace = *field.trace;
    std::vector<DatumPiece> pieces;
    for (int i = 0; i < trace.size(); ++i) {
        const int s = trace.edge_segment(i);
        const Segment& seg = segments.at(s);
        const Vec2 a = trace.point(i);
        const Vec2 b = trace.point(trace.next(i));
        const Vec2 ga = field.values[i];
        const Vec2 gb = field.values[trace.next(i)];
        DatumPiece piece;
        piece.segment = s;
        piece.begin = std::clamp(seg.parameter(a), 0.0, 1.0);
        piece.end = std::clamp(seg.parameter(b), 0.0, 1.0);
        piece.f = [a, b, ga, gb](const Vec2& p) {
            const double s = (p - a).dot(b - a) / (b - a).squaredNorm();
            return Vec2((1.0 - s) * ga + s * gb);
        };
        pieces.push_back(std::move(piece));
    }
    return BoundaryDatum(segments, std::move(pieces), JumpPolicy::LowerSegment,
                         std::numeric_limits<double>::infinity());
}

double compatibility_defect(const BoundaryField& gh)
{
    const BoundaryTraceSpace& trace = *gh.trace;
    double sum = 0.0;
    for (int i = 0; i < trace.size(); ++i) {
        sum += 0.5 * trace.edge_length(i) * (gh.values[i] + gh.values[trace.next(i)]).dot(trace.edge_normal(i));
    }
    return sum;
}

BoundaryField lagrange_interpolant(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace)
{
    BoundaryField gh;
    gh.values.resize(trace->size());
    for (int i = 0; i < trace->size(); ++i) {
        edge_parameters(datum, *trace, i);
        gh.values[i] = datum.nodal_value(trace->edge_segment(trace->prev(i)), trace->edge_segment(i), trace->point(i));
    }
    gh.trace = std::move(trace);
    return gh;
}

int correction_node(const BoundaryTraceSpace& trace)
{
    if (trace.size() < 8) {
        throw NoCorrectionNodeError("compatibility correction needs at least 8 boundary nodes");
    }
    int best = -1;
    double best_h = -1.0;
    for (int i = 0; i < trace.size(); ++i) {
        if (trace.is_corner(i) || trace.is_corner(trace.prev(i)) || trace.is_corner(trace.next(i))) {
            continue;
        }
        const double h = std::min(trace.edge_length(trace.prev(i)), trace.edge_length(i));
        if (h > best_h * (1.0 + 1e-12)) {
            best_h = h;
            best = i;
        }
    }
    if (best < 0) {
        throw NoCorrectionNodeError("no boundary node away from the corners and their neighbors");
    }
    return best;
}

double compatibility_functional(const BoundaryField& gh, int k)
{
    const BoundaryTraceSpace& trace = *gh.trace;
    const int before = trace.prev(k);
    double outside = 0.0;
    for (int i = 0; i < trace.size(); ++i) {
        if (i == before || i == k) {
            continue;
        }
        outside += 0.5 * trace.edge_length(i) * (gh.values[i] + gh.values[trace.next(i)]).dot(trace.edge_normal(i));
    }
    const double neighbors = 0.5 * (trace.edge_length(before) * gh.values[before].dot(trace.edge_normal(before)) +
                                    trace.edge_length(k) * gh.values[trace.next(k)].dot(trace.edge_normal(k)));
    return -outside - neighbors;
}

void enforce_compatibility(BoundaryField& gh, int k)
{
    const BoundaryTraceSpace& trace = *gh.trace;
    const Vec2 n = trace.edge_normal(k);
    const double weight = 0.5 * (trace.edge_length(trace.prev(k)) + trace.edge_length(k));
    const double normal = compatibility_functional(gh, k) / weight;
    const Vec2 old = gh.values[k];
    gh.values[k] = old - old.dot(n) * n + normal * n;
    gh.corrected_node = k;
    gh.correction = gh.values[k] - old;
}

BoundaryField modified_lagrange(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace)
{
    const int k = correction_node(*trace);
    BoundaryField gh = lagrange_interpolant(datum, std::move(trace));
    enforce_compatibility(gh, k);
    return gh;
}

BoundaryField carstensen(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace)
{
    const int k = correction_node(*trace);
    const int m = trace->size();
    std::vector<Vec2> moment(m, Vec2::Zero());
    for (int i = 0; i < m; ++i) {
        const int j = trace->next(i);
        integrate_edge(datum, *trace, i, [&](double phi_i, double phi_j, const Vec2& g, double w) {
            moment[i] += w * phi_i * g;
            moment[j] += w * phi_j * g;
        });
    }
    BoundaryField gh;
    gh.values.resize(m);
    for (int i = 0; i < m; ++i) {
        gh.values[i] = moment[i] / (0.5 * (trace->edge_length(trace->prev(i)) + trace->edge_length(i)));
    }
    gh.trace = std::move(trace);
    enforce_compatibility(gh, k);
    return gh;
}

BoundaryField l2_projection(const BoundaryDatum& datum, std::shared_ptr<const BoundaryTraceSpace> trace)
{
    const int m = trace->size();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(4 * m);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
    Eigen::MatrixXd constraint = Eigen::MatrixXd::Zero(m, 2);
    for (int i = 0; i < m; ++i) {
        const int j = trace->next(i);
        const double h = trace->edge_length(i);
        entries.emplace_back(i, i, h / 3.0);
        entries.emplace_back(j, j, h / 3.0);
        entries.emplace_back(i, j, h / 6.0);
        entries.emplace_back(j, i, h / 6.0);
        const Vec2& n = trace->edge_normal(i);
        constraint.row(i) += 0.5 * h * n.transpose();
        constraint.row(j) += 0.5 * h * n.transpose();
        integrate_edge(datum, *trace, i, [&](double phi_i, double phi_j, const Vec2& g, double w) {
            rhs.row(i) += w * phi_i * g.transpose();
            rhs.row(j) += w * phi_j * g.transpose();
        });
    }
    Eigen::SparseMatrix<double> mass(m, m);
    mass.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mass);
    if (ldlt.info() != Eigen::Success) {
        throw SingularSystemError("boundary mass matrix factorization failed");
    }
    const Eigen::MatrixXd unconstrained = ldlt.solve(rhs);
    const Eigen::MatrixXd response = ldlt.solve(constraint);
    const double denom = (constraint.array() * response.array()).sum();
    if (!(std::abs(denom) > 0.0)) {
        throw SingularSystemError("compatibility constraint is degenerate on this boundary mesh");
    }
    const double mu = (constraint.array() * unconstrained.array()).sum() / denom;
    const Eigen::MatrixXd x = unconstrained - mu * response;

    BoundaryField gh;
    gh.values.resize(m);
    for (int i = 0; i < m; ++i) {
        gh.values[i] = x.row(i).transpose();
    }
    gh.multiplier = mu;
    gh.trace = std::move(trace);
    return gh;
}

BoundaryField regularize(Regularizer regularizer, const BoundaryDatum& datum,
                         std::shared_ptr<const BoundaryTraceSpace> trace)
{
    switch (regularizer) {
    case Regularizer::ModifiedLagrange:
        return modified_lagrange(datum, std::move(trace));
    case Regularizer::L2Projection:
        return l2_projection(datum, std::move(trace));
    case Regularizer::Carstensen:
        return carstensen(datum, std::move(trace));
    }
    throw std::invalid_argument("unknown regularizer");
}

double boundary_l2_error(const BoundaryDatum& datum, const BoundaryField& gh)
{
    const BoundaryTraceSpace& trace = *gh.trace;
    double sum = 0.0;
    for (int i = 0; i < trace.size(); ++i) {
        const Vec2 a = gh.values[i];
        const Vec2 b = gh.values[trace.next(i)];
        integrate_edge(datum, trace, i, [&](double phi_i, double phi_j, const Vec2& g, double w) {
            sum += w * (g - phi_i * a - phi_j * b).squaredNorm();
        });
    }
    return std::sqrt(sum);
}

}  // namespace roughstokes
