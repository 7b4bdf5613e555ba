#pragma once

#include "roughstokes/geometry.hpp"

#include <stdexcept>
#include <vector>

namespace roughstokes {

class UnsupportedDegreeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Points and weights on a reference cell. Triangle points are given in the
/// reference coordinates (x, y) of {x >= 0, y >= 0, x + y <= 1}, so the
/// weights sum to 1/2; segment points live in [0, 1] (stored in x) and the
/// weights sum to 1.
struct QuadratureRule {
    int degree = 0;
    std::vector<Vec2> points;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }

    /// Barycentric coordinates (1 - x - y, x, y) of point q.
    Barycentric barycentric(std::size_t q) const
    {
        return {1.0 - points[q].x() - points[q].y(), points[q].x(), points[q].y()};
    }
};

inline constexpr int kMaxTriangleDegree = 8;
inline constexpr int kMaxSegmentDegree = 9;

/// Symmetric rule with positive weights, exact for total degree <= `degree`.
/// Rules are built once and shared; the returned reference stays valid.
const QuadratureRule& triangle_rule(int degree);

/// Gauss-Legendre rule on [0, 1], exact for polynomials of degree <= `degree`.
const QuadratureRule& segment_rule(int degree);

}  // namespace roughstokes
