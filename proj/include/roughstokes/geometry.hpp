#pragma once

#include <Eigen/Dense>

#include <array>

namespace roughstokes {

using Vec2 = Eigen::Vector2d;
using Barycentric = std::array<double, 3>;

/// Signed area of (a, b, c); positive for counterclockwise order.
inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

/// Barycentric coordinates of p with respect to the triangle (a, b, c).
inline Barycentric barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p)
{
    const double area = signed_area(a, b, c);
    return {signed_area(p, b, c) / area, signed_area(a, p, c) / area, signed_area(a, b, p) / area};
}

inline Vec2 from_barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Barycentric& l)
{
    return l[0] * a + l[1] * b + l[2] * c;
}

}  // namespace roughstokes
