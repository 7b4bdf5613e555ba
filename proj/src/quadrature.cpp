#include "roughstokes/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace roughstokes {
namespace {

// Orbit generators in barycentric form; weights are relative to unit area.
struct RuleBuilder {
    QuadratureRule rule;

    void centroid(double w) { add(1.0 / 3.0, 1.0 / 3.0, w); }

    // (a, a, 1 - 2a) and its distinct permutations.
    void s21(double a, double w)
    {
        const double b = 1.0 - 2.0 * a;
        add(a, a, w);
        add(a, b, w);
        add(b, a, w);
    }

    // All six permutations of (a, b, 1 - a - b).
    void s111(double a, double b, double w)
    {
        const double c = 1.0 - a - b;
        add(a, b, w);
        add(b, a, w);
        add(a, c, w);
        add(c, a, w);
        add(b, c, w);
        add(c, b, w);
    }

    void add(double x, double y, double w)
    {
        rule.points.emplace_back(x, y);
        rule.weights.push_back(0.5 * w);
    }
};

QuadratureRule make_triangle_rule(int degree)
{
    RuleBuilder b;
    switch (degree) {
    case 1:
        b.centroid(1.0);
        break;
    case 2:
        b.s21(1.0 / 6.0, 1.0 / 3.0);
        break;
    case 3:
    case 4:
        b.s21(0.44594849091596488632, 0.2233815896780114657);
        b.s21(0.09157621350977074346, 0.10995174365532186764);
        break;
    case 5: {
        const double r = std::sqrt(15.0);
        b.centroid(9.0 / 40.0);
        b.s21((6.0 - r) / 21.0, (155.0 - r) / 1200.0);
        b.s21((6.0 + r) / 21.0, (155.0 + r) / 1200.0);
        break;
    }
    case 6:
        b.s21(0.24928674517091042129, 0.11678627572637936603);
        b.s21(0.06308901449150222834, 0.050844906370206816921);
        b.s111(0.053145049844816947353, 0.31035245103378440542, 0.082851075618373575194);
        break;
    case 7:
    case 8:
        b.centroid(0.14431560767778716825);
        b.s21(0.45929258829272315603, 0.095091634267284624794);
        b.s21(0.17056930775176020662, 0.10321737053471825028);
        b.s21(0.050547228317030975458, 0.032458497623198080311);
        b.s111(0.0083947774099576053372, 0.26311282963463811342, 0.027230314174434994265);
        break;
    default:
        throw UnsupportedDegreeError("triangle_rule: unsupported degree " + std::to_string(degree));
    }
    b.rule.degree = degree;
    return b.rule;
}

// Newton iteration on the Legendre polynomial roots, mapped to [0, 1].
QuadratureRule make_segment_rule(int degree)
{
    if (degree < 1 || degree > kMaxSegmentDegree) {
        throw UnsupportedDegreeError("segment_rule: unsupported degree " + std::to_string(degree));
    }
    const int n = (degree + 2) / 2;
    QuadratureRule rule;
    rule.degree = degree;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        rule.points.emplace_back(0.5 * (1.0 - x), 0.0);
        rule.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
    }
    return rule;
}

template <int N, typename Make>
const QuadratureRule& cached(int degree, int lo, Make make)
{
    static const auto rules = [&] {
        std::array<QuadratureRule, N> all;
        for (int d = lo; d < lo + N; ++d) {
            all[d - lo] = make(d);
        }
        return all;
    }();
    return rules[degree - lo];
}

}  // namespace

const QuadratureRule& triangle_rule(int degree)
{
    if (degree < 1 || degree > kMaxTriangleDegree) {
        throw UnsupportedDegreeError("triangle_rule: unsupported degree " + std::to_string(degree));
    }
    return cached<kMaxTriangleDegree>(degree, 1, make_triangle_rule);
}

const QuadratureRule& segment_rule(int degree)
{
    if (degree < 1 || degree > kMaxSegmentDegree) {
        throw UnsupportedDegreeError("segment_rule: unsupported degree " + std::to_string(degree));
    }
    return cached<kMaxSegmentDegree>(degree, 1, make_segment_rule);
}

}  // namespace roughstokes
