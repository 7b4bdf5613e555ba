#include "roughstokes/boundary_data.hpp"
#include "roughstokes/verify.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace roughstokes;

namespace {

std::shared_ptr<const BoundaryTraceSpace> trace_of(int n)
{
    return std::make_shared<const BoundaryTraceSpace>(
        std::make_shared<const Mesh>(build_structured_unit_square(n)));
}

double compatibility_scale(const BoundaryField& gh)
{
    return 1e-12 * (1.0 + gh.sup_norm()) * gh.trace->perimeter();
}

// Datum (sin(pi x), 0) on the lid, zero on the other sides.
BoundaryDatum smooth_lid_datum()
{
    const auto zero = [](const Vec2&) { return Vec2(0, 0); };
    std::vector<DatumPiece> pieces{{0, 0, 1, zero}, {1, 0, 1, zero}, {2, 0, 1, zero},
                                   {3, 0, 1, [](const Vec2& x) { return Vec2(std::sin(std::numbers::pi * x.x()), 0); }}};
    return BoundaryDatum(unit_square_segments(), pieces);
}

double fitted_rate(const std::vector<double>& errors)
{
    return std::log2(errors[errors.size() - 2] / errors.back());
}

}  // namespace

TEST_CASE("unit square segments")
{
    const auto s = unit_square_segments();
    REQUIRE(s.size() == 4);
    CHECK(s[0].a == Vec2(0, 1));
    CHECK(s[0].b == Vec2(0, 0));
    CHECK(s[3].a == Vec2(1, 1));
    CHECK(s[3].b == Vec2(0, 1));
    CHECK(s[1].normal() == Vec2(0, -1));
    CHECK(s[3].normal() == Vec2(0, 1));
}

TEST_CASE("datum construction and jump points")
{
    const BoundaryDatum cavity = cavity_datum();
    CHECK(std::abs(cavity.flux()) < 1e-12);
    const auto jumps = cavity.jump_points();
    REQUIRE(jumps.size() == 2);
    for (const JumpPoint& j : jumps) {
        CHECK(j.point.y() == 1.0);
    }

    // A lid pushing fluid out through the top violates compatibility.
    const auto zero = [](const Vec2&) { return Vec2(0, 0); };
    std::vector<DatumPiece> bad{{0, 0, 1, zero}, {1, 0, 1, zero}, {2, 0, 1, zero},
                                {3, 0, 1, [](const Vec2&) { return Vec2(0, 1); }}};
    CHECK_THROWS_AS(BoundaryDatum(unit_square_segments(), bad), IncompatibleDatumError);

    CHECK(linear_datum().jump_points().empty());
    CHECK_THROWS(named_datum("nope"));
    CHECK(parse_jump_policy(to_string(JumpPolicy::Average)) == JumpPolicy::Average);
}

TEST_CASE("nodal values under each jump policy")
{
    const Vec2 corner(1, 1);  // right side (2) ends here, lid (3) starts
    CHECK(cavity_datum(JumpPolicy::LowerSegment).nodal_value(2, 3, corner) == Vec2(0, 0));
    CHECK(cavity_datum(JumpPolicy::LeftLimit).nodal_value(2, 3, corner) == Vec2(0, 0));
    CHECK(cavity_datum(JumpPolicy::RightLimit).nodal_value(2, 3, corner) == Vec2(1, 0));
    CHECK(cavity_datum(JumpPolicy::Average).nodal_value(2, 3, corner) == Vec2(0.5, 0));
}

TEST_CASE("segment integration weights")
{
    const BoundaryDatum d = linear_datum();
    double length = 0.0;
    double moment = 0.0;
    d.integrate(1, 0.25, 0.75, [&](const Vec2& p, const Vec2& g, double w) {
        length += w;
        moment += w * g.x() * p.x();
    });
    CHECK(length == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(moment == doctest::Approx((0.75 * 0.75 * 0.75 - 0.25 * 0.25 * 0.25) / 3).epsilon(1e-14));
}

TEST_CASE("compatibility defect")
{
    const auto trace = trace_of(4);
    BoundaryField zero{trace, std::vector<Vec2>(trace->size(), Vec2::Zero())};
    CHECK(compatibility_defect(zero) == 0.0);

    const double h = 0.25;
    CHECK(std::abs(compatibility_defect(lagrange_interpolant(cavity_datum(JumpPolicy::LowerSegment), trace))) < 1e-15);
    CHECK(std::abs(compatibility_defect(lagrange_interpolant(cavity_datum(JumpPolicy::Average), trace))) < 1e-15);
    // One-sided limits put (1, 0) at exactly one lid corner; only that side carries flux.
    CHECK(compatibility_defect(lagrange_interpolant(cavity_datum(JumpPolicy::LeftLimit), trace)) ==
          doctest::Approx(-h / 2).epsilon(1e-14));
    CHECK(compatibility_defect(lagrange_interpolant(cavity_datum(JumpPolicy::RightLimit), trace)) ==
          doctest::Approx(h / 2).epsilon(1e-14));

    CHECK(compatibility_defect(lagrange_interpolant(parabolic_normal_datum(), trace)) ==
          doctest::Approx(-h * h / 6).epsilon(1e-13));
}

TEST_CASE("correction node")
{
    const auto trace = trace_of(4);
    const int k = correction_node(*trace);
    CHECK(trace->point(k) == Vec2(0.5, 0));
    for (int j : {trace->prev(k), k, trace->next(k)}) {
        CHECK_FALSE(trace->is_corner(j));
    }
    CHECK_THROWS_AS(correction_node(*trace_of(2)), NoCorrectionNodeError);
}

TEST_CASE("modified Lagrange")
{
    SUBCASE("linear data: no-op")
    {
        const auto trace = trace_of(4);
        const BoundaryDatum d = linear_datum();
        const BoundaryField gh = modified_lagrange(d, trace);
        for (int i = 0; i < trace->size(); ++i) {
            const Vec2 x = trace->point(i);
            CHECK((gh.values[i] - Vec2(x.x(), -x.y())).norm() < 1e-14);
        }
        CHECK(gh.correction.norm() < 1e-14);
        CHECK(boundary_l2_error(d, gh) <= 1e-12);
    }

    SUBCASE("parabolic normal data")
    {
        const double h = 0.25;
        const auto trace = trace_of(4);
        const BoundaryDatum d = parabolic_normal_datum();
        const BoundaryField plain = lagrange_interpolant(d, trace);
        const BoundaryField gh = modified_lagrange(d, trace);
        const int k = gh.corrected_node;
        REQUIRE(k == correction_node(*trace));
        const Vec2 n = trace->edge_normal(k);
        CHECK((gh.values[k] - plain.values[k]).dot(n) == doctest::Approx(h / 6).epsilon(1e-12));
        // Tangential component untouched.
        CHECK((gh.values[k] - plain.values[k]).dot(trace->edge_tangent(k)) == doctest::Approx(0.0));
        CHECK(std::abs(compatibility_defect(gh)) <= compatibility_scale(gh));
        CHECK(compatibility_functional(gh, k) ==
              doctest::Approx(gh.values[k].dot(n) * h).epsilon(1e-12));

        // The correction shrinks with h.
        double previous = gh.correction.norm();
        for (int m : {8, 16, 32}) {
            const BoundaryField fine = modified_lagrange(d, trace_of(m));
            CHECK(fine.correction.norm() < previous);
            CHECK(fine.correction.norm() == doctest::Approx(1.0 / (6.0 * m)).epsilon(1e-10));
            previous = fine.correction.norm();
        }
    }

    SUBCASE("cavity: equals the plain interpolant")
    {
        const auto trace = trace_of(8);
        const BoundaryField plain = lagrange_interpolant(cavity_datum(), trace);
        const BoundaryField gh = modified_lagrange(cavity_datum(), trace);
        for (int i = 0; i < trace->size(); ++i) {
            CHECK((gh.values[i] - plain.values[i]).norm() < 1e-15);
        }
        CHECK(gh.sup_norm() == doctest::Approx(1.0));
    }

    SUBCASE("random data: only the correction node moves")
    {
        const auto trace = trace_of(6);
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const BoundaryDatum d = random_compatible_datum(seed);
            const BoundaryField plain = lagrange_interpolant(d, trace);
            const BoundaryField gh = modified_lagrange(d, trace);
            for (int i = 0; i < trace->size(); ++i) {
                if (i != gh.corrected_node) {
                    CHECK(gh.values[i] == plain.values[i]);
                }
            }
            CHECK(std::abs(compatibility_defect(gh)) <= compatibility_scale(gh));
            CHECK(gh.sup_norm() <= plain.sup_norm() + gh.correction.norm() + 1e-14);
        }
    }
}

TEST_CASE("L2 projection")
{
    const auto trace = trace_of(4);
    const int m = trace->size();

    SUBCASE("zero and identity on G_h")
    {
        const auto zero = [](const Vec2&) { return Vec2(0, 0); };
        const BoundaryDatum z(unit_square_segments(), {{0, 0, 1, zero}, {1, 0, 1, zero}, {2, 0, 1, zero}, {3, 0, 1, zero}});
        CHECK(l2_projection(z, trace).sup_norm() == 0.0);

        const BoundaryField gh = modified_lagrange(parabolic_normal_datum(), trace);
        const BoundaryField again = l2_projection(as_datum(gh, unit_square_segments()), trace);
        for (int i = 0; i < m; ++i) {
            CHECK((again.values[i] - gh.values[i]).norm() < 1e-12);
        }
        CHECK(std::abs(again.multiplier) < 1e-10);
        const BoundaryField twice = l2_projection(as_datum(again, unit_square_segments()), trace);
        for (int i = 0; i < m; ++i) {
            CHECK((twice.values[i] - again.values[i]).norm() < 1e-12);
        }
    }

    SUBCASE("matches a dense KKT solve")
    {
        const BoundaryDatum d = random_compatible_datum(42);
        const BoundaryField gh = l2_projection(d, trace);
        const int n = 2 * m + 1;
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        const auto& segs = d.segments();
        for (int e = 0; e < m; ++e) {
            const int a = e;
            const int b = trace->next(e);
            const double h = trace->edge_length(e);
            const Vec2 nrm = trace->edge_normal(e);
            for (int c = 0; c < 2; ++c) {
                k(2 * a + c, 2 * a + c) += h / 3;
                k(2 * b + c, 2 * b + c) += h / 3;
                k(2 * a + c, 2 * b + c) += h / 6;
                k(2 * b + c, 2 * a + c) += h / 6;
                k(n - 1, 2 * a + c) += 0.5 * h * nrm[c];
                k(n - 1, 2 * b + c) += 0.5 * h * nrm[c];
                k(2 * a + c, n - 1) += 0.5 * h * nrm[c];
                k(2 * b + c, n - 1) += 0.5 * h * nrm[c];
            }
            const Segment& seg = segs[trace->edge_segment(e)];
            const Vec2 pa = trace->point(a);
            const Vec2 pb = trace->point(b);
            d.integrate(trace->edge_segment(e), seg.parameter(pa), seg.parameter(pb),
                        [&](const Vec2& p, const Vec2& g, double w) {
                            const double s = (p - pa).norm() / h;
                            for (int c = 0; c < 2; ++c) {
                                rhs[2 * a + c] += w * (1 - s) * g[c];
                                rhs[2 * b + c] += w * s * g[c];
                            }
                        });
        }
        const Eigen::VectorXd x = k.fullPivLu().solve(rhs);
        for (int i = 0; i < m; ++i) {
            CHECK((gh.values[i] - Vec2(x[2 * i], x[2 * i + 1])).norm() < 1e-10);
        }
        CHECK(std::abs(compatibility_defect(gh)) <= compatibility_scale(gh));
    }
}

TEST_CASE("Carstensen")
{
    const auto trace = trace_of(4);

    SUBCASE("constant data")
    {
        const auto c = [](const Vec2&) { return Vec2(0.3, -0.7); };
        const BoundaryDatum d(unit_square_segments(), {{0, 0, 1, c}, {1, 0, 1, c}, {2, 0, 1, c}, {3, 0, 1, c}});
        const BoundaryField gh = carstensen(d, trace);
        for (const Vec2& v : gh.values) {
            CHECK((v - Vec2(0.3, -0.7)).norm() < 1e-14);
        }
    }

    SUBCASE("linear data at interior nodes of a side")
    {
        const BoundaryField gh = carstensen(linear_datum(), trace);
        for (int i = 0; i < trace->size(); ++i) {
            if (!trace->is_corner(i)) {
                const Vec2 x = trace->point(i);
                CHECK((gh.values[i] - Vec2(x.x(), -x.y())).norm() < 1e-14);
            }
        }
    }

    SUBCASE("cavity: weighted averages at the lid corners")
    {
        const BoundaryField gh = carstensen(cavity_datum(), trace);
        for (int i = 0; i < trace->size(); ++i) {
            const Vec2 x = trace->point(i);
            double expected = 0.0;
            if (x.y() == 1.0) {
                // Half of the hat lies on the lid unless the node is strictly inside it.
                expected = (x.x() == 0.0 || x.x() == 1.0) ? 0.5 : 1.0;
            }
            CHECK(gh.values[i].x() == doctest::Approx(expected).epsilon(1e-14));
            CHECK(std::abs(gh.values[i].y()) < 1e-14);
        }
        CHECK(std::abs(compatibility_defect(gh)) <= compatibility_scale(gh));
    }

    SUBCASE("random data stays compatible")
    {
        for (std::uint64_t seed = 3; seed < 8; ++seed) {
            const BoundaryField gh = carstensen(random_compatible_datum(seed, JumpPolicy::Average), trace);
            CHECK(std::abs(compatibility_defect(gh)) <= compatibility_scale(gh));
        }
    }
}

TEST_CASE("boundary L2 error rates")
{
    std::vector<double> cavity;
    std::vector<double> smooth;
    for (int n : {8, 16, 32, 64}) {
        const auto trace = trace_of(n);
        cavity.push_back(boundary_l2_error(cavity_datum(), modified_lagrange(cavity_datum(), trace)));
        smooth.push_back(boundary_l2_error(smooth_lid_datum(), modified_lagrange(smooth_lid_datum(), trace)));
    }
    CHECK(fitted_rate(cavity) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(fitted_rate(smooth) == doctest::Approx(2.0).epsilon(0.05));
    for (std::size_t i = 0; i < cavity.size(); ++i) {
        const double h = 1.0 / (8 << i);
        CHECK(cavity[i] / std::sqrt(h) == doctest::Approx(cavity[0] / std::sqrt(1.0 / 8)).epsilon(1e-6));
    }
}

TEST_CASE("regularizer dispatch")
{
    const auto trace = trace_of(4);
    for (Regularizer r : {Regularizer::ModifiedLagrange, Regularizer::L2Projection, Regularizer::Carstensen}) {
        CHECK(parse_regularizer(to_string(r)) == r);
        const BoundaryField gh = regularize(r, parabolic_normal_datum(), trace);
        CHECK(std::abs(compatibility_defect(gh)) <= compatibility_scale(gh));
    }
    CHECK_THROWS(parse_regularizer("spline"));
}
