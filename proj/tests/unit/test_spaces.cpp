#include "roughstokes/spaces.hpp"

#include "doctest.h"

#include <map>
#include <random>
#include <set>

using namespace roughstokes;

namespace {

MeshPtr unit_square(int n) { return std::make_shared<const Mesh>(build_structured_unit_square(n)); }

Barycentric random_bary(std::mt19937& gen)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a = u(gen);
    double b = u(gen);
    if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    return {1.0 - a - b, a, b};
}

}  // namespace

TEST_CASE("dof counts on the single-square mesh")
{
    const MeshPtr m = unit_square(1);
    CHECK(build_space(m, Family::P1, 1).dof_count() == 4);
    CHECK(build_space(m, Family::P2, 1).dof_count() == 9);
    CHECK(build_space(m, Family::P1Bubble).dof_count() == 12);
    CHECK(build_space(m, Family::P1Pressure).dof_count() == 4);
    CHECK(build_space(m, Family::P2).dof_count() == 18);
}

TEST_CASE("dof numbering and continuity")
{
    const MeshPtr m = unit_square(3);
    const FESpace p2 = build_space(m, Family::P2, 1);
    for (int t = 0; t < m->num_triangles(); ++t) {
        const auto d = p2.cell_dofs(t);
        for (int i = 0; i < 3; ++i) {
            CHECK(d[i] == m->triangle(t)[i]);
            CHECK(d[3 + i] == m->num_vertices() + m->triangle_edges(t)[i]);
        }
    }
    // Shared edge DOFs coincide: the edge midpoint seen from either side.
    for (const Edge& e : m->edges()) {
        if (e.on_boundary()) {
            continue;
        }
        const Vec2 mid = 0.5 * (m->vertex(e.v[0]) + m->vertex(e.v[1]));
        std::set<int> found;
        for (int t : {e.left, e.right}) {
            for (int k : p2.cell_dofs(t)) {
                if ((p2.nodal_point(k) - mid).norm() < 1e-14) {
                    found.insert(k);
                }
            }
        }
        CHECK(found.size() == 1);
    }

    const FESpace mini = build_space(m, Family::P1Bubble, 1);
    std::set<int> bubbles;
    for (int t = 0; t < m->num_triangles(); ++t) {
        const int b = mini.cell_dofs(t)[3];
        CHECK(b == m->num_vertices() + t);
        CHECK_FALSE(mini.is_boundary_dof(b));
        bubbles.insert(b);
    }
    CHECK(static_cast<int>(bubbles.size()) == m->num_triangles());
}

TEST_CASE("boundary dofs")
{
    const MeshPtr m = unit_square(4);
    const FESpace p2 = build_space(m, Family::P2, 1);
    CHECK(p2.boundary_dofs().size() == 32);
    for (int k : p2.boundary_dofs()) {
        const Vec2 x = p2.nodal_point(k);
        CHECK(std::min({x.x(), x.y(), 1.0 - x.x(), 1.0 - x.y()}) < 1e-14);
    }
    CHECK(build_space(m, Family::P1Bubble, 1).boundary_dofs().size() == 16);
}

TEST_CASE("basis values: Lagrange and bubble properties")
{
    const BasisValues p1 = eval_basis(Family::P1, {1, 0, 0});
    CHECK(p1.count == 3);
    CHECK(p1.values[0] == 1.0);
    CHECK(p1.values[1] == 0.0);
    CHECK(p1.values[2] == 0.0);

    CHECK(eval_basis(Family::P1Bubble, {1.0 / 3, 1.0 / 3, 1.0 / 3}).values[3] == doctest::Approx(1.0).epsilon(1e-15));
    for (const Barycentric& l : {Barycentric{0, 0.3, 0.7}, Barycentric{0.4, 0, 0.6}, Barycentric{0.2, 0.8, 0}}) {
        CHECK(eval_basis(Family::P1Bubble, l).values[3] == 0.0);
    }

    const std::array<Barycentric, 6> nodes{Barycentric{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                           {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
    for (int j = 0; j < 6; ++j) {
        const BasisValues b = eval_basis(Family::P2, nodes[j]);
        REQUIRE(b.count == 6);
        for (int i = 0; i < 6; ++i) {
            CHECK(b.values[i] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("partition of unity and finite-difference gradients")
{
    std::mt19937 gen(3);
    const double h = 1e-6;
    for (int k = 0; k < 50; ++k) {
        const Barycentric l = random_bary(gen);
        for (Family f : {Family::P1, Family::P2}) {
            const BasisValues b = eval_basis(f, l);
            double sum = 0.0;
            Vec2 gsum = Vec2::Zero();
            for (int i = 0; i < b.count; ++i) {
                sum += b.values[i];
                gsum += b.gradients[i];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(gsum.norm() < 1e-13);
        }
        for (Family f : {Family::P1Bubble, Family::P2}) {
            const BasisValues b = eval_basis(f, l);
            // Reference coordinates (x, y) = (l1, l2).
            const BasisValues xp = eval_basis(f, {l[0] - h, l[1] + h, l[2]});
            const BasisValues xm = eval_basis(f, {l[0] + h, l[1] - h, l[2]});
            const BasisValues yp = eval_basis(f, {l[0] - h, l[1], l[2] + h});
            const BasisValues ym = eval_basis(f, {l[0] + h, l[1], l[2] - h});
            for (int i = 0; i < b.count; ++i) {
                const Vec2 fd((xp.values[i] - xm.values[i]) / (2 * h), (yp.values[i] - ym.values[i]) / (2 * h));
                CHECK((fd - b.gradients[i]).norm() <= 1e-7 * std::max(1.0, b.gradients[i].norm()));
            }
        }
    }
}

TEST_CASE("edge traces agree across a shared edge")
{
    const MeshPtr m = unit_square(2);
    const FESpace p2 = build_space(m, Family::P2, 1);
    for (const Edge& e : m->edges()) {
        if (e.on_boundary()) {
            continue;
        }
        for (int s = 0; s < 5; ++s) {
            const double tpar = 0.1 + 0.2 * s;
            const Vec2 x = (1 - tpar) * m->vertex(e.v[0]) + tpar * m->vertex(e.v[1]);
            std::map<int, double> left;
            for (int side = 0; side < 2; ++side) {
                const int t = side == 0 ? e.left : e.right;
                const auto c = m->corners(t);
                const BasisValues b = eval_basis(Family::P2, barycentric(c[0], c[1], c[2], x));
                const auto d = p2.cell_dofs(t);
                for (int i = 0; i < 6; ++i) {
                    if (side == 0) {
                        left[d[i]] = b.values[i];
                    } else if (left.count(d[i])) {
                        CHECK(b.values[i] == doctest::Approx(left[d[i]]).epsilon(1e-13));
                    } else {
                        CHECK(std::abs(b.values[i]) < 1e-13);
                    }
                }
            }
        }
    }
}

TEST_CASE("nodal interpolation")
{
    const MeshPtr m = unit_square(3);
    std::mt19937 gen(5);

    const FESpace v = build_space(m, Family::P1Bubble);
    CHECK(interpolate_nodal(v, [](const Vec2&) { return Vec2(0, 0); }).isZero());

    const auto linear = [](const Vec2& x) { return Vec2(1 + 2 * x.x() - x.y(), 0.5 * x.x() + 3 * x.y()); };
    const FESpace p1 = build_space(m, Family::P1, 2);
    const Eigen::VectorXd c1 = interpolate_nodal(p1, linear);

    const auto quad = [](const Vec2& x) { return Vec2(x.x() * x.x(), x.x() * x.y()); };
    const FESpace p2 = build_space(m, Family::P2);
    const Eigen::VectorXd c2 = interpolate_nodal(p2, quad);

    for (int k = 0; k < 100; ++k) {
        const int t = std::uniform_int_distribution<int>(0, m->num_triangles() - 1)(gen);
        const Barycentric l = random_bary(gen);
        const auto c = m->corners(t);
        const Vec2 x = from_barycentric(c[0], c[1], c[2], l);
        CHECK((p1.value(c1, t, l) - linear(x)).norm() < 1e-13);
        CHECK((p2.value(c2, t, l) - quad(x)).norm() < 1e-12);
        Eigen::Matrix2d g;
        g << 2 * x.x(), 0, x.y(), x.x();
        CHECK((p2.gradient(c2, t, l) - g).norm() < 1e-12);
    }

    const FESpace pressure = build_space(m, Family::P1Pressure);
    const Eigen::VectorXd cp = interpolate_nodal(pressure, [](const Vec2& x) { return 2.0 - x.y(); });
    CHECK(pressure.scalar_value(cp, 0, {1.0 / 3, 1.0 / 3, 1.0 / 3}) ==
          doctest::Approx(2.0 - m->centroid(0).y()));
}

TEST_CASE("boundary trace space")
{
    const MeshPtr m = unit_square(4);
    const BoundaryTraceSpace g(m);
    REQUIRE(g.size() == 16);
    CHECK(g.perimeter() == doctest::Approx(4.0));
    int corners = 0;
    std::set<int> seen;
    for (int i = 0; i < g.size(); ++i) {
        CHECK(m->is_boundary_vertex(g.node(i)));
        CHECK(g.position(g.node(i)) == i);
        seen.insert(g.node(i));
        CHECK(g.edge_length(i) == doctest::Approx(0.25));
        CHECK((g.point(g.next(i)) - g.point(i)).norm() == doctest::Approx(g.edge_length(i)));
        CHECK(g.edge_normal(i).norm() == doctest::Approx(1.0));
        // Counterclockwise traversal: the normal points away from the square's center.
        const Vec2 mid = 0.5 * (g.point(i) + g.point(g.next(i)));
        CHECK(g.edge_normal(i).dot(mid - Vec2(0.5, 0.5)) > 0.0);
        CHECK(signed_area(g.point(i), g.point(g.next(i)), Vec2(0.5, 0.5)) > 0.0);
        corners += g.is_corner(i);
        if (g.edge_segment(i) == g.edge_segment(g.next(i))) {
            CHECK((g.edge_normal(i) - g.edge_normal(g.next(i))).norm() < 1e-15);
        }
    }
    CHECK(corners == 4);
    CHECK(static_cast<int>(seen.size()) == 16);
    CHECK(g.position(6) == -1);
}
