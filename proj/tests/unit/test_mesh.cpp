#include "roughstokes/mesh.hpp"

#include "doctest.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

using namespace roughstokes;

namespace {

// Edge audit from scratch: count incident triangles per vertex pair.
void check_conforming(const Mesh& mesh)
{
    std::map<std::pair<int, int>, int> count;
    for (const Triangle& t : mesh.triangles()) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[(k + 1) % 3];
            const int b = t[(k + 2) % 3];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    }
    int boundary = 0;
    for (const auto& [edge, c] : count) {
        REQUIRE((c == 1 || c == 2));
        boundary += c == 1;
    }
    CHECK(boundary == static_cast<int>(mesh.boundary_edges().size()));
    for (const BoundaryEdge& be : mesh.boundary_edges()) {
        const auto key = std::make_pair(std::min(be.v[0], be.v[1]), std::max(be.v[0], be.v[1]));
        CHECK(count.at(key) == 1);
    }
    // Euler characteristic of a simply connected polygon.
    CHECK(mesh.num_vertices() - static_cast<int>(count.size()) + mesh.num_triangles() == 1);
    CHECK(static_cast<int>(count.size()) == mesh.num_edges());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        CHECK(mesh.area(t) > 0.0);
    }
    CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-12));
}

Mesh two_triangles()
{
    return Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
                {{{0, 1}, 0}, {{1, 2}, 1}, {{2, 3}, 2}, {{3, 0}, 3}});
}

}  // namespace

TEST_CASE("structured unit square counts")
{
    const Mesh m1 = build_structured_unit_square(1);
    CHECK(m1.num_vertices() == 4);
    CHECK(m1.num_triangles() == 2);
    CHECK(m1.boundary_edges().size() == 4);

    CHECK(build_structured_unit_square(16).num_vertices() == 289);
    CHECK(build_structured_unit_square(32).num_vertices() == 1089);

    const Mesh m = build_structured_unit_square(5);
    CHECK(m.num_triangles() == 50);
    check_conforming(m);
    CHECK(m.segments().size() == 4);
}

TEST_CASE("structured mesh segment tags")
{
    const Mesh m = build_structured_unit_square(4);
    for (const BoundaryEdge& be : m.boundary_edges()) {
        const Vec2 mid = 0.5 * (m.vertex(be.v[0]) + m.vertex(be.v[1]));
        switch (be.segment) {
        case 0: CHECK(mid.x() == 0.0); break;
        case 1: CHECK(mid.y() == 0.0); break;
        case 2: CHECK(mid.x() == 1.0); break;
        case 3: CHECK(mid.y() == 1.0); break;
        default: FAIL("bad segment id");
        }
    }
}

TEST_CASE("refine_uniform")
{
    const Mesh m = build_structured_unit_square(16);
    const Mesh f = refine_uniform(m);
    CHECK(f.num_vertices() == 1089);
    CHECK(f.num_vertices() == m.num_vertices() + m.num_edges());
    CHECK(refine_uniform(f).num_vertices() == 4225);
    check_conforming(f);

    const Mesh two = two_triangles();
    const Mesh eight = refine_uniform(two);
    REQUIRE(eight.num_triangles() == 8);
    REQUIRE(eight.has_hierarchy());
    std::vector<double> child_sum(2, 0.0);
    for (int t = 0; t < 8; ++t) {
        const int p = eight.parent_of(t);
        CHECK(eight.area(t) == doctest::Approx(two.area(p) / 4).epsilon(1e-15));
        child_sum[p] += eight.area(t);
    }
    for (int p = 0; p < 2; ++p) {
        CHECK(std::abs(child_sum[p] - two.area(p)) <= 4e-15);
    }
    CHECK(eight.min_angle() == doctest::Approx(two.min_angle()).epsilon(1e-12));
}

TEST_CASE("refine_marked: empty marking")
{
    const Mesh m = build_structured_unit_square(3);
    const Mesh r = refine_marked(m, {});
    CHECK(r.vertices() == m.vertices());
    CHECK(r.triangles() == m.triangles());
}

TEST_CASE("refine_marked: one interior triangle stays conforming")
{
    const Mesh m = build_structured_unit_square(2);
    for (Bisection rule : {Bisection::RefinementEdge, Bisection::AllEdges}) {
        for (int t = 0; t < m.num_triangles(); ++t) {
            const std::vector<int> marked{t};
            const Mesh r = refine_marked(m, marked, rule);
            check_conforming(r);
            // The marked triangle has no child equal to itself.
            int children = 0;
            for (int c = 0; c < r.num_triangles(); ++c) {
                if (r.parent_of(c) == t) {
                    ++children;
                    CHECK(r.area(c) <= 0.5 * m.area(t) + 1e-15);
                }
            }
            CHECK(children >= 2);
        }
    }
}

TEST_CASE("refine_marked: full marking at least doubles")
{
    const Mesh m = build_structured_unit_square(3);
    std::vector<int> all(m.num_triangles());
    std::iota(all.begin(), all.end(), 0);
    for (Bisection rule : {Bisection::RefinementEdge, Bisection::AllEdges}) {
        const Mesh r = refine_marked(m, all, rule);
        CHECK(r.num_triangles() >= 2 * m.num_triangles());
        check_conforming(r);
    }
}

TEST_CASE("refine_marked: closure is bounded and shape is preserved")
{
    std::mt19937 gen(7);
    Mesh m = build_structured_unit_square(4);
    const double initial_angle = m.min_angle();
    for (int step = 0; step < 12; ++step) {
        std::uniform_int_distribution<int> pick(0, m.num_triangles() - 1);
        std::vector<int> marked;
        for (int k = 0; k < 3; ++k) {
            marked.push_back(pick(gen));
        }
        std::sort(marked.begin(), marked.end());
        marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
        const Mesh r = refine_marked(m, marked, Bisection::RefinementEdge);
        // Each bisection adds exactly one triangle; the marked ones need one each.
        const int bisections = r.num_triangles() - m.num_triangles();
        CHECK(bisections >= static_cast<int>(marked.size()));
        CHECK(bisections - static_cast<int>(marked.size()) <= 10 * static_cast<int>(marked.size()));
        check_conforming(r);
        CHECK(r.min_angle() >= 0.5 * initial_angle);
        m = r;
    }
}

TEST_CASE("locate_point")
{
    const Mesh m = refine_marked(build_structured_unit_square(3), std::vector<int>{4, 9});

    SUBCASE("barycenter")
    {
        for (int t = 0; t < m.num_triangles(); ++t) {
            const Location loc = locate_point(m, m.centroid(t));
            CHECK(loc.triangle == t);
            for (double l : loc.bary) {
                CHECK(l == doctest::Approx(1.0 / 3).epsilon(1e-12));
            }
        }
    }

    SUBCASE("shared vertex resolves to the lowest incident id")
    {
        for (int v = 0; v < m.num_vertices(); ++v) {
            int lowest = m.num_triangles();
            for (int t = 0; t < m.num_triangles(); ++t) {
                const Triangle& tri = m.triangle(t);
                if (std::find(tri.begin(), tri.end(), v) != tri.end()) {
                    lowest = std::min(lowest, t);
                }
            }
            const Location loc = locate_point(m, m.vertex(v));
            CHECK(loc.triangle == lowest);
            CHECK(*std::max_element(loc.bary.begin(), loc.bary.end()) == doctest::Approx(1.0));
        }
    }

    SUBCASE("random points agree with a brute-force scan")
    {
        std::mt19937 gen(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 500; ++k) {
            const Vec2 p(u(gen), u(gen));
            int expected = -1;
            for (int t = 0; t < m.num_triangles() && expected < 0; ++t) {
                const auto c = m.corners(t);
                const Barycentric l = barycentric(c[0], c[1], c[2], p);
                if (std::min({l[0], l[1], l[2]}) >= -1e-12) {
                    expected = t;
                }
            }
            const Location loc = locate_point(m, p);
            CHECK(loc.triangle == expected);
            CHECK(loc.bary[0] + loc.bary[1] + loc.bary[2] == doctest::Approx(1.0));
            const Vec2 back = from_barycentric(m.corners(loc.triangle)[0], m.corners(loc.triangle)[1],
                                               m.corners(loc.triangle)[2], loc.bary);
            CHECK((back - p).norm() < 1e-14);
        }
    }

    SUBCASE("candidate search matches the full scan")
    {
        const Vec2 p(0.61, 0.27);
        const std::vector<int> wrong{0};
        CHECK(locate_point(m, p, wrong).triangle == locate_point(m, p).triangle);
    }

    SUBCASE("outside the domain")
    {
        CHECK_THROWS_AS(locate_point(m, Vec2(1.1, 0.5)), PointOutsideDomainError);
        CHECK_THROWS_AS(locate_point(m, Vec2(-1e-9, 0.5)), PointOutsideDomainError);
        CHECK_NOTHROW(locate_point(m, Vec2(-1e-14, 0.5)));
    }
}

TEST_CASE("mesh file round trip")
{
    const Mesh m = refine_marked(build_structured_unit_square(2), std::vector<int>{1});
    std::stringstream io;
    write_mesh(io, m);
    const Mesh r = read_mesh(io);
    CHECK(r.num_vertices() == m.num_vertices());
    CHECK(r.num_triangles() == m.num_triangles());
    CHECK(r.boundary_edges().size() == m.boundary_edges().size());
    CHECK(r.vertices() == m.vertices());
    CHECK(r.total_area() == doctest::Approx(1.0));
    check_conforming(r);

    std::istringstream bad("3 1 0\n0 0\n1 0\n");
    CHECK_THROWS_AS(read_mesh(bad), MeshError);
}

TEST_CASE("vtk export")
{
    const Mesh m = build_structured_unit_square(1);
    const std::vector<std::pair<std::string, std::vector<double>>> data{{"eta", {0.5, 0.25}}};
    std::ostringstream out;
    write_vtk(out, m, data);
    const std::string s = out.str();
    CHECK(s.rfind("# vtk DataFile Version 3.0", 0) == 0);
    CHECK(s.find("POINTS 4 double") != std::string::npos);
    CHECK(s.find("CELLS 2 8") != std::string::npos);
    CHECK(s.find("CELL_DATA 2") != std::string::npos);
    CHECK(s.find("SCALARS eta double 1") != std::string::npos);

    const std::vector<std::pair<std::string, std::vector<double>>> wrong{{"eta", {1.0}}};
    std::ostringstream sink;
    CHECK_THROWS_AS(write_vtk(sink, m, wrong), std::invalid_argument);
}
