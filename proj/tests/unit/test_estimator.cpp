#include "roughstokes/estimator.hpp"
#include "roughstokes/adaptivity.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>

using namespace roughstokes;

namespace {

MeshPtr unit_square(int n) { return std::make_shared<const Mesh>(build_structured_unit_square(n)); }

StokesSolution solve_cavity(const MeshPtr& mesh, Method method, double scale = 1.0)
{
    const BoundaryDatum d = scale == 1.0 ? cavity_datum() : cavity_datum().scaled(scale);
    return solve(mesh, method, modified_lagrange(d, std::make_shared<const BoundaryTraceSpace>(mesh)));
}

}  // namespace

TEST_CASE("patch test: every indicator vanishes")
{
    const MeshPtr mesh = unit_square(4);
    const auto trace = std::make_shared<const BoundaryTraceSpace>(mesh);
    for (Method method : {Method::Mini, Method::HoodTaylor}) {
        const StokesSolution s = solve(mesh, method, modified_lagrange(linear_datum(), trace));
        const IndicatorField f = indicators(s);
        CHECK(f.global < 1e-10);
        for (int e = 0; e < mesh->num_edges(); ++e) {
            if (!mesh->edge(e).on_boundary()) {
                CHECK(edge_jump(s, e).squared_norm() < 1e-20);
            }
        }
    }
}

TEST_CASE("edge jump of a single hat across the diagonal")
{
    // Two triangles of the unit square split along (0,0)-(1,1).
    const MeshPtr mesh = std::make_shared<const Mesh>(
        std::vector<Vec2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, std::vector<Triangle>{{0, 1, 2}, {0, 2, 3}},
        std::vector<BoundaryEdge>{{{0, 1}, 1}, {{1, 2}, 2}, {{2, 3}, 3}, {{3, 0}, 0}});
    StokesSolution s{mesh, Method::Mini, build_space(mesh, Family::P1Bubble), build_space(mesh, Family::P1Pressure),
                     {}, {}};
    s.u = Eigen::VectorXd::Zero(s.velocity.dof_count());
    s.p = Eigen::VectorXd::Zero(s.pressure.dof_count());
    s.u[s.velocity.dof(0, 1)] = 1.0;  // x-component hat at (1, 0)

    const int diag = mesh->find_edge(0, 2);
    REQUIRE(diag >= 0);
    const EdgeJump j = edge_jump(s, diag);
    // The hat is x - y on the lower triangle and zero above: the normal
    // derivatives sum to -sqrt(2) for the x-component.
    for (double t : {0.0, 0.3, 1.0}) {
        CHECK(std::abs(j(t).x()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(j(t).y() == doctest::Approx(0.0));
    }
    CHECK(j.squared_norm() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));

    // Unit pressure plus the matching normal stress cancel across the edge.
    s.u.setZero();
    s.p.setOnes();
    CHECK(edge_jump(s, diag).squared_norm() < 1e-28);

    CHECK_THROWS_AS(edge_jump(s, mesh->find_edge(0, 1)), BoundaryEdgeError);
    CHECK_THROWS_AS(boundary_stress(s, diag), std::invalid_argument);
    // A unit pressure against the wall: |p n|^2 integrated over a unit edge.
    CHECK(boundary_stress(s, mesh->find_edge(0, 1)).squared_norm() == doctest::Approx(1.0));
}

TEST_CASE("indicator bookkeeping on the cavity")
{
    const MeshPtr mesh = unit_square(6);
    for (Method method : {Method::Mini, Method::HoodTaylor}) {
        const StokesSolution s = solve_cavity(mesh, method);
        const IndicatorField f = indicators(s);
        double sum = 0.0;
        for (int t = 0; t < mesh->num_triangles(); ++t) {
            CHECK(f.residual[t] >= 0.0);
            CHECK(f.divergence[t] >= 0.0);
            CHECK(f.jump[t] >= 0.0);
            CHECK(f.eta[t] * f.eta[t] == doctest::Approx(f.residual[t] + f.divergence[t] + f.jump[t]));
            sum += f.residual[t] + f.divergence[t] + f.jump[t];
        }
        CHECK(f.global == std::sqrt(sum));

        // Each interior edge is charged to both neighbors with their own diameters.
        double by_edge = 0.0;
        for (int e = 0; e < mesh->num_edges(); ++e) {
            const Edge& edge = mesh->edge(e);
            if (edge.on_boundary()) {
                CHECK(f.edge_jump_norm2[e] == 0.0);
                continue;
            }
            by_edge += 0.5 * (std::pow(mesh->diameter(edge.left), 3) + std::pow(mesh->diameter(edge.right), 3)) *
                       f.edge_jump_norm2[e];
        }
        double by_element = 0.0;
        for (double j : f.jump) {
            by_element += j;
        }
        CHECK(by_element == doctest::Approx(by_edge).epsilon(1e-13));

        // Including boundary edges can only increase the estimator.
        const IndicatorField all = indicators(s, EstimatorEdges::All);
        CHECK(all.global > f.global);
        for (int t = 0; t < mesh->num_triangles(); ++t) {
            CHECK(all.jump[t] >= f.jump[t]);
            CHECK(all.residual[t] == f.residual[t]);
        }
    }
    CHECK(parse_estimator_edges("all") == EstimatorEdges::All);
    CHECK(to_string(EstimatorEdges::Interior) == "interior");
    CHECK_THROWS(parse_estimator_edges("boundary"));
}

TEST_CASE("estimator is linear in the datum")
{
    const MeshPtr mesh = unit_square(6);
    for (Method method : {Method::Mini, Method::HoodTaylor}) {
        const double base = indicators(solve_cavity(mesh, method)).global;
        for (double s : {-2.0, 0.5, 10.0}) {
            CHECK(indicators(solve_cavity(mesh, method, s)).global ==
                  doctest::Approx(std::abs(s) * base).epsilon(1e-11));
        }
    }
}

TEST_CASE("estimator is invariant under element renumbering")
{
    const Mesh base = build_structured_unit_square(5);
    std::vector<Triangle> reversed(base.triangles().rbegin(), base.triangles().rend());
    const MeshPtr a = std::make_shared<const Mesh>(base);
    const MeshPtr b = std::make_shared<const Mesh>(base.vertices(), reversed, base.boundary_edges());
    for (Method method : {Method::Mini, Method::HoodTaylor}) {
        const IndicatorField fa = indicators(solve_cavity(a, method));
        const IndicatorField fb = indicators(solve_cavity(b, method));
        CHECK(fb.global == doctest::Approx(fa.global).epsilon(1e-13));
        const int nt = base.num_triangles();
        for (int t = 0; t < nt; ++t) {
            CHECK(std::abs(fb.eta[nt - 1 - t] - fa.eta[t]) <= 1e-13 * (1.0 + fa.eta[t]));
        }
    }
}

TEST_CASE("bubble Laplacian against finite differences")
{
    const double h = 1e-4;
    for (const Barycentric& l : {Barycentric{0.2, 0.3, 0.5}, Barycentric{0.6, 0.1, 0.3}}) {
        const auto hess = eval_basis_hessians(Family::P1Bubble, l);
        const auto value = [&](double dx, double dy) {
            return eval_basis(Family::P1Bubble, {l[0] - dx - dy, l[1] + dx, l[2] + dy}).values[3];
        };
        const double fxx = (value(h, 0) - 2 * value(0, 0) + value(-h, 0)) / (h * h);
        const double fyy = (value(0, h) - 2 * value(0, 0) + value(0, -h)) / (h * h);
        const double fxy = (value(h, h) - value(h, -h) - value(-h, h) + value(-h, -h)) / (4 * h * h);
        CHECK(hess[3](0, 0) == doctest::Approx(fxx).epsilon(1e-6));
        CHECK(hess[3](1, 1) == doctest::Approx(fyy).epsilon(1e-6));
        CHECK(hess[3](0, 1) == doctest::Approx(fxy).epsilon(1e-6));
        CHECK(std::abs(hess[3].trace()) > 1.0);
    }
}

TEST_CASE("effectivity")
{
    MeshPtr mesh = unit_square(4);
    std::vector<StokesSolution> patch;
    std::vector<StokesSolution> cavity;
    for (int k = 0; k < 3; ++k) {
        const auto trace = std::make_shared<const BoundaryTraceSpace>(mesh);
        patch.push_back(solve(mesh, Method::Mini, modified_lagrange(linear_datum(), trace)));
        cavity.push_back(solve_cavity(mesh, Method::Mini));
        mesh = std::make_shared<const Mesh>(refine_uniform(*mesh));
    }
    for (double e : effectivity(patch)) {
        CHECK(e == 0.0);
    }
    const std::vector<double> eff = effectivity(cavity);
    REQUIRE(eff.size() == 2);
    CHECK(eff[1] == doctest::Approx(eff[0]).epsilon(0.1));
    CHECK_THROWS_AS(effectivity(std::span<const StokesSolution>(cavity.data(), 2)), InsufficientLevelsError);
}

TEST_CASE("estimator magnitude on the first Mini cavity level")
{
    const MeshPtr mesh = unit_square(16);
    const StokesSolution s = solve_cavity(mesh, Method::Mini);
    CHECK(indicators(s, EstimatorEdges::All).global == doctest::Approx(1.8518).epsilon(0.05));
    CHECK(indicators(s).global == doctest::Approx(1.205).epsilon(0.01));
}
