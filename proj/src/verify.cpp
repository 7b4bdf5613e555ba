#include "roughstokes/verify.hpp"

#include "roughstokes/adaptivity.hpp"
#include "roughstokes/estimator.hpp"
#include "roughstokes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace roughstokes {
namespace {

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k) {
        f *= k;
    }
    return f;
}

class Suite {
public:
    explicit Suite(std::string name) { result_.name = std::move(name); }

    void check(bool ok, const std::string& what)
    {
        ++result_.checks;
        if (!ok) {
            result_.failures.push_back(what);
        }
    }

    void close(double got, double want, double tol, const std::string& what)
    {
        const bool ok = std::abs(got - want) <= tol;
        if (ok) {
            check(true, what);
            return;
        }
        std::ostringstream msg;
        msg.precision(17);
        msg << what << ": got " << got << ", expected " << want << " (tol " << tol << ")";
        check(false, msg.str());
    }

    SuiteResult take() { return std::move(result_); }

private:
    SuiteResult result_;
};

// --- quadrature -------------------------------------------------------------

SuiteResult quadrature_suite(const VerifyOptions& options)
{
    Suite suite("quadrature");
    auto source = options.rule_source;
    if (!source) {
        source = [](bool triangle, int degree) { return triangle ? triangle_rule(degree) : segment_rule(degree); };
    }
    for (int degree = 1; degree <= kMaxTriangleDegree; ++degree) {
        const QuadratureRule rule = source(true, degree);
        for (int a = 0; a <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                double sum = 0.0;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    sum += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
                }
                const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                suite.close(sum, exact, 1e-14, "triangle degree " + std::to_string(degree) + " monomial x^" +
                                                    std::to_string(a) + " y^" + std::to_string(b));
            }
        }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            suite.check(rule.weights[q] > 0.0, "triangle degree " + std::to_string(degree) + " weight positive");
        }
    }
    for (int degree = 1; degree <= kMaxSegmentDegree; ++degree) {
        const QuadratureRule rule = source(false, degree);
        for (int k = 0; k <= degree; ++k) {
            double sum = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                sum += rule.weights[q] * std::pow(rule.points[q].x(), k);
            }
            suite.close(sum, 1.0 / (k + 1), 1e-14,
                        "segment degree " + std::to_string(degree) + " monomial t^" + std::to_string(k));
        }
    }
    return suite.take();
}

// --- barycentric polynomial oracle -----------------------------------------

using Exponent = std::array<int, 3>;

// Vector-valued polynomial in barycentric coordinates.
using VectorPoly = std::map<Exponent, Vec2>;

Exponent unit(int i, int power = 1)
{
    Exponent e{0, 0, 0};
    e[i] = power;
    return e;
}

Exponent add(const Exponent& a, const Exponent& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

void accumulate(VectorPoly& p, const Exponent& e, const Vec2& c)
{
    const auto [it, inserted] = p.try_emplace(e, c);
    if (!inserted) {
        it->second += c;
    }
}

std::array<Vec2, 3> lambda_gradients(const std::array<Vec2, 3>& x)
{
    const double twice_area = (x[1] - x[0]).x() * (x[2] - x[0]).y() - (x[1] - x[0]).y() * (x[2] - x[0]).x();
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
        const Vec2& xj = x[(i + 1) % 3];
        const Vec2& xk = x[(i + 2) % 3];
        g[i] = Vec2(xj.y() - xk.y(), xk.x() - xj.x()) / twice_area;
    }
    return g;
}

std::vector<VectorPoly> basis_gradients(Family family, const std::array<Vec2, 3>& x)
{
    const auto dl = lambda_gradients(x);
    std::vector<VectorPoly> out;
    if (family == Family::P2) {
        for (int i = 0; i < 3; ++i) {
            VectorPoly g;
            accumulate(g, unit(i), 4.0 * dl[i]);
            accumulate(g, Exponent{0, 0, 0}, -dl[i]);
            out.push_back(g);
        }
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3;
            const int k = (i + 2) % 3;
            VectorPoly g;
            accumulate(g, unit(k), 4.0 * dl[j]);
            accumulate(g, unit(j), 4.0 * dl[k]);
            out.push_back(g);
        }
        return out;
    }
    for (int i = 0; i < 3; ++i) {
        out.push_back(VectorPoly{{Exponent{0, 0, 0}, dl[i]}});
    }
    if (family == Family::P1Bubble) {
        VectorPoly g;
        accumulate(g, add(unit(1), unit(2)), 27.0 * dl[0]);
        accumulate(g, add(unit(0), unit(2)), 27.0 * dl[1]);
        accumulate(g, add(unit(0), unit(1)), 27.0 * dl[2]);
        out.push_back(g);
    }
    return out;
}

double integrate_dot(const VectorPoly& a, const VectorPoly& b, double area)
{
    double sum = 0.0;
    for (const auto& [ea, ca] : a) {
        for (const auto& [eb, cb] : b) {
            const Exponent e = add(ea, eb);
            sum += ca.dot(cb) * 2.0 * area * factorial(e[0]) * factorial(e[1]) * factorial(e[2]) /
                   factorial(e[0] + e[1] + e[2] + 2);
        }
    }
    return sum;
}

Vec2 evaluate(const VectorPoly& p, const Barycentric& l)
{
    Vec2 v = Vec2::Zero();
    for (const auto& [e, c] : p) {
        v += c * std::pow(l[0], e[0]) * std::pow(l[1], e[1]) * std::pow(l[2], e[2]);
    }
    return v;
}

Mesh single_triangle(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return Mesh({a, b, c}, {Triangle{0, 1, 2}}, {{{0, 1}, 0}, {{1, 2}, 1}, {{2, 0}, 2}});
}

// --- local matrices --------------------------------------------------------

SuiteResult local_matrix_suite()
{
    Suite suite("local-matrices");
    {
        const Mesh ref = single_triangle(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
        const auto c = ref.corners(0);
        suite.check(c[0].isZero(0.0) && c[1] == Vec2(1, 0) && c[2] == Vec2(0, 1),
                    "reference triangle keeps the right angle at local vertex 0");
        Eigen::Matrix3d hand;
        hand << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
        const Eigen::MatrixXd k = local_stiffness(ref, 0, Family::P1);
        suite.close((k - hand).cwiseAbs().maxCoeff(), 0.0, 1e-13, "P1 stiffness on the reference triangle");
    }
    std::mt19937_64 rng(20240417);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec2 a(coord(rng), coord(rng));
        Vec2 b(coord(rng), coord(rng));
        Vec2 c(coord(rng), coord(rng));
        if (std::abs(signed_area(a, b, c)) < 0.05) {
            --trial;
            continue;
        }
        const Mesh mesh = single_triangle(a, b, c);
        const auto x = mesh.corners(0);
        const double area = mesh.area(0);
        Eigen::Matrix3d hand;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const Vec2 ei = x[(i + 2) % 3] - x[(i + 1) % 3];
                const Vec2 ej = x[(j + 2) % 3] - x[(j + 1) % 3];
                hand(i, j) = ei.dot(ej) / (4.0 * area);
            }
        }
        const Eigen::MatrixXd k1 = local_stiffness(mesh, 0, Family::P1);
        suite.close((k1 - hand).cwiseAbs().maxCoeff() / hand.cwiseAbs().maxCoeff(), 0.0, 1e-13,
                    "P1 stiffness, edge-vector formula, trial " + std::to_string(trial));
        for (Family family : {Family::P1Bubble, Family::P2}) {
            const auto grads = basis_gradients(family, x);
            const Eigen::MatrixXd k = local_stiffness(mesh, 0, family);
            double worst = 0.0;
            for (std::size_t i = 0; i < grads.size(); ++i) {
                for (std::size_t j = 0; j < grads.size(); ++j) {
                    worst = std::max(worst, std::abs(k(i, j) - integrate_dot(grads[i], grads[j], area)));
                }
            }
            suite.close(worst / k.cwiseAbs().maxCoeff(), 0.0, 1e-13,
                        std::string(to_string(family)) + " stiffness, exact barycentric integration, trial " +
                            std::to_string(trial));
        }
    }
    return suite.take();
}

// --- edge jumps ------------------------------------------------------------

SuiteResult jump_suite()
{
    Suite suite("jumps");
    const std::vector<Vec2> x{Vec2(0.0, 0.0), Vec2(1.0, 0.1), Vec2(0.4, 0.8), Vec2(1.2, 0.9)};
    auto mesh = std::make_shared<const Mesh>(x, std::vector<Triangle>{{0, 1, 2}, {1, 3, 2}},
                                             std::vector<BoundaryEdge>{{{0, 1}, 0}, {{1, 3}, 1}, {{3, 2}, 2}, {{2, 0}, 3}});
    const int shared = mesh->find_edge(1, 2);
    suite.check(shared >= 0 && !mesh->edge(shared).on_boundary(), "two-element mesh has one interior edge");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    for (Method method : {Method::Mini, Method::HoodTaylor}) {
        for (int trial = 0; trial < 5; ++trial) {
            StokesSolution sol{mesh, method, build_space(mesh, velocity_family(method)),
                               build_space(mesh, Family::P1Pressure), {}, {}};
            sol.u = Eigen::VectorXd::NullaryExpr(sol.velocity.dof_count(), [&] { return value(rng); });
            sol.p = Eigen::VectorXd::NullaryExpr(sol.pressure.dof_count(), [&] { return value(rng); });

            const Edge& e = mesh->edge(shared);
            const Vec2 a = mesh->vertex(e.v[0]);
            const Vec2 b = mesh->vertex(e.v[1]);
            const Vec2 t = (b - a).normalized();
            const Vec2 n_left(t.y(), -t.x());
            const EdgeJump jump = edge_jump(sol, shared);

            auto stress = [&](int tri, const Vec2& p, const Vec2& n) {
                const auto c = mesh->corners(tri);
                const Barycentric l = barycentric(c[0], c[1], c[2], p);
                const auto grads = basis_gradients(sol.velocity.family(), c);
                const auto vd = sol.velocity.cell_dofs(tri);
                Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
                for (std::size_t i = 0; i < grads.size(); ++i) {
                    const Vec2 dphi = evaluate(grads[i], l);
                    g.row(0) += sol.u[sol.velocity.dof(0, vd[i])] * dphi.transpose();
                    g.row(1) += sol.u[sol.velocity.dof(1, vd[i])] * dphi.transpose();
                }
                const auto pd = sol.pressure.cell_dofs(tri);
                const double p_val = sol.p[pd[0]] * l[0] + sol.p[pd[1]] * l[1] + sol.p[pd[2]] * l[2];
                return Vec2(g * n - p_val * n);
            };
            for (double s : {0.0, 0.25, 0.5, 0.8, 1.0}) {
                const Vec2 p = a + s * (b - a);
                const Vec2 want = stress(e.left, p, n_left) + stress(e.right, p, -n_left);
                suite.close((jump(s) - want).norm() / (1.0 + want.norm()), 0.0, 1e-12,
                            std::string(to_string(method)) + " jump at s=" + std::to_string(s) + ", trial " +
                                std::to_string(trial));
            }
        }
    }
    {
        // Pressure with a unit jump and zero velocity: ||J||^2 = |e|.
        StokesSolution sol{mesh, Method::Mini, build_space(mesh, Family::P1Bubble),
                           build_space(mesh, Family::P1Pressure), {}, {}};
        sol.u = Eigen::VectorXd::Zero(sol.velocity.dof_count());
        sol.p = Eigen::VectorXd::Zero(sol.pressure.dof_count());
        const EdgeJump jump = edge_jump(sol, shared);
        suite.close(jump.squared_norm(), 0.0, 1e-14, "zero fields give zero jump");
    }
    return suite.take();
}

// --- compatibility ---------------------------------------------------------

SuiteResult compatibility_suite()
{
    Suite suite("compatibility");
    for (int n : {8, 12, 16}) {
        auto mesh = std::make_shared<const Mesh>(build_structured_unit_square(n));
        auto trace = std::make_shared<const BoundaryTraceSpace>(mesh);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const BoundaryDatum datum = random_compatible_datum(seed);
            for (Regularizer r : {Regularizer::ModifiedLagrange, Regularizer::L2Projection, Regularizer::Carstensen}) {
                const BoundaryField gh = regularize(r, datum, trace);
                const double scale = (1.0 + gh.sup_norm()) * trace->perimeter();
                suite.close(compatibility_defect(gh), 0.0, 1e-11 * scale,
                            std::string(to_string(r)) + " defect, seed " + std::to_string(seed) + ", n=" +
                                std::to_string(n));
            }
        }
        const double h = 1.0 / n;
        const std::array<std::pair<JumpPolicy, double>, 4> expected{{{JumpPolicy::LowerSegment, 0.0},
                                                                     {JumpPolicy::Average, 0.0},
                                                                     {JumpPolicy::LeftLimit, -0.5 * h},
                                                                     {JumpPolicy::RightLimit, 0.5 * h}}};
        for (const auto& [policy, defect] : expected) {
            const BoundaryField gh = lagrange_interpolant(cavity_datum(policy), trace);
            suite.close(compatibility_defect(gh), defect, 1e-14,
                        "cavity Lagrange interpolant defect, " + std::string(to_string(policy)) + ", n=" +
                            std::to_string(n));
        }
    }
    return suite.take();
}

// --- Dörfler marking -------------------------------------------------------

SuiteResult dorfler_suite()
{
    Suite suite("dorfler");
    {
        const std::vector<double> eta{3.0, 2.0, 1.0, 1.0, 1.0};
        suite.check(dorfler_mark(eta, 0.5) == std::vector<int>{0}, "eta^2 = [9,4,1,1,1], theta = 0.5 marks {0}");
        const std::vector<double> equal(10, 1.0);
        suite.check(dorfler_mark(equal, 0.5) == std::vector<int>{0, 1, 2, 3, 4},
                    "ten equal indicators, theta = 0.5 marks the five lowest ids");
    }
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit_interval(0.0, 1.0);
    std::uniform_int_distribution<int> size(1, 60);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> eta(size(rng));
        for (double& v : eta) {
            v = std::pow(unit_interval(rng), 3.0) + 1e-6;
        }
        const double theta = 0.05 + 0.9 * unit_interval(rng);
        const std::vector<int> marked = dorfler_mark(eta, theta);
        double total = 0.0;
        for (double v : eta) {
            total += v * v;
        }
        double reached = 0.0;
        double smallest_marked = INFINITY;
        std::vector<char> is_marked(eta.size(), 0);
        for (int t : marked) {
            reached += eta[t] * eta[t];
            smallest_marked = std::min(smallest_marked, eta[t]);
            is_marked[t] = 1;
        }
        std::vector<double> sorted(eta);
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double best_smaller = 0.0;
        for (std::size_t k = 0; k + 1 < marked.size(); ++k) {
            best_smaller += sorted[k] * sorted[k];
        }
        bool largest = true;
        for (std::size_t t = 0; t < eta.size(); ++t) {
            largest = largest && (is_marked[t] || eta[t] <= smallest_marked);
        }
        const std::string tag = "trial " + std::to_string(trial);
        suite.check(reached >= theta * total * (1.0 - 1e-14), tag + ": marked set reaches the bulk fraction");
        suite.check(best_smaller < theta * total, tag + ": no smaller set reaches the bulk fraction");
        suite.check(largest, tag + ": marked indicators are the largest");
    }
    return suite.take();
}

// --- Uniform Mini cavity chain ---------------------------------------------

SuiteResult table1_suite()
{
    Suite suite("table1");
    StudyConfig config;
    config.method = Method::Mini;
    config.initial_mesh = std::make_shared<const Mesh>(build_structured_unit_square(8));
    config.levels = 5;
    const ConvergenceRecord record = run_uniform(config);
    const std::array<int, 5> nv{289, 1089, 4225, 16641, 66049};
    const std::array<double, 5> err{0.051393, 0.025876, 0.012952, 0.0064768, 0.0032384};
    const std::array<double, 4> order_u{0.51724, 0.51049, 0.50553, 0.50281};
    const std::array<double, 4> order_eta{0.51818, 0.5091, 0.50449, 0.5022};
    suite.check(record.rows.size() == nv.size(), "five recorded levels");
    for (std::size_t k = 0; k < std::min(record.rows.size(), nv.size()); ++k) {
        const ConvergenceRow& row = record.rows[k];
        suite.check(row.nv == nv[k], "level " + std::to_string(k) + " has nv " + std::to_string(nv[k]));
        suite.close(row.err_u / err[k], 1.0, 0.2, "level " + std::to_string(k) + " err_u relative to the table");
        if (k > 0) {
            suite.close(row.order_u, order_u[k - 1], 0.05, "level " + std::to_string(k) + " order_u");
            suite.close(row.order_eta, order_eta[k - 1], 0.05, "level " + std::to_string(k) + " order_eta");
        }
    }
    return suite.take();
}

}  // namespace

BoundaryDatum random_compatible_datum(std::uint64_t seed, JumpPolicy policy)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_real_distribution<double> split(0.25, 0.75);
    const std::vector<Segment> segments = unit_square_segments();

    struct Shape {
        Vec2 c0, c1, c2;
        double k;
        Vec2 operator()(double t) const { return c0 + t * c1 + std::sin(k * t) * c2; }
    };
    std::vector<DatumPiece> pieces;
    std::vector<Shape> shapes;
    double flux = 0.0;
    const QuadratureRule& rule = segment_rule(kMaxSegmentDegree);
    for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
        const double mid = split(rng);
        for (const auto& [t0, t1] : {std::pair{0.0, mid}, std::pair{mid, 1.0}}) {
            Shape shape{Vec2(coeff(rng), coeff(rng)), Vec2(coeff(rng), coeff(rng)), Vec2(coeff(rng), coeff(rng)),
                        1.0 + 2.0 * std::abs(coeff(rng))};
            constexpr int parts = 64;
            for (int p = 0; p < parts; ++p) {
                const double a = t0 + (t1 - t0) * p / parts;
                const double b = t0 + (t1 - t0) * (p + 1) / parts;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    const double t = a + (b - a) * rule.points[q].x();
                    flux += rule.weights[q] * (b - a) * segments[s].length() * shape(t).dot(segments[s].normal());
                }
            }
            shapes.push_back(shape);
            pieces.push_back(DatumPiece{s, t0, t1, {}});
        }
    }
    double perimeter = 0.0;
    for (const Segment& s : segments) {
        perimeter += s.length();
    }
    const double shift = -flux / perimeter;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const Segment seg = segments[pieces[i].segment];
        const Shape shape = shapes[i];
        pieces[i].f = [seg, shape, shift](const Vec2& p) {
            return Vec2(shape(seg.parameter(p)) + shift * seg.normal());
        };
    }
    return BoundaryDatum(segments, std::move(pieces), policy);
}

const std::vector<std::string>& default_suites()
{
    static const std::vector<std::string> names{"quadrature", "local-matrices", "jumps", "compatibility", "dorfler"};
    return names;
}

const std::vector<std::string>& known_suites()
{
    static const std::vector<std::string> names{"quadrature", "local-matrices", "jumps",
                                                "compatibility", "dorfler", "table1"};
    return names;
}

SuiteResult run_suite(const std::string& name, const VerifyOptions& options)
{
    if (name == "quadrature") {
        return quadrature_suite(options);
    }
    if (name == "local-matrices") {
        return local_matrix_suite();
    }
    if (name == "jumps") {
        return jump_suite();
    }
    if (name == "compatibility") {
        return compatibility_suite();
    }
    if (name == "dorfler") {
        return dorfler_suite();
    }
    if (name == "table1") {
        return table1_suite();
    }
    throw std::invalid_argument("unknown suite '" + name + "'");
}

std::vector<SuiteResult> run_suites(const std::vector<std::string>& names, const VerifyOptions& options)
{
    std::vector<SuiteResult> out;
    out.reserve(names.size());
    for (const std::string& name : names) {
        out.push_back(run_suite(name, options));
    }
    return out;
}

}  // namespace roughstokes
