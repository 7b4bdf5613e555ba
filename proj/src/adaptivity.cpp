#include "roughstokes/adaptivity.hpp"

#include "roughstokes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace roughstokes {
namespace {

constexpr int kErrorDegree = 6;

ConvergenceRow make_row(int nv, double err, double eta)
{
    ConvergenceRow row;
    row.nv = nv;
    row.err_u = err;
    row.eta = eta;
    return row;
}

void fill_orders(ConvergenceRecord& record)
{
    const auto order_u = convergence_order(record, Column::ErrU);
    const auto order_eta = convergence_order(record, Column::Eta);
    for (std::size_t k = 0; k < record.rows.size(); ++k) {
        record.rows[k].order_u = order_u[k];
        record.rows[k].order_eta = order_eta[k];
    }
}

StokesSolution solve_on(const StudyConfig& config, MeshPtr mesh)
{
    auto trace = std::make_shared<const BoundaryTraceSpace>(mesh);
    const BoundaryField gh = regularize(config.regularizer, config.datum, trace);
    return solve(std::move(mesh), config.method, gh);
}

ConvergenceRecord empty_record(const StudyConfig& config, RefinementMode mode)
{
    ConvergenceRecord record;
    record.method = config.method;
    record.mode = mode;
    record.theta = mode == RefinementMode::Adaptive ? config.theta : 0.0;
    record.jump_policy = config.datum.policy();
    record.regularizer = config.regularizer;
    record.estimator_edges = config.estimator_edges;
    return record;
}

std::string format_value(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::vector<int> dorfler_mark(std::span<const double> eta, double theta)
{
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("dorfler_mark: theta must lie in (0, 1)");
    }
    double total = 0.0;
    for (double e : eta) {
        if (!(e >= 0.0)) {
            throw std::invalid_argument("dorfler_mark: indicators must be nonnegative");
        }
        total += e * e;
    }
    if (!(total > 0.0)) {
        throw AllZeroIndicatorsError("dorfler_mark: all indicators vanish");
    }
    std::vector<int> order(eta.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta[a] > eta[b]; });
    const double target = theta * total * (1.0 - 1e-14);
    double sum = 0.0;
    std::size_t count = 0;
    while (count < order.size() && sum < target) {
        sum += eta[order[count]] * eta[order[count]];
        ++count;
    }
    order.resize(count);
    return order;
}

double consecutive_error(const StokesSolution& coarse, const StokesSolution& fine)
{
    const Mesh& cm = *coarse.mesh;
    const Mesh& fm = *fine.mesh;
    if (!fm.has_hierarchy()) {
        throw NotNestedError("consecutive_error: fine mesh carries no refinement hierarchy");
    }
    const QuadratureRule& rule = triangle_rule(kErrorDegree);
    double sum = 0.0;
    for (int t = 0; t < fm.num_triangles(); ++t) {
        const int parent = fm.parent_of(t);
        if (parent < 0 || parent >= cm.num_triangles()) {
            throw NotNestedError("consecutive_error: parent triangle outside the coarse mesh");
        }
        const auto c = fm.corners(t);
        const double jac = 2.0 * std::abs(fm.area(t));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Barycentric l = rule.barycentric(q);
            const Vec2 x = from_barycentric(c[0], c[1], c[2], l);
            Location loc;
            if (auto lp = contains(cm, parent, x, 1e-10 * std::max(1.0, cm.diameter(parent)))) {
                loc = {parent, *lp};
            } else {
                throw NotNestedError("consecutive_error: fine triangle is not inside its parent");
            }
            const Vec2 diff = fine.velocity_at(t, l) - coarse.velocity_at(loc.triangle, loc.bary);
            sum += rule.weights[q] * jac * diff.squaredNorm();
        }
    }
    return std::sqrt(sum);
}

std::vector<double> convergence_order(std::span<const int> nv, std::span<const double> values)
{
    if (nv.size() != values.size() || nv.size() < 2) {
        throw std::invalid_argument("convergence_order: needs at least two matching levels");
    }
    std::vector<double> out(nv.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0) || nv[k] <= 0) {
            throw NonPositiveValueError("convergence_order: values and sizes must be positive");
        }
    }
    for (std::size_t k = 1; k < values.size(); ++k) {
        out[k] = std::log(values[k - 1] / values[k]) / std::log(static_cast<double>(nv[k]) / nv[k - 1]);
    }
    return out;
}

std::vector<int> ConvergenceRecord::nv() const
{
    std::vector<int> out;
    for (const auto& r : rows) {
        out.push_back(r.nv);
    }
    return out;
}

std::vector<double> ConvergenceRecord::err_u() const
{
    std::vector<double> out;
    for (const auto& r : rows) {
        out.push_back(r.err_u);
    }
    return out;
}

std::vector<double> ConvergenceRecord::eta() const
{
    std::vector<double> out;
    for (const auto& r : rows) {
        out.push_back(r.eta);
    }
    return out;
}

std::vector<double> convergence_order(const ConvergenceRecord& record, Column column)
{
    const std::vector<double> values = column == Column::ErrU ? record.err_u() : record.eta();
    const std::vector<int> nv = record.nv();
    std::vector<double> out(values.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k - 1] > kZeroFloor && values[k] > kZeroFloor && nv[k] != nv[k - 1]) {
            const std::array<int, 2> n{nv[k - 1], nv[k]};
            const std::array<double, 2> v{values[k - 1], values[k]};
            out[k] = convergence_order(n, v)[1];
        }
    }
    return out;
}

ConvergenceRecord run_uniform(const StudyConfig& config)
{
    if (!config.initial_mesh) {
        throw std::invalid_argument("run_uniform: no initial mesh");
    }
    if (config.levels < 1) {
        throw std::invalid_argument("run_uniform: levels must be positive");
    }
    ConvergenceRecord record = empty_record(config, RefinementMode::Uniform);
    StokesSolution previous = solve_on(config, config.initial_mesh);
    if (config.observer) {
        config.observer(0, previous, indicators(previous, config.estimator_edges), {});
    }
    for (int level = 1; level <= config.levels; ++level) {
        auto mesh = std::make_shared<const Mesh>(refine_uniform(*previous.mesh));
        StokesSolution current = solve_on(config, mesh);
        const IndicatorField est = indicators(current, config.estimator_edges);
        record.rows.push_back(make_row(velocity_nodes(*mesh, config.method), consecutive_error(previous, current), est.global));
        if (config.observer) {
            config.observer(level, current, est, {});
        }
        previous = std::move(current);
    }
    fill_orders(record);
    return record;
}

ConvergenceRecord run_adaptive(const StudyConfig& config)
{
    if (!config.initial_mesh) {
        throw std::invalid_argument("run_adaptive: no initial mesh");
    }
    if (!(config.theta > 0.0 && config.theta < 1.0)) {
        throw std::invalid_argument("run_adaptive: theta must lie in (0, 1)");
    }
    ConvergenceRecord record = empty_record(config, RefinementMode::Adaptive);
    StokesSolution previous = solve_on(config, config.initial_mesh);
    IndicatorField est = indicators(previous, config.estimator_edges);
    for (int level = 0;; ++level) {
        std::vector<int> marked;
        if (level < config.max_iters) {
            marked = dorfler_mark(est.eta, config.theta);
        }
        if (config.observer) {
            config.observer(level, previous, est, marked);
        }
        if (marked.empty()) {
            break;
        }
        auto mesh = std::make_shared<const Mesh>(refine_marked(*previous.mesh, marked));
        if (velocity_nodes(*mesh, config.method) > config.max_dofs) {
            break;
        }
        StokesSolution current = solve_on(config, mesh);
        est = indicators(current, config.estimator_edges);
        record.rows.push_back(make_row(velocity_nodes(*mesh, config.method), consecutive_error(previous, current), est.global));
        previous = std::move(current);
    }
    fill_orders(record);
    return record;
}

void write_csv(std::ostream& out, const ConvergenceRecord& record)
{
    out << "nv,err_u,eta,order_u,order_eta\n";
    for (const auto& r : record.rows) {
        out << r.nv << ',' << format_value(r.err_u) << ',' << format_value(r.eta) << ','
            << format_value(r.order_u) << ',' << format_value(r.order_eta) << '\n';
    }
}

void write_table(std::ostream& out, const ConvergenceRecord& record)
{
    char line[160];
    std::snprintf(line, sizeof line, "%10s %14s %14s %12s %12s\n", "nv", "L2 error in u", "eta", "order in u",
                  "order in eta");
    out << line;
    for (const auto& r : record.rows) {
        std::snprintf(line, sizeof line, "%10d %14s %14s %12s %12s\n", r.nv, format_value(r.err_u).c_str(),
                      format_value(r.eta).c_str(), format_value(r.order_u).c_str(),
                      format_value(r.order_eta).c_str());
        out << line;
    }
}

}  // namespace roughstokes
