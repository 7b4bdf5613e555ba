#include "roughstokes/config.hpp"
#include "roughstokes/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
namespace rs = roughstokes;

namespace {

using MeshHandle = std::shared_ptr<rs::Mesh>;

Eigen::MatrixXd vertex_array(const rs::Mesh& m)
{
    Eigen::MatrixXd out(m.num_vertices(), 2);
    for (int v = 0; v < m.num_vertices(); ++v) {
        out.row(v) = m.vertex(v).transpose();
    }
    return out;
}

Eigen::MatrixXi triangle_array(const rs::Mesh& m)
{
    Eigen::MatrixXi out(m.num_triangles(), 3);
    for (int t = 0; t < m.num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            out(t, k) = m.triangle(t)[k];
        }
    }
    return out;
}

rs::BoundaryDatum datum_for(const MeshHandle& mesh, const std::string& datum, const std::string& policy)
{
    rs::RunConfig c;
    c.datum = datum;
    c.jump_policy = rs::parse_jump_policy(policy);
    return rs::build_datum(c, mesh->segments());
}

rs::RunConfig config_from(const py::dict& settings)
{
    rs::RunConfig c;
    for (const auto& [key, value] : settings) {
        const std::string k = py::str(key);
        if (k == "piece" && py::isinstance<py::list>(value)) {
            for (const auto& piece : value) {
                rs::apply_setting(c, k, py::str(piece).cast<std::string>());
            }
        } else {
            rs::apply_setting(c, k, py::str(value).cast<std::string>());
        }
    }
    rs::validate(c);
    return c;
}

py::list rows_of(const rs::ConvergenceRecord& rec)
{
    py::list rows;
    for (const auto& r : rec.rows) {
        py::dict row;
        row["nv"] = r.nv;
        row["err_u"] = r.err_u;
        row["eta"] = r.eta;
        row["order_u"] = r.order_u;
        row["order_eta"] = r.order_eta;
        rows.append(row);
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_roughstokes, m)
{
    m.doc() = "Stokes flow with rough Dirichlet data";

    py::register_exception<rs::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<rs::IncompatibleDatumError>(m, "IncompatibleDatumError", PyExc_ValueError);
    py::register_exception<rs::PointOutsideDomainError>(m, "PointOutsideDomainError", PyExc_ValueError);

    py::class_<rs::Mesh, MeshHandle>(m, "Mesh")
        .def_property_readonly("num_vertices", &rs::Mesh::num_vertices)
        .def_property_readonly("num_triangles", &rs::Mesh::num_triangles)
        .def_property_readonly("num_edges", &rs::Mesh::num_edges)
        .def_property_readonly("vertices", &vertex_array)
        .def_property_readonly("triangles", &triangle_array)
        .def_property_readonly("parents", &rs::Mesh::parents)
        .def("area", &rs::Mesh::area)
        .def("diameter", &rs::Mesh::diameter)
        .def("min_angle", py::overload_cast<>(&rs::Mesh::min_angle, py::const_))
        .def("total_area", &rs::Mesh::total_area)
        .def("refine_uniform", [](const rs::Mesh& self) { return std::make_shared<rs::Mesh>(rs::refine_uniform(self)); })
        .def(
            "refine_marked",
            [](const rs::Mesh& self, const std::vector<int>& marked, bool all_edges) {
                return std::make_shared<rs::Mesh>(rs::refine_marked(
                    self, marked, all_edges ? rs::Bisection::AllEdges : rs::Bisection::RefinementEdge));
            },
            py::arg("marked"), py::arg("all_edges") = true)
        .def("locate", [](const rs::Mesh& self, double x, double y) {
            const rs::Location loc = rs::locate_point(self, rs::Vec2(x, y));
            return py::make_tuple(loc.triangle, loc.bary);
        })
        .def("to_text", [](const rs::Mesh& self) {
            std::ostringstream out;
            rs::write_mesh(out, self);
            return out.str();
        });

    m.def("structured_mesh", [](int n) { return std::make_shared<rs::Mesh>(rs::build_structured_unit_square(n)); },
          py::arg("n"));
    m.def(
        "mesh_from_text",
        [](const std::string& text) {
            std::istringstream in(text);
            return std::make_shared<rs::Mesh>(rs::read_mesh(in));
        },
        py::arg("text"));

    py::class_<rs::StokesSolution>(m, "Solution")
        .def_property_readonly("method", [](const rs::StokesSolution& s) { return std::string(rs::to_string(s.method)); })
        .def_readonly("u", &rs::StokesSolution::u)
        .def_readonly("p", &rs::StokesSolution::p)
        .def_readonly("relative_residual", &rs::StokesSolution::relative_residual)
        .def("velocity", [](const rs::StokesSolution& s, double x, double y) {
            const rs::Location loc = rs::locate_point(*s.mesh, rs::Vec2(x, y));
            return s.velocity_at(loc.triangle, loc.bary);
        })
        .def("pressure", [](const rs::StokesSolution& s, double x, double y) {
            const rs::Location loc = rs::locate_point(*s.mesh, rs::Vec2(x, y));
            return s.pressure_at(loc.triangle, loc.bary);
        })
        .def(
            "indicators",
            [](const rs::StokesSolution& s, const std::string& edges) {
                const rs::IndicatorField f = rs::indicators(s, rs::parse_estimator_edges(edges));
                py::dict out;
                out["eta"] = f.eta;
                out["residual"] = f.residual;
                out["divergence"] = f.divergence;
                out["jump"] = f.jump;
                out["global"] = f.global;
                return out;
            },
            py::arg("edges") = "interior");

    m.def(
        "regularize",
        [](const MeshHandle& mesh, const std::string& datum, const std::string& regularizer, const std::string& policy) {
            auto trace = std::make_shared<const rs::BoundaryTraceSpace>(mesh);
            const rs::BoundaryField gh =
                rs::regularize(rs::parse_regularizer(regularizer), datum_for(mesh, datum, policy), trace);
            Eigen::MatrixXd values(gh.values.size(), 2);
            Eigen::MatrixXd points(gh.values.size(), 2);
            for (int i = 0; i < trace->size(); ++i) {
                values.row(i) = gh.values[i].transpose();
                points.row(i) = trace->point(i).transpose();
            }
            return py::make_tuple(points, values, rs::compatibility_defect(gh));
        },
        py::arg("mesh"), py::arg("datum") = "cavity", py::arg("regularizer") = "modified-lagrange",
        py::arg("jump_policy") = "lower-segment",
        "Boundary nodes, regularized nodal values and the flux defect.");

    m.def(
        "solve",
        [](const MeshHandle& mesh, const std::string& method, const std::string& datum, const std::string& regularizer,
           const std::string& policy) {
            auto trace = std::make_shared<const rs::BoundaryTraceSpace>(mesh);
            const rs::BoundaryField gh =
                rs::regularize(rs::parse_regularizer(regularizer), datum_for(mesh, datum, policy), trace);
            py::gil_scoped_release release;
            return rs::solve(mesh, rs::parse_method(method), gh);
        },
        py::arg("mesh"), py::arg("method") = "mini", py::arg("datum") = "cavity",
        py::arg("regularizer") = "modified-lagrange", py::arg("jump_policy") = "lower-segment");

    m.def("dorfler_mark", [](const std::vector<double>& eta, double theta) { return rs::dorfler_mark(eta, theta); },
          py::arg("eta"), py::arg("theta"));

    m.def(
        "run_study",
        [](const py::dict& settings) {
            const rs::RunConfig c = config_from(settings);
            rs::ConvergenceRecord rec;
            {
                py::gil_scoped_release release;
                rec = rs::run_study(c);
            }
            return rows_of(rec);
        },
        py::arg("settings"), "Runs a study from config keys; returns one dict per level.");

    m.def("parse_config", [](const std::string& text) { return rs::serialize(rs::parse_config(text)); },
          py::arg("text"), "Parses and re-serializes a key = value configuration.");

    m.def("known_suites", &rs::known_suites);
    m.def(
        "run_suite",
        [](const std::string& name) {
            const rs::SuiteResult r = rs::run_suite(name);
            return py::make_tuple(r.passed(), r.checks, r.failures);
        },
        py::arg("name"));
}
