#include <carnot/errors.hpp>
#include <carnot/experiment.hpp>
#include <carnot/expression.hpp>
#include <carnot/group.hpp>
#include <carnot/horizontal.hpp>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace carnot;

namespace {

Point as_point(const GroupSpec& g, const Eigen::VectorXd& x) {
    if (x.size() != g.dim()) throw DimensionMismatch("point has " + std::to_string(x.size()) + " coordinates, group has " +
                                                     std::to_string(g.dim()));
    return x;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Carnot group kernels and experiment runner";

    static py::exception<Error> base(m, "CarnotError");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<SyntaxError>(m, "SyntaxError", base.ptr());
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
    py::register_exception<UnknownName>(m, "UnknownName", base.ptr());
    py::register_exception<EvaluationError>(m, "EvaluationError", base.ptr());
    py::register_exception<Diverged>(m, "Diverged", base.ptr());

    py::class_<GroupSpec>(m, "Group")
        .def(py::init([](const std::string& name) { return builtin_group(name); }), py::arg("name"))
        .def_property_readonly("name", &GroupSpec::name)
        .def_property_readonly("dim", &GroupSpec::dim)
        .def_property_readonly("step", &GroupSpec::step)
        .def_property_readonly("layer_dims", &GroupSpec::layer_dims)
        .def("multiply",
             [](const GroupSpec& g, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
                 return Eigen::VectorXd(multiply(g, as_point(g, x), as_point(g, y)));
             })
        .def("inverse", [](const GroupSpec& g, const Eigen::VectorXd& x) { return Eigen::VectorXd(inverse(as_point(g, x))); })
        .def("dilate",
             [](const GroupSpec& g, double lam, const Eigen::VectorXd& x) {
                 return Eigen::VectorXd(dilate(g, lam, as_point(g, x)));
             })
        .def("norm", [](const GroupSpec& g, const Eigen::VectorXd& x) { return hom_norm(g, as_point(g, x)); })
        .def("metric",
             [](const GroupSpec& g, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
                 return metric(g, as_point(g, x), as_point(g, y));
             })
        .def("hormander_rank",
             [](const GroupSpec& g, int depth) {
                 const auto r = hormander_rank(g, Point::Zero(g.dim()), depth);
                 return py::make_tuple(r.achieved_rank, r.depth_used);
             },
             py::arg("max_depth"));

    m.def("group_names", &builtin_group_names);
    m.def(
        "evaluate",
        [](const std::string& text, const Eigen::VectorXd& x) {
            return parse_expression(text, static_cast<int>(x.size())).evaluate(x);
        },
        py::arg("expression"), py::arg("point"));
    m.def(
        "canonical",
        [](const std::string& text, int dim) { return parse_expression(text, dim).to_string(); },
        py::arg("expression"), py::arg("dim") = 3);
    m.def(
        "describe", [](const std::string& path) { return describe(load_config(path)).dump(); }, py::arg("config"));
    m.def(
        "run",
        [](const std::string& path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
            auto cfg = load_config(path);
            if (seed) cfg.seed = *seed;
            ExperimentOutcome outcome;
            {
                py::gil_scoped_release release;
                outcome = run_experiment(cfg, out_dir);
            }
            return outcome.report.dump();
        },
        py::arg("config"), py::arg("out") = "", py::arg("seed") = py::none());
}
