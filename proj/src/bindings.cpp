#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hotype/harness.hpp"

namespace py = pybind11;
using namespace hotype;
namespace hh = hotype::harness;

namespace {

template <class E>
void exception(py::module_& m, const char* name, py::handle base) {
    py::register_exception<E>(m, name, base);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Discrete spaces of homogeneous type and singular integrals";

    auto err = py::register_exception<Error>(m, "Error");
    exception<BudgetExceeded>(m, "BudgetExceeded", err);
    exception<KindMismatch>(m, "KindMismatch", err);
    exception<IndexOutOfRange>(m, "IndexOutOfRange", err);
    exception<DuplicatePoint>(m, "DuplicatePoint", err);
    exception<ResolutionError>(m, "ResolutionError", err);
    exception<UnsupportedFamily>(m, "UnsupportedFamily", err);
    exception<DegenerateBall>(m, "DegenerateBall", err);
    exception<SpaceMismatch>(m, "SpaceMismatch", err);
    exception<SchemaError>(m, "SchemaError", err);
    exception<FormatError>(m, "FormatError", err);

    py::enum_<SpaceKind>(m, "SpaceKind")
        .value("Euclidean", SpaceKind::Euclidean)
        .value("Heisenberg", SpaceKind::Heisenberg)
        .value("Sphere", SpaceKind::Sphere);

    py::class_<Constants>(m, "Constants")
        .def(py::init<>())
        .def_readwrite("c", &Constants::c)
        .def_readwrite("K", &Constants::K)
        .def_readwrite("gamma", &Constants::gamma)
        .def_readwrite("beta", &Constants::beta)
        .def_readwrite("A", &Constants::A);

    py::class_<DiscreteSpace>(m, "DiscreteSpace")
        .def_property_readonly("kind", &DiscreteSpace::kind)
        .def_property_readonly("param", &DiscreteSpace::param)
        .def_property_readonly("stride", &DiscreteSpace::stride)
        .def("__len__", &DiscreteSpace::size)
        .def_property_readonly("coords", &DiscreteSpace::all_coords)
        .def_property_readonly("weights", &DiscreteSpace::weights)
        .def_property_readonly("total_measure", &DiscreteSpace::total_measure)
        .def_property_readonly("diameter", &DiscreteSpace::diameter)
        .def_property_readonly("min_distance", &DiscreteSpace::min_distance)
        .def_property_readonly("constants", &DiscreteSpace::constants)
        .def_property_readonly("id", &DiscreteSpace::id)
        .def_property_readonly("normalized", [](const DiscreteSpace& s) { return s.metric().normalized; })
        .def("distance", &DiscreteSpace::distance, py::arg("i"), py::arg("j"));

    py::class_<BuildOptions>(m, "BuildOptions")
        .def(py::init<>())
        .def_readwrite("point_budget", &BuildOptions::point_budget);

    m.def("grid_space", &build_grid_space, py::arg("dim"), py::arg("halfwidth"), py::arg("points"),
          py::arg("options") = BuildOptions{});
    m.def("heisenberg_space", &build_heisenberg_space, py::arg("n"), py::arg("extent"), py::arg("points"),
          py::arg("options") = BuildOptions{});
    m.def("sphere_space", &build_sphere_space, py::arg("n"), py::arg("points"), py::arg("seed"),
          py::arg("options") = BuildOptions{});
    m.def("sphere_lattice", &build_sphere_lattice, py::arg("rings"), py::arg("phases"),
          py::arg("options") = BuildOptions{});
    m.def("normalize_metric", &normalize_metric, py::arg("space"), py::arg("gamma"), py::arg("seed") = 1);
    m.def("load_space", &load_space);
    m.def("save_space", &save_space);

    py::class_<Ball>(m, "Ball")
        .def_readonly("center", &Ball::center)
        .def_readonly("radius", &Ball::radius)
        .def_readonly("members", &Ball::members)
        .def_readonly("measure", &Ball::measure);
    m.def("ball", &ball, py::arg("space"), py::arg("center"), py::arg("radius"));

    py::class_<DoublingReport>(m, "DoublingReport")
        .def_readonly("K_est", &DoublingReport::K_est)
        .def_readonly("gamma_fit", &DoublingReport::gamma_fit)
        .def_readonly("beta_est", &DoublingReport::beta_est)
        .def_readonly("radii", &DoublingReport::radii);
    m.def("doubling_report", &doubling_report, py::arg("space"), py::arg("samples"), py::arg("seed"),
          py::arg("dilation") = 2.0);

    py::class_<DiscreteFunction>(m, "DiscreteFunction")
        .def(py::init([](const DiscreteSpace& s, std::vector<cplx> v) { return DiscreteFunction(s, std::move(v)); }))
        .def_readonly("space_id", &DiscreteFunction::space_id)
        .def_readonly("values", &DiscreteFunction::values)
        .def("sup_norm", &DiscreteFunction::sup_norm)
        .def("__len__", &DiscreteFunction::size);
    m.def("function_from", [](const DiscreteSpace& s, const std::function<cplx(std::vector<double>)>& fn) {
        return DiscreteFunction::from(s, [&](const double* x) { return fn(std::vector<double>(x, x + s.stride())); });
    });
    m.def("lp_norm", &lp_norm);

    py::class_<NormReport>(m, "NormReport")
        .def_readonly("name", &NormReport::name)
        .def_readonly("value", &NormReport::value)
        .def_property_readonly("witness", [](const NormReport& r) { return py::make_tuple(r.witness.center, r.witness.radius); });
    m.def("bmo_norm", py::overload_cast<const DiscreteSpace&, const DiscreteFunction&>(&bmo_norm));
    m.def("campanato_norm",
          [](const DiscreteSpace& s, const DiscreteFunction& f, double alpha, int k, double q) {
              return campanato_norm(s, PolynomialFamily::for_space(s), f, alpha, k, q);
          },
          py::arg("space"), py::arg("f"), py::arg("alpha"), py::arg("k"), py::arg("q") = 2.0);

    py::class_<MomentSpec>(m, "MomentSpec")
        .def_readonly("p", &MomentSpec::p)
        .def_readonly("k", &MomentSpec::k)
        .def_readonly("alpha", &MomentSpec::alpha)
        .def_readonly("gamma", &MomentSpec::gamma);
    m.def("moment_spec", &moment_spec, py::arg("p"), py::arg("gamma"), py::arg("beta") = 1.0);

    py::class_<AtomCheck>(m, "AtomCheck")
        .def_readonly("support", &AtomCheck::support)
        .def_readonly("size", &AtomCheck::size)
        .def_readonly("moments", &AtomCheck::moments)
        .def_readonly("moment_slack", &AtomCheck::moment_slack)
        .def("passed", &AtomCheck::pass);
    py::class_<Atom>(m, "Atom")
        .def_readonly("function", &Atom::function)
        .def_readonly("ball", &Atom::ball)
        .def_readonly("seed", &Atom::seed);
    m.def("make_atom",
          [](const DiscreteSpace& s, const Ball& b, const MomentSpec& spec, std::uint64_t seed) {
              return make_atom(s, PolynomialFamily::for_space(s), b, spec, AtomKind::SupNormalized, seed);
          },
          py::arg("space"), py::arg("ball"), py::arg("spec"), py::arg("seed"));
    m.def("verify_atom", [](const DiscreteSpace& s, const Atom& a) {
        return verify_atom(s, PolynomialFamily::for_space(s), a);
    });
    m.def("pairing", &pairing);

    py::class_<Kernel>(m, "Kernel").def_readonly("name", &Kernel::name);
    m.def("kernel", &kernel_by_name, py::arg("name"), py::arg("space"));
    m.def("apply_pv", &apply_pv);
    m.def("commutator_apply",
          py::overload_cast<const DiscreteSpace&, const Kernel&, const DiscreteFunction&, const DiscreteFunction&>(
              &commutator_apply));
    py::enum_<SzegoMode>(m, "SzegoMode")
        .value("Banded", SzegoMode::Banded)
        .value("PrincipalValue", SzegoMode::PrincipalValue);
    m.def("szego_projection", &szego_projection, py::arg("space"), py::arg("f"), py::arg("mode") = SzegoMode::Banded,
          py::arg("degree") = 4);

    py::class_<hh::Criterion>(m, "Criterion")
        .def_readonly("name", &hh::Criterion::name)
        .def_readonly("passed", &hh::Criterion::pass)
        .def_readonly("detail", &hh::Criterion::detail);
    py::class_<hh::Table>(m, "Table")
        .def_readonly("name", &hh::Table::name)
        .def_readonly("columns", &hh::Table::columns)
        .def_readonly("rows", &hh::Table::rows);
    py::class_<hh::SuiteResult>(m, "SuiteResult")
        .def_readonly("suite", &hh::SuiteResult::suite)
        .def_readonly("space_id", &hh::SuiteResult::space_id)
        .def_readonly("config_hash", &hh::SuiteResult::config_hash)
        .def_readonly("criteria", &hh::SuiteResult::criteria)
        .def_readonly("constants", &hh::SuiteResult::constants)
        .def_readonly("tables", &hh::SuiteResult::tables)
        .def_readonly("notes", &hh::SuiteResult::notes)
        .def("passed", &hh::SuiteResult::pass)
        .def("constant", &hh::SuiteResult::constant)
        .def("report_text", [](const hh::SuiteResult& r) { return hh::report_text(r); });

    m.def("run_config", [](const std::string& text) { return hh::run(hh::Config::parse_text(text)); },
          py::arg("text"), py::call_guard<py::gil_scoped_release>());
    m.def("run_config_file", [](const std::string& path) { return hh::run(hh::Config::load(path)); },
          py::arg("path"), py::call_guard<py::gil_scoped_release>());
    m.def("resolve_config", [](const std::string& text) { return hh::Config::parse_text(text).resolve().text(); });
    m.def("parse_report", &hh::parse_report);
    m.attr("__version__") = hh::kToolVersion;
}
