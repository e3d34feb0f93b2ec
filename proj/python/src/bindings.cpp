// python surface: experiment loading, simulation, the pde solve, policy cost
// evaluation, and the closed-form reference values
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "branchlab/config.hpp"
#include "branchlab/hjb.hpp"
#include "branchlab/mc.hpp"
#include "branchlab/oracles.hpp"
#include "branchlab/sim.hpp"

namespace py = pybind11;
using namespace branchlab;

namespace {

py::dict estimate_dict(const Estimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["std_error"] = e.std_error;
    d["replicates"] = e.replicates;
    d["censored"] = e.censored;
    return d;
}

std::vector<double> terminal_masses(const Experiment& ex, const ValueSurface* surface) {
    FeedbackPolicy policy = ex.run_policy(surface);
    RecordSpec rec;
    auto records = simulate_batch(ex.sim, ex.coeffs, policy, ex.initial_measure(), rec);
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records)
        if (!r.censored) out.push_back(r.final_measure.total_mass());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "branching-diffusion control laboratory";

    py::register_exception<config_error>(m, "ConfigError");

    py::class_<AtomicMeasure>(m, "AtomicMeasure")
        .def_readonly("dim", &AtomicMeasure::dim)
        .def_readonly("level", &AtomicMeasure::level)
        .def("total_mass", &AtomicMeasure::total_mass)
        .def("total_units", &AtomicMeasure::total_units)
        .def("atom_count", &AtomicMeasure::atom_count)
        .def("__repr__", [](const AtomicMeasure& mu) {
            return "AtomicMeasure(dim=" + std::to_string(mu.dim) +
                   ", level=" + std::to_string(mu.level) +
                   ", atoms=" + std::to_string(mu.atom_count()) + ")";
        });

    m.def(
        "atoms",
        [](const std::vector<double>& coords, const std::vector<double>& weights,
           long long level, int dim) {
            MeasureSpec spec;
            spec.kind = MeasureSpec::Kind::atoms;
            spec.dim = dim;
            spec.atom_coords = coords;
            spec.atom_weights = weights;
            return discretize(spec, level);
        },
        py::arg("coords"), py::arg("weights"), py::arg("level"), py::arg("dim") = 1,
        "discretize a weighted atom list at the given level");

    py::class_<ValueSurface>(m, "ValueSurface")
        .def_readonly("cfl", &ValueSurface::cfl)
        .def_property_readonly("nx", [](const ValueSurface& s) { return s.grid.nx; })
        .def_property_readonly("nt", [](const ValueSurface& s) { return s.grid.nt; })
        .def("w", [](const ValueSurface& s, double t, double x) {
            return s.interp(s.nearest_time_node(t), x);
        })
        .def("value_of_measure", [](const ValueSurface& s, double t, const AtomicMeasure& mu) {
            return value_of_measure(s, t, mu);
        });

    py::class_<Experiment>(m, "Experiment")
        .def_readonly("dim", &Experiment::dim)
        .def_readonly("config_hash", &Experiment::config_hash)
        .def_readonly("resolved", &Experiment::resolved)
        .def_property_readonly("level", [](const Experiment& ex) { return ex.sim.level; })
        .def_property_readonly("replicates",
                               [](const Experiment& ex) { return ex.sim.replicates; })
        .def("initial_measure", &Experiment::initial_measure);

    m.def(
        "load_experiment",
        [](const std::string& path, const std::vector<std::string>& overrides) {
            return load_experiment(path, overrides);
        },
        py::arg("path"), py::arg("overrides") = std::vector<std::string>{});

    m.def("solve_hjb", [](const Experiment& ex) {
        return solve_w(ex.grid, ex.coeffs, ex.controls, ex.terminal_h);
    });

    m.def(
        "simulate_terminal_masses",
        [](const Experiment& ex, const ValueSurface* surface) {
            return terminal_masses(ex, surface);
        },
        py::arg("experiment"), py::arg("surface") = nullptr,
        "terminal total masses of the non-censored replicates");

    m.def(
        "evaluate_cost",
        [](const Experiment& ex, const ValueSurface* surface) {
            FeedbackPolicy policy = ex.run_policy(surface);
            return estimate_dict(
                evaluate_cost(ex.sim, ex.coeffs, ex.cost, policy, ex.initial_measure()));
        },
        py::arg("experiment"), py::arg("surface") = nullptr);

    auto orc = m.def_submodule("oracles", "closed-form reference values");
    orc.def("riccati_w", &branchlab::oracles::riccati_w, py::arg("theta"), py::arg("gamma"),
            py::arg("tau"));
    orc.def("feller_laplace", &branchlab::oracles::feller_laplace, py::arg("theta"),
            py::arg("gamma"), py::arg("horizon"), py::arg("mass0"));
    orc.def("feller_extinction_prob", &branchlab::oracles::feller_extinction_prob,
            py::arg("gamma"), py::arg("horizon"), py::arg("mass0"));
    orc.def("heat_gaussian", &branchlab::oracles::heat_gaussian, py::arg("height"),
            py::arg("center"), py::arg("scale"), py::arg("sigma"), py::arg("tau"), py::arg("x"));
    orc.def("scheme_laplace", &branchlab::oracles::scheme_laplace, py::arg("level"),
            py::arg("gamma"), py::arg("dt"), py::arg("steps"), py::arg("theta"),
            py::arg("units0"));
    orc.def("qv_ratio_quadratic", &branchlab::oracles::qv_ratio_quadratic, py::arg("level"),
            py::arg("gamma"), py::arg("horizon"), py::arg("mass0"));
}
