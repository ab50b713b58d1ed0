#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cola/engine.hpp"
#include "cola/io.hpp"
#include "cola/reference.hpp"

namespace py = pybind11;
using namespace cola;

namespace {

SparseColMatrix matrix_from_triplets(
    std::size_t n_rows, std::size_t n_cols,
    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& columns) {
    if (columns.size() != n_cols) throw std::invalid_argument("column count mismatch");
    SparseColMatrix A(n_rows, n_cols);
    for (const auto& column : columns) A.push_column(column);
    return A;
}

py::dict trace_to_dict(const RunTrace& trace) {
    py::dict out;
    out["FA"] = trace.FA;
    out["HA"] = trace.HA;
    out["gap"] = trace.gap;
    out["consensus_violation"] = trace.consensus_violation;
    out["active_nodes"] = trace.active_nodes;
    out["cert_all_pass"] = trace.cert_all_pass;
    out["elapsed_ms"] = trace.elapsed_ms;
    out["cumulative_updates"] = trace.cumulative_updates;
    out["sigma_prime"] = trace.sigma_prime;
    out["beta"] = trace.beta;
    return out;
}

py::dict run_config_json(const std::string& json_text) {
    RunConfig config = parse_run_config(json_text);
    std::vector<std::string> errors = validate_config(config);
    if (!errors.empty()) throw std::invalid_argument("invalid config: " + errors.front());
    RunInputs inputs = build_run_inputs(config);
    Engine engine(inputs.A, inputs.problem, inputs.partition, inputs.schedule, inputs.engine);
    engine.run();
    py::dict out = trace_to_dict(engine.trace());
    out["x"] = engine.assemble_x();
    out["worst_identity_error"] = engine.worst_identity_error();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "decentralized linear learning core";

    py::class_<SparseColMatrix>(m, "SparseColMatrix")
        .def(py::init(&matrix_from_triplets), py::arg("n_rows"), py::arg("n_cols"),
             py::arg("columns"))
        .def_property_readonly("n_rows", &SparseColMatrix::n_rows)
        .def_property_readonly("n_cols", &SparseColMatrix::n_cols)
        .def("multiply", [](const SparseColMatrix& A, const std::vector<double>& x) {
            std::vector<double> out(A.n_rows(), 0.0);
            A.multiply(x, out);
            return out;
        });

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def("objective", &ProblemSpec::objective)
        .def("g_total", &ProblemSpec::g_total);

    m.def("make_lasso", &make_lasso, py::arg("A"), py::arg("b"), py::arg("lambda_"),
          py::arg("L") = 0.0);
    m.def("make_ridge", [](const SparseColMatrix& A, const std::vector<double>& y, double lambda,
                           const std::string& orientation) {
        return make_ridge(A, y, lambda,
                          orientation == "dual" ? RidgeOrientation::dual
                                                : RidgeOrientation::primal);
    }, py::arg("A"), py::arg("y"), py::arg("lambda_"), py::arg("orientation") = "primal");

    m.def("metropolis_beta", [](const std::string& kind, std::size_t K) {
        Graph graph = build_graph(graph_kind_from_string(kind), K);
        MixingMatrix W = metropolis_weights(graph);
        return W.beta;
    }, py::arg("kind"), py::arg("K"), "spectral mixing parameter of the named topology");

    m.def("decentralized_gap", &decentralized_gap, py::arg("A"), py::arg("problem"),
          py::arg("x"), py::arg("v"));

    m.def("centralized_gap", &centralized_gap, py::arg("A"), py::arg("problem"), py::arg("x"));

    m.def("compute_reference", [](const SparseColMatrix& A, const ProblemSpec& problem,
                                  std::uint64_t budget, double gap_target) {
        ReferenceOptimum ref = compute_reference(A, problem, budget, gap_target);
        py::dict out;
        out["f_star"] = ref.f_star;
        out["x"] = ref.x;
        out["residual_gap"] = ref.residual_gap;
        out["updates_used"] = ref.updates_used;
        out["reached_target"] = ref.reached_target;
        return out;
    }, py::arg("A"), py::arg("problem"), py::arg("budget"), py::arg("gap_target"));

    m.def("run_config", &run_config_json, py::arg("json_text"),
          "parse a JSON run config, execute it, and return the trace as a dict");

    m.def("validate_config", [](const std::string& json_text) {
        return validate_config(parse_run_config(json_text));
    }, py::arg("json_text"));
}
