#include "cola/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cola {

using nlohmann::json;

namespace {

json config_to_json(const RunConfig& c) {
    json doc;
    doc["problem"] = {{"kind", c.problem.kind},
                      {"lambda", c.problem.lambda},
                      {"lambda_rel", c.problem.lambda_rel},
                      {"L", c.problem.L},
                      {"orientation", c.problem.orientation}};
    doc["data"] = {{"source", c.data.source},     {"path", c.data.path},
                   {"orientation", c.data.orientation}, {"d", c.data.d},
                   {"n", c.data.n},               {"density", c.data.density},
                   {"noise", c.data.noise},       {"seed", c.data.seed}};
    doc["topology"] = {{"kind", c.topology.kind},
                       {"K", c.topology.K},
                       {"adjacency_file", c.topology.adjacency_file},
                       {"B", c.topology.B}};
    doc["gamma"] = c.gamma;
    doc["sigma_prime"] = c.sigma_prime;
    doc["kappa"] = c.kappa;
    doc["rounds"] = c.rounds;
    doc["dropout_p"] = c.dropout_p;
    doc["dropout_reset"] = c.dropout_reset;
    doc["cert_every"] = c.cert_every;
    doc["cert_epsilon"] = c.cert_epsilon;
    doc["seeds"] = {{"partition", c.seeds.partition},
                    {"solver", c.seeds.solver},
                    {"dropout", c.seeds.dropout}};
    doc["threads"] = c.threads;
    doc["permutation_sweeps"] = c.permutation_sweeps;
    doc["output"] = c.output;
    doc["certs_output"] = c.certs_output;
    doc["meta_output"] = c.meta_output;
    doc["reference"] = {{"budget", c.reference_budget},
                        {"gap_target_rel", c.reference_gap_rel},
                        {"cache_dir", c.cache_dir}};
    if (c.sweep) {
        doc["sweep"] = {{"kappa", c.sweep->kappa},
                        {"topology", c.sweep->topology},
                        {"dropout_p", c.sweep->dropout_p},
                        {"output_dir", c.sweep->output_dir}};
    }
    return doc;
}

RunConfig config_from_json(const json& doc) {
    RunConfig c;
    if (doc.contains("problem")) {
        const json& p = doc["problem"];
        c.problem.kind = p.value("kind", c.problem.kind);
        c.problem.lambda = p.value("lambda", c.problem.lambda);
        c.problem.lambda_rel = p.value("lambda_rel", c.problem.lambda_rel);
        c.problem.L = p.value("L", c.problem.L);
        c.problem.orientation = p.value("orientation", c.problem.orientation);
    }
    if (doc.contains("data")) {
        const json& d = doc["data"];
        c.data.source = d.value("source", c.data.source);
        c.data.path = d.value("path", c.data.path);
        c.data.orientation = d.value("orientation", c.data.orientation);
        c.data.d = d.value("d", c.data.d);
        c.data.n = d.value("n", c.data.n);
        c.data.density = d.value("density", c.data.density);
        c.data.noise = d.value("noise", c.data.noise);
        c.data.seed = d.value("seed", c.data.seed);
    }
    if (doc.contains("topology")) {
        const json& t = doc["topology"];
        c.topology.kind = t.value("kind", c.topology.kind);
        c.topology.K = t.value("K", c.topology.K);
        c.topology.adjacency_file = t.value("adjacency_file", c.topology.adjacency_file);
        c.topology.B = t.value("B", c.topology.B);
    }
    c.gamma = doc.value("gamma", c.gamma);
    if (doc.contains("sigma_prime")) {
        if (doc["sigma_prime"].is_number()) {
            c.sigma_prime = format_double(doc["sigma_prime"].get<double>());
        } else {
            c.sigma_prime = doc["sigma_prime"].get<std::string>();
        }
    }
    c.kappa = doc.value("kappa", c.kappa);
    c.rounds = doc.value("rounds", c.rounds);
    c.dropout_p = doc.value("dropout_p", c.dropout_p);
    c.dropout_reset = doc.value("dropout_reset", c.dropout_reset);
    c.cert_every = doc.value("cert_every", c.cert_every);
    c.cert_epsilon = doc.value("cert_epsilon", c.cert_epsilon);
    if (doc.contains("seeds")) {
        const json& s = doc["seeds"];
        c.seeds.partition = s.value("partition", c.seeds.partition);
        c.seeds.solver = s.value("solver", c.seeds.solver);
        c.seeds.dropout = s.value("dropout", c.seeds.dropout);
    }
    c.threads = doc.value("threads", c.threads);
    c.permutation_sweeps = doc.value("permutation_sweeps", c.permutation_sweeps);
    c.output = doc.value("output", c.output);
    c.certs_output = doc.value("certs_output", c.certs_output);
    c.meta_output = doc.value("meta_output", c.meta_output);
    if (doc.contains("reference")) {
        const json& r = doc["reference"];
        c.reference_budget = r.value("budget", c.reference_budget);
        c.reference_gap_rel = r.value("gap_target_rel", c.reference_gap_rel);
        c.cache_dir = r.value("cache_dir", c.cache_dir);
    }
    if (doc.contains("sweep")) {
        SweepConfig sweep;
        const json& s = doc["sweep"];
        sweep.kappa = s.value("kappa", sweep.kappa);
        sweep.topology = s.value("topology", sweep.topology);
        sweep.dropout_p = s.value("dropout_p", sweep.dropout_p);
        sweep.output_dir = s.value("output_dir", sweep.output_dir);
        c.sweep = sweep;
    }
    return c;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc = json::parse(json_text);
    return config_from_json(doc);
}

std::string serialize_run_config(const RunConfig& config) {
    return config_to_json(config).dump(2);
}

RunConfig load_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> errors;
    if (c.problem.kind != "lasso" && c.problem.kind != "ridge") {
        errors.push_back("problem.kind must be lasso or ridge");
    }
    if (c.problem.lambda_rel > 0.0) {
        if (c.problem.kind != "lasso") {
            errors.push_back("problem.lambda_rel applies to lasso only");
        }
        if (c.problem.lambda_rel >= 1.0) {
            errors.push_back("problem.lambda_rel must be in (0, 1)");
        }
    } else if (!(c.problem.lambda > 0.0)) {
        errors.push_back("problem.lambda must be positive");
    }
    if (c.problem.kind == "ridge" && c.problem.orientation != "primal" &&
        c.problem.orientation != "dual") {
        errors.push_back("problem.orientation must be primal or dual");
    }
    if (c.data.source == "synthetic") {
        if (c.data.d == 0 || c.data.n == 0) errors.push_back("synthetic data needs d and n");
        if (!(c.data.density > 0.0) || c.data.density > 1.0) {
            errors.push_back("data.density must be in (0, 1]");
        }
    } else if (c.data.source == "libsvm") {
        if (c.data.path.empty()) errors.push_back("libsvm data needs a path");
        if (c.data.orientation != "features" && c.data.orientation != "samples") {
            errors.push_back("data.orientation must be features or samples");
        }
    } else {
        errors.push_back("data.source must be synthetic or libsvm");
    }
    if (!(c.gamma > 0.0) || c.gamma > 1.0) errors.push_back("gamma must be in (0, 1]");
    if (c.kappa < 1) errors.push_back("kappa must be >= 1");
    if (!(c.dropout_p > 0.0) || c.dropout_p > 1.0) errors.push_back("dropout_p must be in (0, 1]");
    if (c.topology.B < 1) errors.push_back("topology.B must be >= 1");
    if (c.topology.K < 1) errors.push_back("topology.K must be >= 1");
    if (c.sigma_prime != "gamma_k" && c.sigma_prime != "refined") {
        try {
            const double value = std::stod(c.sigma_prime);
            if (value < c.gamma) errors.push_back("explicit sigma_prime must be >= gamma");
        } catch (const std::logic_error&) {
            errors.push_back("sigma_prime must be gamma_k, refined, or a number");
        }
    }

    // Spectral preflight: K = 1 degenerates to the centralized method and is
    // allowed without a graph; otherwise the mixing matrix must contract.
    if (c.topology.K > 1 && errors.empty()) {
        try {
            Graph graph;
            if (c.topology.kind == "custom") {
                std::ifstream in(c.topology.adjacency_file);
                if (!in) {
                    errors.push_back("cannot open adjacency_file '" + c.topology.adjacency_file + "'");
                    return errors;
                }
                graph = parse_adjacency_list(in, c.topology.K);
            } else {
                graph = build_graph(graph_kind_from_string(c.topology.kind), c.topology.K);
            }
            MixingMatrix W = metropolis_weights(graph);
            if (W.beta >= 1.0 - 1e-12) {
                errors.push_back("spectral-gap preflight failed: beta = 1 (no communication)");
            }
        } catch (const std::exception& e) {
            errors.push_back(std::string("topology preflight failed: ") + e.what());
        }
    }
    return errors;
}

RunInputs build_run_inputs(const RunConfig& c) {
    std::vector<std::string> errors = validate_config(c);
    if (!errors.empty()) {
        std::string joined;
        for (const std::string& e : errors) joined += (joined.empty() ? "" : "; ") + e;
        throw std::invalid_argument("invalid config: " + joined);
    }

    RunInputs inputs;
    if (c.data.source == "synthetic") {
        synthesize_regression(c.data.d, c.data.n, c.data.density, c.data.noise, c.data.seed,
                              inputs.A, inputs.b);
    } else {
        std::ifstream in(c.data.path);
        if (!in) throw std::runtime_error("cannot open dataset '" + c.data.path + "'");
        LibsvmData parsed = parse_libsvm(in);
        ColumnsAre orientation = c.data.orientation == "samples" ? ColumnsAre::samples
                                                                 : ColumnsAre::features;
        inputs.A = transpose_to_columns(parsed, orientation);
        inputs.b = parsed.labels;
    }

    if (c.problem.kind == "lasso") {
        double lambda = c.problem.lambda;
        if (c.problem.lambda_rel > 0.0) {
            double lambda_max = 0.0;
            for (std::size_t i = 0; i < inputs.A.n_cols(); ++i) {
                lambda_max = std::max(lambda_max, std::abs(inputs.A.dot_column(i, inputs.b)));
            }
            lambda = c.problem.lambda_rel * lambda_max;
        }
        inputs.lambda_effective = lambda;
        inputs.problem = make_lasso(inputs.A, inputs.b, lambda, c.problem.L);
    } else {
        inputs.lambda_effective = c.problem.lambda;
        RidgeOrientation orientation = c.problem.orientation == "dual" ? RidgeOrientation::dual
                                                                       : RidgeOrientation::primal;
        inputs.problem = make_ridge(inputs.A, inputs.b, c.problem.lambda, orientation);
        if (c.problem.L > 0.0) inputs.problem.separable.L = c.problem.L;
    }

    inputs.partition = partition_columns(inputs.A.n_cols(), c.topology.K, c.seeds.partition);

    if (c.topology.K == 1) {
        MixingMatrix W;
        W.K = 1;
        W.weights = {1.0};
        W.beta = 0.0;
        inputs.schedule = gossip_schedule({W}, 1);
        inputs.beta = 0.0;
    } else {
        Graph graph;
        if (c.topology.kind == "custom") {
            std::ifstream in(c.topology.adjacency_file);
            graph = parse_adjacency_list(in, c.topology.K);
        } else {
            graph = build_graph(graph_kind_from_string(c.topology.kind), c.topology.K);
        }
        MixingMatrix W = metropolis_weights(graph);
        inputs.beta = W.beta;
        inputs.schedule = gossip_schedule({std::move(W)}, c.topology.B);
    }

    EngineConfig& e = inputs.engine;
    e.gamma = c.gamma;
    if (c.sigma_prime == "gamma_k") {
        e.sigma_mode = SigmaPrimeMode::gamma_k;
    } else if (c.sigma_prime == "refined") {
        e.sigma_mode = SigmaPrimeMode::refined;
    } else {
        e.sigma_mode = SigmaPrimeMode::explicit_value;
        e.sigma_prime_explicit = std::stod(c.sigma_prime);
    }
    e.kappa = c.kappa;
    e.rounds = c.rounds;
    e.dropout_p = c.dropout_p;
    e.dropout_reset = c.dropout_reset;
    e.gossip_B = c.topology.B;
    e.solver_seed = c.seeds.solver;
    e.dropout_seed = c.seeds.dropout;
    e.cert_every = c.cert_every;
    e.cert_epsilon = c.cert_epsilon;
    e.threads = c.threads;
    e.permutation_sweeps = c.permutation_sweeps;
    return inputs;
}

void emit_trace(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' line endings on every platform
    if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
    out << "round,FA,HA,gap,consensus_violation,active_nodes,cert_all_pass,elapsed_ms\n";
    for (std::size_t r = 0; r < trace.rounds(); ++r) {
        out << r << ',' << format_double(trace.FA[r]) << ',' << format_double(trace.HA[r]) << ','
            << format_double(trace.gap[r]) << ',' << format_double(trace.consensus_violation[r])
            << ',' << trace.active_nodes[r] << ',' << trace.cert_all_pass[r] << ','
            << format_double(trace.elapsed_ms[r]) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing trace file '" + path + "'");
}

void emit_certs(const RunTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write certificate file '" + path + "'");
    out << "round,node,cond_gap_lhs,cond_gap_rhs,pass_gap,cond_deviation_lhs,cond_deviation_rhs,"
           "pass_deviation,all_pass,gap_at_v,gap_at_mixed\n";
    for (const CertRoundLog& log : trace.cert_rounds) {
        for (std::size_t k = 0; k < log.cond_gap_lhs.size(); ++k) {
            out << log.round << ',' << k << ',' << format_double(log.cond_gap_lhs[k]) << ','
                << format_double(log.cond_gap_rhs) << ',' << int(log.pass_gap[k]) << ','
                << format_double(log.cond_deviation_lhs[k]) << ','
                << format_double(log.cond_deviation_rhs) << ',' << int(log.pass_deviation[k])
                << ',' << (log.all_pass ? 1 : 0) << ',' << format_double(log.gap_at_v) << ','
                << format_double(log.gap_at_mixed) << '\n';
        }
    }
    if (!out) throw std::runtime_error("failed writing certificate file '" + path + "'");
}

void emit_meta(const RunTrace& trace, const RunConfig& config, const std::string& path) {
    json doc;
    doc["sigma_prime"] = trace.sigma_prime;
    doc["beta"] = trace.beta;
    doc["support_radius"] = trace.support_radius;
    doc["sum_nk2_sigma"] = trace.sum_nk2_sigma;
    doc["rounds"] = trace.rounds() == 0 ? 0 : trace.rounds() - 1;
    doc["config"] = json::parse(serialize_run_config(config));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write meta file '" + path + "'");
    out << doc.dump(2) << '\n';
}

std::string resolve_output_path(const std::string& path) {
    namespace fs = std::filesystem;
    const char* base = std::getenv("COLA_OUT_DIR");
    if (base == nullptr || *base == '\0' || fs::path(path).is_absolute()) return path;
    return (fs::path(base) / path).string();
}

}  // namespace cola
