#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cola/engine.hpp"

namespace cola {

struct ProblemConfig {
    std::string kind = "lasso";  // lasso | ridge
    double lambda = 1.0;
    double lambda_rel = 0.0;  // lasso: if > 0, lambda = lambda_rel * max_i |A_i^T b|
    double L = 0.0;           // lasso radius; 0 = computed default
    std::string orientation = "primal";  // ridge only: primal | dual
};

struct DataConfig {
    std::string source = "synthetic";  // synthetic | libsvm
    std::string path;                  // libsvm only
    std::string orientation = "features";
    std::size_t d = 0, n = 0;  // synthetic only
    double density = 1.0;
    double noise = 0.0;
    std::uint64_t seed = 1;
};

struct TopologyConfig {
    std::string kind = "ring";  // ring | cycle2 | cycle3 | grid2d | complete | custom
    std::size_t K = 2;
    std::string adjacency_file;  // custom only
    std::size_t B = 1;
};

struct SeedsConfig {
    std::uint64_t partition = 1, solver = 1, dropout = 1;
};

struct SweepConfig {
    std::vector<std::size_t> kappa;
    std::vector<std::string> topology;
    std::vector<double> dropout_p;
    std::string output_dir = "sweep_out";
};

struct RunConfig {
    ProblemConfig problem;
    DataConfig data;
    TopologyConfig topology;
    double gamma = 1.0;
    std::string sigma_prime = "gamma_k";  // gamma_k | refined | numeric literal
    std::size_t kappa = 5;
    std::size_t rounds = 300;
    double dropout_p = 1.0;
    bool dropout_reset = false;
    std::size_t cert_every = 10;
    double cert_epsilon = 1e-3;
    SeedsConfig seeds;
    std::size_t threads = 1;
    bool permutation_sweeps = false;
    std::string output = "trace.csv";
    std::string certs_output;
    std::string meta_output;
    std::uint64_t reference_budget = 40'000'000;
    double reference_gap_rel = 1e-9;
    std::string cache_dir = ".refcache";
    std::optional<SweepConfig> sweep;
};

RunConfig parse_run_config(const std::string& json_text);
std::string serialize_run_config(const RunConfig& config);
RunConfig load_run_config_file(const std::string& path);

// Static validation plus the spectral preflight (builds the topology and
// checks beta < 1). Returns human-readable problems; empty means valid.
std::vector<std::string> validate_config(const RunConfig& config);

// Everything needed to construct an Engine from a config.
struct RunInputs {
    SparseColMatrix A;
    std::vector<double> b;
    ProblemSpec problem;
    Partition partition;
    GossipSchedule schedule;
    EngineConfig engine;
    double beta = 0.0;
    double lambda_effective = 0.0;  // lambda after lambda_rel resolution
};

RunInputs build_run_inputs(const RunConfig& config);

// CSV with the pinned header
//   round,FA,HA,gap,consensus_violation,active_nodes,cert_all_pass,elapsed_ms
// and 17-significant-digit floats (round-trip exact).
void emit_trace(const RunTrace& trace, const std::string& path);

// Per-node certificate rows for every evaluated round.
void emit_certs(const RunTrace& trace, const std::string& path);

// Derived constants of the run as JSON (sigma', beta, L, sum n_k^2 sigma_k).
void emit_meta(const RunTrace& trace, const RunConfig& config, const std::string& path);

// Resolves a possibly relative output path against the directory named by the
// COLA_OUT_DIR environment variable (used only as the default output root).
std::string resolve_output_path(const std::string& path);

std::string format_double(double value);  // %.17g

}  // namespace cola
