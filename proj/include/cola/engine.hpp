#pragma once

#include <cstdint>
#include <vector>

#include "cola/certificates.hpp"
#include "cola/data.hpp"
#include "cola/matrix.hpp"
#include "cola/problem.hpp"
#include "cola/rng.hpp"
#include "cola/topology.hpp"

namespace cola {

struct NodeState {
    std::size_t id = 0;
    std::vector<double> x;  // owned block values, aligned with partition.blocks[id]
    std::vector<double> v;  // local estimate of Ax
    bool active = true;     // inactive => x frozen for the round
};

enum class SigmaPrimeMode { gamma_k, refined, explicit_value };

struct EngineConfig {
    double gamma = 1.0;
    SigmaPrimeMode sigma_mode = SigmaPrimeMode::gamma_k;
    double sigma_prime_explicit = 0.0;  // used when sigma_mode == explicit_value
    std::size_t kappa = 5;
    std::size_t rounds = 300;
    double dropout_p = 1.0;
    bool dropout_reset = false;  // alternative failure model: leaving nodes reset x_[k]
    std::size_t gossip_B = 1;
    std::uint64_t solver_seed = 1;
    std::uint64_t dropout_seed = 1;
    std::size_t cert_every = 10;  // certificate cadence; 0 disables
    double cert_epsilon = 1e-3;
    std::size_t threads = 1;
    bool permutation_sweeps = false;
};

struct CertRoundLog {
    std::size_t round = 0;
    std::vector<double> cond_gap_lhs;        // per node
    std::vector<double> cond_deviation_lhs;  // per node
    double cond_gap_rhs = 0.0;
    double cond_deviation_rhs = 0.0;
    std::vector<char> pass_gap;
    std::vector<char> pass_deviation;
    bool all_pass = false;
    double gap_at_v = 0.0;
    double gap_at_mixed = 0.0;
};

struct RunTrace {
    std::vector<double> FA, HA, gap, consensus_violation;
    std::vector<int> active_nodes;
    std::vector<int> cert_all_pass;  // -1 on rounds without certificate evaluation
    std::vector<double> elapsed_ms;  // simulated cost model, cumulative
    std::vector<std::uint64_t> cumulative_updates;
    std::vector<CertRoundLog> cert_rounds;

    // Constants resolved at preflight, reported in the run metadata.
    double sigma_prime = 0.0;
    double beta = 0.0;
    double support_radius = 0.0;
    double sum_nk2_sigma = 0.0;

    std::size_t rounds() const { return FA.size(); }
};

// v_k^{t+1/2} = sum_l W_kl v_l for every node.
void gossip_step(std::vector<NodeState>& states, const MixingMatrix& W);

// Each node independently stays active with probability p (flags drawn
// sequentially in node order from `rng`). The effective mixing matrix keeps
// W_ij only between active pairs, absorbs removed mass into diagonals, and
// isolates inactive nodes (W_kk = 1), which preserves symmetry and double
// stochasticity over the full index set.
MixingMatrix apply_dropout(std::vector<NodeState>& states, const MixingMatrix& W_base, double p,
                           Rng& rng);

// Appends a node owning `new_block` (columns disjoint from the current
// partition). Its x block starts at zero and its v at the current network
// average, so the consensus identity holds immediately at the new K. The
// caller rebuilds the mixing matrix for the grown graph.
void join_node(std::vector<NodeState>& states, Partition& partition, const SparseColMatrix& A,
               const std::vector<std::size_t>& new_block);

struct Engine {
    Engine(const SparseColMatrix& A, const ProblemSpec& problem, Partition partition,
           GossipSchedule schedule, EngineConfig config);

    // One bulk-synchronous round: dropout, B gossip steps, local solves on
    // worker threads, state update, metric logging.
    void cola_round();

    // Executes config.rounds rounds after preflight; trace() holds the log.
    void run();

    const RunTrace& trace() const { return trace_; }
    const std::vector<NodeState>& states() const { return states_; }
    std::vector<double> assemble_x() const;

    // Largest relative consensus-identity violation seen across all rounds.
    double worst_identity_error() const { return worst_identity_error_; }

    double sigma_prime() const { return sigma_prime_; }

  private:
    void preflight();
    void log_round_metrics(std::size_t round, int active_count, const MixingMatrix& W_round);

    const SparseColMatrix& A_;
    const ProblemSpec& problem_;
    Partition partition_;
    GossipSchedule schedule_;
    EngineConfig config_;
    DataConstants data_constants_;
    std::vector<NodeState> states_;
    std::vector<Rng> node_rngs_;
    Rng dropout_rng_;
    RunTrace trace_;
    double sigma_prime_ = 0.0;
    std::size_t round_index_ = 0;
    std::uint64_t updates_done_ = 0;
    double simulated_ms_ = 0.0;
    double worst_identity_error_ = 0.0;
};

// Probe-subspace estimate of the refined subproblem parameter: gamma *
// (largest generalized Rayleigh quotient ||A x||^2 / sum_k ||A_[k] x_[k]||^2
// over random probes), inflated for safety, floored at gamma and capped at
// gamma * K.
double refine_sigma_prime(const SparseColMatrix& A, const Partition& partition, double gamma,
                          std::uint64_t seed);

}  // namespace cola
