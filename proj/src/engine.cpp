#include "cola/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "cola/local_solver.hpp"

namespace cola {

namespace {

// Simulated per-round cost model (trace reproducibility requires elapsed_ms
// to be deterministic; measured wall time would differ run to run).
constexpr double kMsPerUpdateNnz = 1e-4;
constexpr double kMsPerCommDouble = 1e-5;

double vector_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double value : v) acc += value * value;
    return std::sqrt(acc);
}

// Spectral norm of (P - (1/K) 1 1^T) via the symmetric eigenvalues of Q^T Q;
// this is the consensus contraction factor of a (possibly non-symmetric)
// product of mixing matrices.
double consensus_contraction(const std::vector<double>& P, std::size_t K) {
    std::vector<double> Q(P);
    const double uniform = 1.0 / static_cast<double>(K);
    for (double& value : Q) value -= uniform;
    std::vector<double> QtQ(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < K; ++r) acc += Q[r * K + i] * Q[r * K + j];
            QtQ[i * K + j] = acc;
        }
    }
    std::vector<double> eigenvalues = symmetric_eigenvalues(std::move(QtQ), K);
    return std::sqrt(std::max(0.0, eigenvalues.back()));
}

}  // namespace

void gossip_step(std::vector<NodeState>& states, const MixingMatrix& W) {
    const std::size_t K = states.size();
    if (W.K != K) throw std::invalid_argument("gossip_step: mixing matrix size mismatch");
    const std::size_t d = states.empty() ? 0 : states[0].v.size();
    std::vector<std::vector<double>> next(K);
    for (std::size_t k = 0; k < K; ++k) {
        next[k].assign(d, 0.0);
        for (std::size_t l = 0; l < K; ++l) {
            const double w = W.at(k, l);
            if (w == 0.0) continue;
            const std::vector<double>& v_l = states[l].v;
            for (std::size_t r = 0; r < d; ++r) next[k][r] += w * v_l[r];
        }
    }
    for (std::size_t k = 0; k < K; ++k) states[k].v = std::move(next[k]);
}

MixingMatrix apply_dropout(std::vector<NodeState>& states, const MixingMatrix& W_base, double p,
                           Rng& rng) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("apply_dropout: p must be in (0, 1]");
    const std::size_t K = states.size();
    // Flags are drawn sequentially in node order so worker parallelism cannot
    // reorder the stream.
    for (std::size_t k = 0; k < K; ++k) states[k].active = p >= 1.0 || rng.next_double() < p;

    MixingMatrix W = W_base;
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            if (i == j) continue;
            if (!states[i].active || !states[j].active) {
                // Removed off-diagonal mass moves to the diagonal, keeping the
                // matrix symmetric and doubly stochastic over all K indices.
                W.at(i, i) += W.at(i, j);
                W.at(i, j) = 0.0;
            }
        }
    }
    return W;
}

void join_node(std::vector<NodeState>& states, Partition& partition, const SparseColMatrix& A,
               const std::vector<std::size_t>& new_block) {
    const std::size_t K_old = states.size();
    if (K_old == 0) throw std::invalid_argument("join_node: need an existing network");
    for (std::size_t col : new_block) {
        if (col >= A.n_cols()) throw std::invalid_argument("join_node: column id out of range");
        for (const auto& block : partition.blocks) {
            if (std::find(block.begin(), block.end(), col) != block.end()) {
                throw std::invalid_argument("join_node: column " + std::to_string(col) +
                                            " already owned");
            }
        }
    }

    NodeState fresh;
    fresh.id = K_old;
    fresh.x.assign(new_block.size(), 0.0);
    // v initialized to the current network average keeps (1/K) sum v = Ax
    // true at the incremented K.
    fresh.v.assign(A.n_rows(), 0.0);
    for (const NodeState& state : states) {
        for (std::size_t r = 0; r < fresh.v.size(); ++r) fresh.v[r] += state.v[r];
    }
    for (double& value : fresh.v) value /= static_cast<double>(K_old);

    partition.blocks.push_back(new_block);
    if (partition.assignments.size() < A.n_cols()) partition.assignments.resize(A.n_cols(), 0);
    for (std::size_t col : new_block) {
        partition.assignments[col] = static_cast<std::uint32_t>(K_old);
    }
    states.push_back(std::move(fresh));
}

double refine_sigma_prime(const SparseColMatrix& A, const Partition& partition, double gamma,
                          std::uint64_t seed) {
    const std::size_t K = partition.K();
    const std::size_t n = A.n_cols();
    const std::size_t d = A.n_rows();
    constexpr std::size_t kProbes = 8;
    constexpr double kInflation = 1.25;  // probe maximum underestimates the true ratio

    Rng rng(derive_stream_seed(seed, 0x51B7UL));
    std::vector<std::vector<double>> probes(kProbes, std::vector<double>(n));
    for (auto& probe : probes) {
        for (double& value : probe) value = rng.next_gaussian();
    }

    // Per-probe, per-node block images A_[k] x_[k]; their sums are A x.
    std::vector<std::vector<double>> full(kProbes, std::vector<double>(d, 0.0));
    std::vector<double> m1(kProbes * kProbes, 0.0);
    std::vector<double> m2(kProbes * kProbes, 0.0);
    std::vector<std::vector<double>> block_image(kProbes, std::vector<double>(d));
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t a = 0; a < kProbes; ++a) {
            std::fill(block_image[a].begin(), block_image[a].end(), 0.0);
            for (std::size_t col : partition.blocks[k]) {
                if (probes[a][col] != 0.0) A.axpy_column(col, probes[a][col], block_image[a]);
            }
            for (std::size_t r = 0; r < d; ++r) full[a][r] += block_image[a][r];
        }
        for (std::size_t a = 0; a < kProbes; ++a) {
            for (std::size_t b = a; b < kProbes; ++b) {
                double acc = 0.0;
                for (std::size_t r = 0; r < d; ++r) acc += block_image[a][r] * block_image[b][r];
                m2[a * kProbes + b] += acc;
                if (a != b) m2[b * kProbes + a] += acc;
            }
        }
    }
    for (std::size_t a = 0; a < kProbes; ++a) {
        for (std::size_t b = a; b < kProbes; ++b) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r) acc += full[a][r] * full[b][r];
            m1[a * kProbes + b] = acc;
            m1[b * kProbes + a] = acc;
        }
    }

    // Largest generalized eigenvalue of (M1, M2) via Cholesky whitening. A
    // tiny ridge keeps the factorization stable for near-degenerate probes.
    double trace = 0.0;
    for (std::size_t a = 0; a < kProbes; ++a) trace += m2[a * kProbes + a];
    const double ridge = 1e-12 * std::max(trace, 1.0);
    for (std::size_t a = 0; a < kProbes; ++a) m2[a * kProbes + a] += ridge;

    std::vector<double> chol(kProbes * kProbes, 0.0);
    for (std::size_t i = 0; i < kProbes; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = m2[i * kProbes + j];
            for (std::size_t t = 0; t < j; ++t) acc -= chol[i * kProbes + t] * chol[j * kProbes + t];
            if (i == j) {
                chol[i * kProbes + i] = std::sqrt(std::max(acc, ridge));
            } else {
                chol[i * kProbes + j] = acc / chol[j * kProbes + j];
            }
        }
    }
    // C = L^{-1} M1 L^{-T}
    std::vector<double> tmp(kProbes * kProbes, 0.0);  // L^{-1} M1
    for (std::size_t col = 0; col < kProbes; ++col) {
        for (std::size_t i = 0; i < kProbes; ++i) {
            double acc = m1[i * kProbes + col];
            for (std::size_t t = 0; t < i; ++t) acc -= chol[i * kProbes + t] * tmp[t * kProbes + col];
            tmp[i * kProbes + col] = acc / chol[i * kProbes + i];
        }
    }
    std::vector<double> white(kProbes * kProbes, 0.0);  // tmp L^{-T}, row-wise solves
    for (std::size_t row = 0; row < kProbes; ++row) {
        for (std::size_t j = 0; j < kProbes; ++j) {
            double acc = tmp[row * kProbes + j];
            for (std::size_t t = 0; t < j; ++t) acc -= chol[j * kProbes + t] * white[row * kProbes + t];
            white[row * kProbes + j] = acc / chol[j * kProbes + j];
        }
    }
    std::vector<double> eigenvalues = symmetric_eigenvalues(std::move(white), kProbes);
    const double ratio = eigenvalues.empty() ? 1.0 : std::max(1.0, eigenvalues.back());

    const double K_d = static_cast<double>(K);
    return gamma * std::min(K_d, std::max(1.0, kInflation * ratio));
}

Engine::Engine(const SparseColMatrix& A, const ProblemSpec& problem, Partition partition,
               GossipSchedule schedule, EngineConfig config)
    : A_(A),
      problem_(problem),
      partition_(std::move(partition)),
      schedule_(std::move(schedule)),
      config_(config),
      dropout_rng_(derive_stream_seed(config.dropout_seed, 0xD801UL)) {
    preflight();
}

void Engine::preflight() {
    const std::size_t K = partition_.K();
    if (K == 0) throw std::invalid_argument("preflight: empty partition");
    if (schedule_.base.empty()) throw std::invalid_argument("preflight: empty gossip schedule");
    for (const MixingMatrix& W : schedule_.base) {
        if (W.K != K) throw std::invalid_argument("preflight: mixing matrix size != K");
    }
    if (config_.kappa < 1) throw std::invalid_argument("preflight: kappa must be >= 1");
    if (!(config_.gamma > 0.0) || config_.gamma > 1.0) {
        throw std::invalid_argument("preflight: gamma must be in (0, 1]");
    }
    if (!(config_.dropout_p > 0.0) || config_.dropout_p > 1.0) {
        throw std::invalid_argument("preflight: dropout_p must be in (0, 1]");
    }
    if (config_.gossip_B < 1) throw std::invalid_argument("preflight: gossip_B must be >= 1");

    // Consensus must contract over one full pass through the schedule;
    // beta = 1 means no communication and the run would never consense.
    std::vector<double> product(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i) product[i * K + i] = 1.0;
    for (const MixingMatrix& W : schedule_.base) {
        std::vector<double> next(K * K, 0.0);
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                double acc = 0.0;
                for (std::size_t t = 0; t < K; ++t) acc += W.at(i, t) * product[t * K + j];
                next[i * K + j] = acc;
            }
        }
        product = std::move(next);
    }
    trace_.beta = consensus_contraction(product, K);
    if (trace_.beta >= 1.0 - 1e-12) {
        throw std::invalid_argument("preflight: spectral gap is 0 (beta = 1), no communication");
    }

    data_constants_ = compute_data_constants(A_, partition_);
    trace_.sum_nk2_sigma = data_constants_.sum_nk2_sigma;
    trace_.support_radius = problem_.separable.L;

    switch (config_.sigma_mode) {
        case SigmaPrimeMode::gamma_k:
            sigma_prime_ = config_.gamma * static_cast<double>(K);
            break;
        case SigmaPrimeMode::refined:
            sigma_prime_ = refine_sigma_prime(A_, partition_, config_.gamma, config_.solver_seed);
            break;
        case SigmaPrimeMode::explicit_value:
            sigma_prime_ = config_.sigma_prime_explicit;
            break;
    }
    if (sigma_prime_ < config_.gamma) {
        throw std::invalid_argument("preflight: sigma' must be >= gamma");
    }
    trace_.sigma_prime = sigma_prime_;

    states_.resize(K);
    node_rngs_.clear();
    node_rngs_.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        states_[k].id = k;
        states_[k].x.assign(partition_.block_size(k), 0.0);
        states_[k].v.assign(A_.n_rows(), 0.0);
        states_[k].active = true;
        node_rngs_.emplace_back(derive_stream_seed(config_.solver_seed, k));
    }
    round_index_ = 0;
    updates_done_ = 0;
    simulated_ms_ = 0.0;
}

std::vector<double> Engine::assemble_x() const {
    std::vector<double> x(A_.n_cols(), 0.0);
    for (std::size_t k = 0; k < states_.size(); ++k) {
        const std::vector<std::size_t>& block = partition_.blocks[k];
        for (std::size_t t = 0; t < block.size(); ++t) x[block[t]] = states_[k].x[t];
    }
    return x;
}

void Engine::cola_round() {
    const std::size_t K = states_.size();

    MixingMatrix W_round = schedule_.matrix(round_index_, 0);
    int active_count = static_cast<int>(K);
    if (config_.dropout_p < 1.0) {
        W_round = apply_dropout(states_, W_round, config_.dropout_p, dropout_rng_);
        active_count = 0;
        for (NodeState& state : states_) active_count += state.active ? 1 : 0;
        if (config_.dropout_reset) {
            // Alternative failure model: a leaving node abandons its block.
            // v is repaired by the same amount so the consensus identity
            // keeps holding; the lost progress is what makes this model
            // oscillate.
            for (std::size_t k = 0; k < K; ++k) {
                NodeState& state = states_[k];
                if (state.active) continue;
                const std::vector<std::size_t>& block = partition_.blocks[k];
                bool any = false;
                for (std::size_t t = 0; t < block.size(); ++t) {
                    if (state.x[t] != 0.0) {
                        A_.axpy_column(block[t], -static_cast<double>(K) * state.x[t], state.v);
                        state.x[t] = 0.0;
                        any = true;
                    }
                }
                (void)any;
            }
        }
    } else {
        for (NodeState& state : states_) state.active = true;
    }

    double comm_doubles = 0.0;
    for (std::size_t step = 0; step < config_.gossip_B; ++step) {
        MixingMatrix W_step = schedule_.matrix(round_index_, step);
        if (config_.dropout_p < 1.0) {
            // Re-apply the absorption for this round's active set without
            // redrawing the flags.
            for (std::size_t i = 0; i < K; ++i) {
                for (std::size_t j = 0; j < K; ++j) {
                    if (i == j) continue;
                    if (!states_[i].active || !states_[j].active) {
                        W_step.at(i, i) += W_step.at(i, j);
                        W_step.at(i, j) = 0.0;
                    }
                }
            }
        }
        if (step == 0) W_round = W_step;
        gossip_step(states_, W_step);
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = i + 1; j < K; ++j) {
                if (W_step.at(i, j) != 0.0) comm_doubles += 2.0 * static_cast<double>(A_.n_rows());
            }
        }
    }

    // Local solves, parallel over nodes. Every cross-node read happens on the
    // post-gossip snapshot; each worker touches only its own nodes' state, so
    // the result is independent of the thread count.
    const std::size_t workers = std::max<std::size_t>(1, std::min(config_.threads, K));
    std::vector<double> solve_cost(K, 0.0);
    auto solve_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            NodeState& state = states_[k];
            if (!state.active || partition_.block_size(k) == 0) continue;
            std::vector<double> anchor_grad;
            problem_.smooth.grad(state.v, anchor_grad);
            SubproblemView view(A_, partition_.blocks[k], problem_.separable, state.x,
                                std::move(anchor_grad), sigma_prime_, problem_.smooth.tau);
            SolverBudget budget{config_.kappa, config_.permutation_sweeps};
            const std::vector<double>& delta = solve_subproblem(view, budget, node_rngs_[k]);
            view.refresh_residual();  // bit-stable A_[k] dx for the v update
            const std::vector<double>& r = view.residual();
            const double scale = config_.gamma * static_cast<double>(K);
            for (std::size_t row = 0; row < state.v.size(); ++row) {
                state.v[row] += scale * r[row];
            }
            for (std::size_t t = 0; t < delta.size(); ++t) {
                state.x[t] += config_.gamma * delta[t];
            }
            double nnz_block = 0.0;
            for (std::size_t col : partition_.blocks[k]) {
                nnz_block += static_cast<double>(A_.column(col).nnz);
            }
            solve_cost[k] = static_cast<double>(config_.kappa) * nnz_block;
        }
    };
    if (workers == 1) {
        solve_range(0, K);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (K + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t begin = w * chunk;
            std::size_t end = std::min(K, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(solve_range, begin, end);
        }
        for (std::thread& worker : pool) worker.join();
    }

    for (std::size_t k = 0; k < K; ++k) {
        if (states_[k].active) updates_done_ += config_.kappa * partition_.block_size(k);
    }
    simulated_ms_ += kMsPerUpdateNnz * *std::max_element(solve_cost.begin(), solve_cost.end()) +
                     kMsPerCommDouble * comm_doubles;

    ++round_index_;
    log_round_metrics(round_index_, active_count, W_round);
}

void Engine::log_round_metrics(std::size_t round, int active_count, const MixingMatrix& W_round) {
    const std::size_t K = states_.size();
    std::vector<double> x_full = assemble_x();
    std::vector<double> Ax;
    A_.multiply(x_full, Ax);

    // Consensus identity (the central runtime assertion): (1/K) sum v = Ax.
    std::vector<double> v_mean(A_.n_rows(), 0.0);
    for (const NodeState& state : states_) {
        for (std::size_t r = 0; r < v_mean.size(); ++r) v_mean[r] += state.v[r];
    }
    double identity_err = 0.0;
    for (std::size_t r = 0; r < v_mean.size(); ++r) {
        double e = v_mean[r] / static_cast<double>(K) - Ax[r];
        identity_err += e * e;
    }
    identity_err = std::sqrt(identity_err) / (1.0 + vector_norm(Ax));
    worst_identity_error_ = std::max(worst_identity_error_, identity_err);
    if (identity_err > 1e-6) {
        throw std::runtime_error("consensus identity violated: relative error " +
                                 std::to_string(identity_err));
    }

    const double g_value = problem_.g_total(x_full);
    const double FA = problem_.smooth.eval(Ax) + g_value;
    double smooth_mean = 0.0;
    double violation = 0.0;
    for (const NodeState& state : states_) {
        smooth_mean += problem_.smooth.eval(state.v);
        for (std::size_t r = 0; r < Ax.size(); ++r) {
            double e = state.v[r] - Ax[r];
            violation += e * e;
        }
    }
    smooth_mean /= static_cast<double>(K);
    const double HA = smooth_mean + g_value;

    std::vector<std::vector<double>> v_snapshot(K);
    for (std::size_t k = 0; k < K; ++k) v_snapshot[k] = states_[k].v;
    const double gap = decentralized_gap(A_, problem_, x_full, v_snapshot);

    trace_.FA.push_back(FA);
    trace_.HA.push_back(HA);
    trace_.gap.push_back(gap);
    trace_.consensus_violation.push_back(violation);
    trace_.active_nodes.push_back(active_count);
    trace_.elapsed_ms.push_back(simulated_ms_);
    trace_.cumulative_updates.push_back(updates_done_);

    const bool cert_round = config_.cert_every > 0 && round % config_.cert_every == 0;
    if (!cert_round) {
        trace_.cert_all_pass.push_back(-1);
        return;
    }

    CertConstants constants;
    constants.epsilon = config_.cert_epsilon;
    constants.L = problem_.separable.L;
    constants.beta = trace_.beta;
    constants.sum_nk2_sigma = data_constants_.sum_nk2_sigma;
    constants.K = K;

    std::vector<std::vector<double>> gradients(K);
    for (std::size_t k = 0; k < K; ++k) problem_.smooth.grad(states_[k].v, gradients[k]);

    CertRoundLog log;
    log.round = round;
    log.cond_gap_rhs = constants.epsilon / (2.0 * static_cast<double>(K));
    log.cond_deviation_rhs = certificate_threshold(constants);
    log.all_pass = true;
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<std::size_t> neighborhood;
        for (std::size_t j = 0; j < K; ++j) {
            if (W_round.at(j, k) > 0.0) neighborhood.push_back(j);
        }
        CertEval eval = local_certificate(k, A_, problem_, partition_, states_[k].x, states_[k].v,
                                          neighborhood, gradients, constants);
        log.cond_gap_lhs.push_back(eval.local_gap_lhs);
        log.cond_deviation_lhs.push_back(eval.deviation_lhs);
        log.pass_gap.push_back(eval.cond_gap ? 1 : 0);
        log.pass_deviation.push_back(eval.cond_deviation ? 1 : 0);
        log.all_pass = log.all_pass && eval.cond_gap && eval.cond_deviation;
    }
    log.gap_at_v = gap;

    std::vector<NodeState> mixed = states_;
    gossip_step(mixed, W_round);
    std::vector<std::vector<double>> mixed_v(K);
    for (std::size_t k = 0; k < K; ++k) mixed_v[k] = std::move(mixed[k].v);
    log.gap_at_mixed = decentralized_gap(A_, problem_, x_full, mixed_v);

    trace_.cert_all_pass.push_back(log.all_pass ? 1 : 0);
    trace_.cert_rounds.push_back(std::move(log));
}

void Engine::run() {
    // Round 0 row: the all-zero starting state.
    log_round_metrics(0, static_cast<int>(states_.size()), schedule_.matrix(0, 0));
    for (std::size_t t = 0; t < config_.rounds; ++t) cola_round();
}

}  // namespace cola
