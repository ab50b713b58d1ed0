#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "cola/engine.hpp"
#include "cola/io.hpp"

using namespace cola;

namespace {

RunConfig small_lasso() {
    RunConfig c;
    c.problem.kind = "lasso";
    c.problem.lambda_rel = 0.5;
    c.data.source = "synthetic";
    c.data.d = 40;
    c.data.n = 64;
    c.data.density = 0.3;
    c.data.noise = 1.0;
    c.data.seed = 3;
    c.topology.kind = "ring";
    c.topology.K = 8;
    c.kappa = 2;
    c.rounds = 40;
    c.cert_every = 10;
    return c;
}

struct Ran {
    RunInputs inputs;
    RunTrace trace;
    std::vector<NodeState> states;
    std::vector<double> x;
    double worst_identity;
    double sigma_prime;
};

Ran run(const RunConfig& c) {
    Ran r{build_run_inputs(c), {}, {}, {}, 0.0, 0.0};
    Engine engine(r.inputs.A, r.inputs.problem, r.inputs.partition, r.inputs.schedule,
                  r.inputs.engine);
    engine.run();
    r.trace = engine.trace();
    r.states = engine.states();
    r.x = engine.assemble_x();
    r.worst_identity = engine.worst_identity_error();
    r.sigma_prime = engine.sigma_prime();
    return r;
}

}  // namespace

TEST_CASE("the consensus identity holds across problem shapes and failures") {
    RunConfig lasso = small_lasso();

    RunConfig ridge = small_lasso();
    ridge.problem.kind = "ridge";
    ridge.problem.lambda = 1.5;
    ridge.problem.lambda_rel = 0.0;
    ridge.topology.kind = "complete";

    RunConfig dropped = small_lasso();
    dropped.dropout_p = 0.6;

    RunConfig doubled = small_lasso();
    doubled.topology.B = 2;
    doubled.threads = 3;

    for (const RunConfig& c : {lasso, ridge, dropped, doubled}) {
        Ran r = run(c);
        CHECK(r.worst_identity <= 1e-9);

        // Re-derive the identity from the final state directly.
        std::vector<double> mean(r.inputs.A.n_rows(), 0.0);
        for (const NodeState& node : r.states) {
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += node.v[i];
        }
        std::vector<double> ax(r.inputs.A.n_rows(), 0.0);
        r.inputs.A.multiply(r.x, ax);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double diff = mean[i] / double(r.states.size()) - ax[i];
            err += diff * diff;
            scale += ax[i] * ax[i];
        }
        CHECK(std::sqrt(err) <= 1e-9 * (1.0 + std::sqrt(scale)));
    }
}

TEST_CASE("the global objective never increases without failures") {
    for (const char* kind : {"lasso", "ridge"}) {
        RunConfig c = small_lasso();
        c.problem.kind = kind;
        if (std::string(kind) == "ridge") {
            c.problem.lambda = 2.0;
            c.problem.lambda_rel = 0.0;
        }
        Ran r = run(c);
        REQUIRE(r.trace.HA.size() == 41);  // round 0 plus 40 rounds
        for (std::size_t t = 1; t < r.trace.HA.size(); ++t) {
            CHECK(r.trace.HA[t] <= r.trace.HA[t - 1] + 1e-9 * (1.0 + std::abs(r.trace.HA[t - 1])));
        }
        // Lasso: H_A and F_A coincide; ridge adds the quadratic g terms.
        CHECK(r.trace.FA.back() < r.trace.FA.front());
    }
}

TEST_CASE("one gossip step averages a hand-built three-node network") {
    MixingMatrix W = metropolis_weights(build_graph(GraphKind::ring, 3));
    std::vector<NodeState> states(3);
    states[0].v = {1.0, 0.0};
    states[1].v = {0.0, 1.0};
    states[2].v = {0.0, 0.0};
    gossip_step(states, W);
    for (const NodeState& s : states) {
        CHECK(s.v[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(s.v[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("dropout rescales mixing weights and isolates inactive nodes") {
    MixingMatrix W = metropolis_weights(build_graph(GraphKind::cycle2, 8));
    std::vector<NodeState> states(8);
    for (std::size_t k = 0; k < 8; ++k) states[k].id = k;

    Rng rng(derive_stream_seed(4, 0));
    std::vector<NodeState> copy = states;
    MixingMatrix effective = apply_dropout(copy, W, 0.5, rng);

    int inactive = 0;
    for (std::size_t k = 0; k < 8; ++k) {
        if (!copy[k].active) ++inactive;
    }
    CHECK(inactive > 0);  // p = 0.5 over 8 nodes: all-active has probability 1/256

    for (std::size_t i = 0; i < 8; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(effective.at(i, j) == effective.at(j, i));
            row += effective.at(i, j);
            if (i != j && (!copy[i].active || !copy[j].active)) {
                CHECK(effective.at(i, j) == 0.0);
            }
            if (i != j && copy[i].active && copy[j].active) {
                CHECK(effective.at(i, j) == W.at(i, j));
            }
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
        if (!copy[i].active) CHECK(effective.at(i, i) == 1.0);
    }

    // Same seed, same flags.
    Rng replay(derive_stream_seed(4, 0));
    std::vector<NodeState> again = states;
    apply_dropout(again, W, 0.5, replay);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(again[k].active == copy[k].active);
    }

    // p = 1 never deactivates and keeps W intact.
    Rng full(1);
    std::vector<NodeState> all = states;
    MixingMatrix same = apply_dropout(all, W, 1.0, full);
    for (std::size_t k = 0; k < 8; ++k) CHECK(all[k].active);
    CHECK(same.weights == W.weights);
}

TEST_CASE("a joining node inherits the network average and the identity") {
    SparseColMatrix A;
    std::vector<double> b;
    synthesize_regression(10, 12, 0.6, 0.5, 8, A, b);

    Partition p;
    p.blocks = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}};
    p.assignments = {0, 0, 0, 1, 1, 1, 2, 2, 2};
    p.n_cols = 12;

    // States with x blocks and exact per-node consensus v = A x.
    std::vector<double> x(12, 0.0);
    Rng rng(6);
    for (std::size_t col = 0; col < 9; ++col) x[col] = rng.next_gaussian();
    std::vector<double> ax(10, 0.0);
    A.multiply(x, ax);

    std::vector<NodeState> states(3);
    for (std::size_t k = 0; k < 3; ++k) {
        states[k].id = k;
        for (std::size_t col : p.blocks[k]) states[k].x.push_back(x[col]);
        states[k].v = ax;
        // Zero-mean perturbation keeps the average intact but the copies distinct.
        const double sign = (k == 0) ? 2.0 : -1.0;
        for (std::size_t r = 0; r < 10; ++r) states[k].v[r] += sign * 0.01 * double(r);
    }

    join_node(states, p, A, {9, 10, 11});
    REQUIRE(states.size() == 4);
    CHECK(states[3].x == std::vector<double>(3, 0.0));
    CHECK(p.blocks.size() == 4);
    CHECK(p.assignments[10] == 3);

    std::vector<double> mean(10, 0.0);
    for (const NodeState& s : states) {
        for (std::size_t r = 0; r < 10; ++r) mean[r] += s.v[r];
    }
    for (std::size_t r = 0; r < 10; ++r) {
        CHECK(mean[r] / 4.0 == doctest::Approx(ax[r]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(join_node(states, p, A, {5}), std::invalid_argument);
    CHECK_THROWS_AS(join_node(states, p, A, {12}), std::invalid_argument);
}

TEST_CASE("trace bookkeeping matches the run shape") {
    RunConfig c = small_lasso();
    c.dropout_p = 0.7;
    Ran r = run(c);

    REQUIRE(r.trace.FA.size() == 41);
    REQUIRE(r.trace.cert_all_pass.size() == 41);
    REQUIRE(r.trace.elapsed_ms.size() == 41);

    for (std::size_t t = 1; t < 41; ++t) {
        CHECK(r.trace.elapsed_ms[t] >= r.trace.elapsed_ms[t - 1]);
        CHECK(r.trace.cumulative_updates[t] >= r.trace.cumulative_updates[t - 1]);
        CHECK(r.trace.active_nodes[t] >= 0);
        CHECK(r.trace.active_nodes[t] <= 8);
    }

    std::vector<char> is_cert_round(41, 0);
    for (const CertRoundLog& log : r.trace.cert_rounds) {
        REQUIRE(log.round < 41);
        is_cert_round[log.round] = 1;
        CHECK(log.round % 10 == 0);
        REQUIRE(log.cond_gap_lhs.size() == 8);
        REQUIRE(log.pass_deviation.size() == 8);
        bool expect_all = true;
        for (std::size_t k = 0; k < 8; ++k) {
            if (!log.pass_gap[k] || !log.pass_deviation[k]) expect_all = false;
        }
        CHECK(log.all_pass == expect_all);
        CHECK(r.trace.cert_all_pass[log.round] == (log.all_pass ? 1 : 0));
    }
    for (std::size_t t = 0; t < 41; ++t) {
        if (!is_cert_round[t]) CHECK(r.trace.cert_all_pass[t] == -1);
    }
}

TEST_CASE("updates accumulate as budgeted data passes when nobody fails") {
    RunConfig c = small_lasso();
    c.cert_every = 0;
    Ran r = run(c);
    // kappa * n updates per full round over all nodes.
    for (std::size_t t = 0; t < 41; ++t) {
        CHECK(r.trace.cumulative_updates[t] == std::uint64_t(t) * 2 * 64);
    }
}

TEST_CASE("subproblem scaling honors its configuration modes") {
    RunConfig c = small_lasso();
    c.sigma_prime = "gamma_k";
    CHECK(run(c).sigma_prime == doctest::Approx(8.0));  // gamma = 1, K = 8

    c.sigma_prime = "2.5";
    CHECK(run(c).sigma_prime == doctest::Approx(2.5));

    c.sigma_prime = "refined";
    const double refined = run(c).sigma_prime;
    CHECK(refined >= 1.0);
    CHECK(refined <= 8.0);

    c.gamma = 0.5;
    c.sigma_prime = "gamma_k";
    CHECK(run(c).sigma_prime == doctest::Approx(4.0));
}

TEST_CASE("assembled iterates agree with the per-node blocks") {
    Ran r = run(small_lasso());
    for (std::size_t k = 0; k < r.states.size(); ++k) {
        const auto& block = r.inputs.partition.blocks[k];
        for (std::size_t t = 0; t < block.size(); ++t) {
            CHECK(r.x[block[t]] == r.states[k].x[t]);
        }
    }
}
