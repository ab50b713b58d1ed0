#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "cola/topology.hpp"

using namespace cola;

TEST_CASE("graph families have the expected degrees and stay connected") {
    struct Case {
        GraphKind kind;
        std::size_t K;
        std::size_t degree;
    };
    for (const Case& c : {Case{GraphKind::ring, 16, 2}, Case{GraphKind::cycle2, 16, 4},
                          Case{GraphKind::cycle3, 16, 6}, Case{GraphKind::grid2d, 16, 4},
                          Case{GraphKind::grid2d, 9, 4}, Case{GraphKind::complete, 16, 15}}) {
        Graph g = build_graph(c.kind, c.K);
        REQUIRE(g.K == c.K);
        CHECK(g.connected());
        for (std::size_t i = 0; i < c.K; ++i) {
            CHECK(g.degree(i) == c.degree);
        }
        // Edge list is canonical: i < j, no duplicates.
        for (const auto& [i, j] : g.edges) {
            CHECK(i < j);
            CHECK(j < c.K);
        }
    }

    // Two nodes: every family degenerates to the single edge.
    Graph pair = build_graph(GraphKind::ring, 2);
    CHECK(pair.edges.size() == 1);
}

TEST_CASE("graph kind names round-trip") {
    for (GraphKind kind : {GraphKind::ring, GraphKind::cycle2, GraphKind::cycle3,
                           GraphKind::grid2d, GraphKind::complete}) {
        CHECK(graph_kind_from_string(graph_kind_to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(graph_kind_from_string("torus"), std::invalid_argument);
}

TEST_CASE("mixing weights are symmetric doubly stochastic with known values") {
    for (GraphKind kind : {GraphKind::ring, GraphKind::cycle2, GraphKind::cycle3,
                           GraphKind::grid2d, GraphKind::complete}) {
        MixingMatrix W = metropolis_weights(build_graph(kind, 16));
        for (std::size_t i = 0; i < 16; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < 16; ++j) {
                CHECK(W.at(i, j) == W.at(j, i));
                CHECK(W.at(i, j) >= 0.0);
                row += W.at(i, j);
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    // Ring of four: every degree is 2, so each edge gets 1/3 and the
    // diagonal keeps 1/3.
    MixingMatrix ring4 = metropolis_weights(build_graph(GraphKind::ring, 4));
    CHECK(ring4.at(0, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(ring4.at(0, 3) == doctest::Approx(1.0 / 3.0));
    CHECK(ring4.at(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(ring4.at(0, 2) == 0.0);

    // Complete graph: uniform averaging, contraction factor zero.
    MixingMatrix complete8 = metropolis_weights(build_graph(GraphKind::complete, 8));
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(complete8.at(i, j) == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
        }
    }
    CHECK(complete8.beta == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("spectral contraction factor matches a dense eigensolver") {
    for (GraphKind kind : {GraphKind::ring, GraphKind::cycle2, GraphKind::cycle3,
                           GraphKind::grid2d, GraphKind::complete}) {
        MixingMatrix W = metropolis_weights(build_graph(kind, 16));
        Eigen::MatrixXd D(16, 16);
        for (std::size_t i = 0; i < 16; ++i) {
            for (std::size_t j = 0; j < 16; ++j) D(long(i), long(j)) = W.at(i, j);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
        std::vector<double> magnitudes;
        for (long i = 0; i < 16; ++i) magnitudes.push_back(std::abs(es.eigenvalues()(i)));
        std::sort(magnitudes.begin(), magnitudes.end());
        CHECK(magnitudes.back() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(W.beta == doctest::Approx(magnitudes[14]).epsilon(1e-10));
        CHECK(W.beta < 1.0);
    }
}

TEST_CASE("jacobi eigenvalues agree with a dense eigensolver") {
    // Random symmetric matrix, fixed entries for reproducibility.
    const std::size_t n = 7;
    std::vector<double> M(n * n, 0.0);
    double seed = 0.1;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            seed = std::fmod(seed * 997.0 + 0.173, 1.0);
            M[i * n + j] = seed - 0.5;
            M[j * n + i] = M[i * n + j];
        }
    }
    std::vector<double> mine = symmetric_eigenvalues(M, n);
    std::sort(mine.begin(), mine.end());

    Eigen::MatrixXd D(static_cast<long>(n), static_cast<long>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) D(long(i), long(j)) = M[i * n + j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    REQUIRE(mine.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(mine[i] == doctest::Approx(es.eigenvalues()(long(i))).epsilon(1e-10));
    }
}

TEST_CASE("disconnected topologies are rejected") {
    std::istringstream in("0 1\n2 3\n");
    Graph g = parse_adjacency_list(in, 4);
    CHECK(!g.connected());
    CHECK_THROWS_AS(metropolis_weights(g), std::invalid_argument);
}

TEST_CASE("adjacency lists parse with validation") {
    std::istringstream in("# comment\n0 1\n1 2\n0 2\n");
    Graph g = parse_adjacency_list(in, 3);
    CHECK(g.K == 3);
    CHECK(g.edges.size() == 3);
    CHECK(g.degree(1) == 2);

    std::istringstream self("0 0\n");
    CHECK_THROWS_AS(parse_adjacency_list(self, 2), std::runtime_error);
    std::istringstream range("0 5\n");
    CHECK_THROWS_AS(parse_adjacency_list(range, 2), std::runtime_error);
}

TEST_CASE("gossip schedules cycle through their base matrices") {
    MixingMatrix a = metropolis_weights(build_graph(GraphKind::ring, 4));
    MixingMatrix b = metropolis_weights(build_graph(GraphKind::complete, 4));
    GossipSchedule schedule = gossip_schedule({a, b}, 2);
    CHECK(schedule.B == 2);
    // Round-major, step-minor cycling.
    CHECK(schedule.matrix(0, 0).at(0, 2) == a.at(0, 2));
    CHECK(schedule.matrix(0, 1).at(0, 2) == b.at(0, 2));
    CHECK(schedule.matrix(1, 0).at(0, 2) == a.at(0, 2));
    CHECK(schedule.matrix(3, 1).at(0, 2) == b.at(0, 2));
}
