#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cola {

enum class GraphKind { ring, cycle2, cycle3, grid2d, complete };

GraphKind graph_kind_from_string(const std::string& name);
std::string graph_kind_to_string(GraphKind kind);

struct Graph {
    std::size_t K = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, no self loops
    std::vector<std::vector<std::size_t>> adjacency;

    std::size_t degree(std::size_t i) const { return adjacency[i].size(); }
    bool connected() const;
};

// ring: i <-> i+-1 (mod K); cycle-c: c nearest neighbors each side; grid2d:
// torus lattice on the most-square factorization of K; complete: all pairs.
Graph build_graph(GraphKind kind, std::size_t K);

// One `i j` pair per line; used for custom topologies.
Graph parse_adjacency_list(std::istream& in, std::size_t K);

struct MixingMatrix {
    std::size_t K = 0;
    std::vector<double> weights;  // dense row-major K x K
    double beta = 0.0;            // second-largest eigenvalue magnitude

    double at(std::size_t i, std::size_t j) const { return weights[i * K + j]; }
    double& at(std::size_t i, std::size_t j) { return weights[i * K + j]; }
};

// Metropolis-Hastings weights W_ij = 1/(1 + max{d_i, d_j}) on edges, diagonal
// absorbing the remainder. Symmetric and doubly stochastic on any undirected
// graph. Throws on disconnected graphs (beta would be 1).
MixingMatrix metropolis_weights(const Graph& graph);

// Eigenvalues of a symmetric K x K matrix by the cyclic Jacobi method.
std::vector<double> symmetric_eigenvalues(std::vector<double> matrix, std::size_t K);

// beta = max{|lambda_2|, |lambda_K|} for a doubly-stochastic symmetric W.
double spectral_beta(const MixingMatrix& W);

// Per-round gossip plan: round t applies B matrices, cycling through the base
// list in order, so a single static graph yields W each round and a list of
// alternating graphs interleaves them.
struct GossipSchedule {
    std::vector<MixingMatrix> base;
    std::size_t B = 1;

    const MixingMatrix& matrix(std::size_t round, std::size_t step) const {
        return base[(round * B + step) % base.size()];
    }
};

GossipSchedule gossip_schedule(std::vector<MixingMatrix> base, std::size_t B);

}  // namespace cola
