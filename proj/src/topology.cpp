#include "cola/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cola {

namespace {

Graph graph_from_edge_set(std::size_t K, const std::set<std::pair<std::size_t, std::size_t>>& set) {
    Graph g;
    g.K = K;
    g.adjacency.resize(K);
    for (const auto& [i, j] : set) {
        g.edges.emplace_back(i, j);
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
    }
    for (auto& neighbors : g.adjacency) std::sort(neighbors.begin(), neighbors.end());
    return g;
}

void add_edge(std::set<std::pair<std::size_t, std::size_t>>& set, std::size_t a, std::size_t b) {
    if (a == b) return;
    set.emplace(std::min(a, b), std::max(a, b));
}

// Most-square factorization rows*cols = K with rows <= cols.
std::pair<std::size_t, std::size_t> grid_shape(std::size_t K) {
    for (std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(K))); r >= 2; --r) {
        if (K % r == 0) return {r, K / r};
    }
    throw std::invalid_argument("grid2d: K = " + std::to_string(K) +
                                " has no rectangular factorization with both sides >= 2");
}

}  // namespace

GraphKind graph_kind_from_string(const std::string& name) {
    if (name == "ring") return GraphKind::ring;
    if (name == "cycle2") return GraphKind::cycle2;
    if (name == "cycle3") return GraphKind::cycle3;
    if (name == "grid2d") return GraphKind::grid2d;
    if (name == "complete") return GraphKind::complete;
    throw std::invalid_argument("unknown topology kind '" + name + "'");
}

std::string graph_kind_to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::ring: return "ring";
        case GraphKind::cycle2: return "cycle2";
        case GraphKind::cycle3: return "cycle3";
        case GraphKind::grid2d: return "grid2d";
        case GraphKind::complete: return "complete";
    }
    return "?";
}

bool Graph::connected() const {
    if (K == 0) return false;
    std::vector<char> seen(K, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t w : adjacency[u]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == K;
}

Graph build_graph(GraphKind kind, std::size_t K) {
    if (K < 2) throw std::invalid_argument("build_graph: K must be >= 2");
    std::set<std::pair<std::size_t, std::size_t>> set;
    switch (kind) {
        case GraphKind::ring:
            for (std::size_t i = 0; i < K; ++i) add_edge(set, i, (i + 1) % K);
            break;
        case GraphKind::cycle2:
        case GraphKind::cycle3: {
            std::size_t c = kind == GraphKind::cycle2 ? 2 : 3;
            for (std::size_t i = 0; i < K; ++i) {
                for (std::size_t s = 1; s <= c; ++s) add_edge(set, i, (i + s) % K);
            }
            break;
        }
        case GraphKind::grid2d: {
            auto [rows, cols] = grid_shape(K);
            auto id = [cols = cols](std::size_t r, std::size_t c) { return r * cols + c; };
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    add_edge(set, id(r, c), id(r, (c + 1) % cols));
                    add_edge(set, id(r, c), id((r + 1) % rows, c));
                }
            }
            break;
        }
        case GraphKind::complete:
            for (std::size_t i = 0; i < K; ++i) {
                for (std::size_t j = i + 1; j < K; ++j) add_edge(set, i, j);
            }
            break;
    }
    return graph_from_edge_set(K, set);
}

Graph parse_adjacency_list(std::istream& in, std::size_t K) {
    std::set<std::pair<std::size_t, std::size_t>> set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream tokens(line);
        long long a, b;
        if (!(tokens >> a >> b) || a < 0 || b < 0 || static_cast<std::size_t>(a) >= K ||
            static_cast<std::size_t>(b) >= K || a == b) {
            throw std::runtime_error("adjacency list error at line " + std::to_string(line_no));
        }
        add_edge(set, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    }
    return graph_from_edge_set(K, set);
}

MixingMatrix metropolis_weights(const Graph& graph) {
    if (!graph.connected()) {
        throw std::invalid_argument("metropolis_weights: graph is disconnected (beta would be 1)");
    }
    MixingMatrix W;
    W.K = graph.K;
    W.weights.assign(graph.K * graph.K, 0.0);
    for (std::size_t i = 0; i < graph.K; ++i) {
        double off_sum = 0.0;
        for (std::size_t j : graph.adjacency[i]) {
            double w = 1.0 / (1.0 + static_cast<double>(std::max(graph.degree(i), graph.degree(j))));
            W.at(i, j) = w;
            off_sum += w;
        }
        W.at(i, i) = 1.0 - off_sum;
    }
    W.beta = spectral_beta(W);
    return W;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> m, std::size_t K) {
    if (K == 0) return {};
    auto at = [&m, K](std::size_t i, std::size_t j) -> double& { return m[i * K + j]; };

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = i + 1; j < K; ++j) off += at(i, j) * at(i, j);
        }
        double scale = 0.0;
        for (std::size_t i = 0; i < K; ++i) scale += at(i, i) * at(i, i);
        if (off <= 1e-30 * std::max(1.0, scale)) break;

        for (std::size_t p = 0; p < K; ++p) {
            for (std::size_t q = p + 1; q < K; ++q) {
                double apq = at(p, q);
                if (apq == 0.0) continue;
                double app = at(p, p);
                double aqq = at(q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t r = 0; r < K; ++r) {
                    double arp = at(r, p);
                    double arq = at(r, q);
                    at(r, p) = c * arp - s * arq;
                    at(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < K; ++r) {
                    double apr = at(p, r);
                    double aqr = at(q, r);
                    at(p, r) = c * apr - s * aqr;
                    at(q, r) = s * apr + c * aqr;
                }
            }
        }
    }
    std::vector<double> eigenvalues(K);
    for (std::size_t i = 0; i < K; ++i) eigenvalues[i] = at(i, i);
    std::sort(eigenvalues.begin(), eigenvalues.end());
    return eigenvalues;
}

double spectral_beta(const MixingMatrix& W) {
    std::vector<double> eigenvalues = symmetric_eigenvalues(W.weights, W.K);
    std::vector<double> magnitudes(eigenvalues.size());
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) magnitudes[i] = std::abs(eigenvalues[i]);
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<double>());
    return magnitudes.size() > 1 ? magnitudes[1] : 0.0;
}

GossipSchedule gossip_schedule(std::vector<MixingMatrix> base, std::size_t B) {
    if (base.empty()) throw std::invalid_argument("gossip_schedule: need at least one matrix");
    if (B < 1) throw std::invalid_argument("gossip_schedule: B must be >= 1");
    GossipSchedule schedule;
    schedule.base = std::move(base);
    schedule.B = B;
    return schedule;
}

}  // namespace cola
