#pragma once

#include <cstddef>
#include <vector>

#include "cola/data.hpp"
#include "cola/matrix.hpp"
#include "cola/topology.hpp"

namespace cola {

// Gradient-tracking baseline for the smooth ridge objective split by samples:
//   F_k(w) = lambda/(2K) ||w||^2 + 1/2 sum_{i in P_k} (A_i^T w - b_i)^2
// with A's columns holding samples in feature space R^m.
struct DigingState {
    std::vector<std::vector<double>> w;          // per-node parameter copy
    std::vector<std::vector<double>> y;          // per-node gradient tracker
    std::vector<std::vector<double>> grad_prev;  // gradient at previous iterate
    double alpha = 0.0;
};

struct DigingProblem {
    const SparseColMatrix* A = nullptr;  // columns are samples
    const std::vector<double>* b = nullptr;
    const Partition* partition = nullptr;
    double lambda = 0.0;

    std::size_t dim() const { return A->n_rows(); }
    void local_grad(std::size_t k, const std::vector<double>& w, std::vector<double>& out) const;
    // Global P(w) = lambda/2 ||w||^2 + 1/2 sum_i (A_i^T w - b_i)^2
    double objective(const std::vector<double>& w) const;
    double objective_at_mean(const DigingState& state) const;
};

// Tracker initialized to the local gradient at w = 0, establishing the
// tracking identity (1/K) sum y = (1/K) sum grad F_k.
DigingState diging_init(const DigingProblem& problem, double alpha);

// w <- W w - alpha y;  y <- W y + grad(w_new) - grad(w_old)
void diging_step(DigingState& state, const MixingMatrix& W, const DigingProblem& problem);

// Largest relative violation of the tracking identity, for invariant tests.
double tracking_identity_error(const DigingState& state, const DigingProblem& problem);

// Objective of the mean iterate after every step (index 0 = initial state).
std::vector<double> diging_run(const DigingProblem& problem, const MixingMatrix& W, double alpha,
                               std::size_t steps);

// Candidate with the lowest mean-iterate objective after `budget` steps;
// candidates whose objective ever exceeds 10x the initial value are
// disqualified. Throws std::runtime_error when every candidate diverges.
double grid_search_alpha(const DigingProblem& problem, const MixingMatrix& W,
                         const std::vector<double>& candidates, std::size_t budget);

}  // namespace cola
