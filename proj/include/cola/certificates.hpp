#pragma once

#include <cstddef>
#include <vector>

#include "cola/data.hpp"
#include "cola/matrix.hpp"
#include "cola/problem.hpp"

namespace cola {

struct CertConstants {
    double epsilon = 0.0;
    double L = 0.0;
    double beta = 0.0;           // any valid upper bound works
    double sum_nk2_sigma = 0.0;  // sum_k n_k^2 sigma_k, ditto
    std::size_t K = 0;
};

// Right-hand side of the gradient-deviation condition:
//   (sum_k n_k^2 sigma_k)^{-1/2} * (1 - beta) / (2 L sqrt(K)) * epsilon
double certificate_threshold(const CertConstants& constants);

// Decentralized duality gap with the dual variables fixed to w_k = grad
// f(v_k):
//   (1/K) sum_k [f(v_k) + f*(grad f(v_k))] + g(x)
//   + sum_i g_i*(-(1/K) sum_k A_i^T grad f(v_k))
double decentralized_gap(const SparseColMatrix& A, const ProblemSpec& problem,
                         const std::vector<double>& x_full,
                         const std::vector<std::vector<double>>& v);

struct CertEval {
    double local_gap_lhs = 0.0;  // node share of the gap, compared to eps/(2K)
    double deviation_lhs = 0.0;  // gradient deviation from neighborhood mean
    bool cond_gap = false;
    bool cond_deviation = false;
};

// Node k's two local certificate conditions, evaluated from node-local data
// plus the neighbor gradient snapshot. neighborhood must list the indices
// {j : W_jk > 0} (self included) and gradients[j] the corresponding grad
// f(v_j) vectors.
CertEval local_certificate(std::size_t k, const SparseColMatrix& A, const ProblemSpec& problem,
                           const Partition& partition, const std::vector<double>& x_block,
                           const std::vector<double>& v_k,
                           const std::vector<std::size_t>& neighborhood,
                           const std::vector<std::vector<double>>& gradients,
                           const CertConstants& constants);

}  // namespace cola
