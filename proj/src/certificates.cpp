#include "cola/certificates.hpp"

#include <cmath>
#include <stdexcept>

namespace cola {

double certificate_threshold(const CertConstants& constants) {
    if (constants.beta >= 1.0) throw std::invalid_argument("certificate_threshold: beta must be < 1");
    if (!(constants.L > 0.0)) throw std::invalid_argument("certificate_threshold: L must be positive");
    return (1.0 / std::sqrt(constants.sum_nk2_sigma)) * (1.0 - constants.beta) /
           (2.0 * constants.L * std::sqrt(static_cast<double>(constants.K))) * constants.epsilon;
}

double decentralized_gap(const SparseColMatrix& A, const ProblemSpec& problem,
                         const std::vector<double>& x_full,
                         const std::vector<std::vector<double>>& v) {
    const std::size_t K = v.size();
    if (K == 0) throw std::invalid_argument("decentralized_gap: need at least one node");

    std::vector<double> grad(A.n_rows());
    std::vector<double> grad_mean(A.n_rows(), 0.0);
    double smooth_pair = 0.0;
    for (const std::vector<double>& v_k : v) {
        problem.smooth.grad(v_k, grad);
        smooth_pair += problem.smooth.eval(v_k) + problem.smooth.conj(grad);
        for (std::size_t r = 0; r < grad.size(); ++r) grad_mean[r] += grad[r];
    }
    smooth_pair /= static_cast<double>(K);
    for (double& value : grad_mean) value /= static_cast<double>(K);

    double conj_sum = 0.0;
    for (std::size_t i = 0; i < A.n_cols(); ++i) {
        conj_sum += problem.separable.conj(i, -A.dot_column(i, grad_mean));
    }
    return smooth_pair + problem.g_total(x_full) + conj_sum;
}

CertEval local_certificate(std::size_t k, const SparseColMatrix& A, const ProblemSpec& problem,
                           const Partition& partition, const std::vector<double>& x_block,
                           const std::vector<double>& v_k,
                           const std::vector<std::size_t>& neighborhood,
                           const std::vector<std::vector<double>>& gradients,
                           const CertConstants& constants) {
    if (neighborhood.empty()) throw std::invalid_argument("local_certificate: empty neighborhood");

    const std::vector<double>& grad_k = gradients[k];
    CertEval eval;

    double pair = 0.0;
    for (std::size_t r = 0; r < v_k.size(); ++r) pair += v_k[r] * grad_k[r];
    const std::vector<std::size_t>& block = partition.blocks[k];
    for (std::size_t t = 0; t < block.size(); ++t) {
        std::size_t i = block[t];
        pair += problem.separable.eval(i, x_block[t]) +
                problem.separable.conj(i, -A.dot_column(i, grad_k));
    }
    eval.local_gap_lhs = pair;
    eval.cond_gap = pair <= constants.epsilon / (2.0 * static_cast<double>(constants.K));

    std::vector<double> mean(v_k.size(), 0.0);
    for (std::size_t j : neighborhood) {
        for (std::size_t r = 0; r < mean.size(); ++r) mean[r] += gradients[j][r];
    }
    double deviation = 0.0;
    const double inv = 1.0 / static_cast<double>(neighborhood.size());
    for (std::size_t r = 0; r < mean.size(); ++r) {
        double e = grad_k[r] - mean[r] * inv;
        deviation += e * e;
    }
    eval.deviation_lhs = std::sqrt(deviation);
    eval.cond_deviation = eval.deviation_lhs <= certificate_threshold(constants);
    return eval;
}

}  // namespace cola
