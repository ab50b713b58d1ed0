#include "cola/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cola {

void DigingProblem::local_grad(std::size_t k, const std::vector<double>& w,
                               std::vector<double>& out) const {
    const double K = static_cast<double>(partition->K());
    out.assign(dim(), 0.0);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = (lambda / K) * w[r];
    for (std::size_t i : partition->blocks[k]) {
        const double r_i = A->dot_column(i, w) - (*b)[i];
        if (r_i != 0.0) A->axpy_column(i, r_i, out);
    }
}

double DigingProblem::objective(const std::vector<double>& w) const {
    double acc = 0.0;
    for (double value : w) acc += value * value;
    acc *= 0.5 * lambda;
    for (std::size_t i = 0; i < A->n_cols(); ++i) {
        const double r_i = A->dot_column(i, w) - (*b)[i];
        acc += 0.5 * r_i * r_i;
    }
    return acc;
}

double DigingProblem::objective_at_mean(const DigingState& state) const {
    std::vector<double> mean(dim(), 0.0);
    for (const std::vector<double>& w_k : state.w) {
        for (std::size_t r = 0; r < mean.size(); ++r) mean[r] += w_k[r];
    }
    for (double& value : mean) value /= static_cast<double>(state.w.size());
    return objective(mean);
}

DigingState diging_init(const DigingProblem& problem, double alpha) {
    const std::size_t K = problem.partition->K();
    DigingState state;
    state.alpha = alpha;
    state.w.assign(K, std::vector<double>(problem.dim(), 0.0));
    state.y.resize(K);
    state.grad_prev.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        problem.local_grad(k, state.w[k], state.grad_prev[k]);
        state.y[k] = state.grad_prev[k];
    }
    return state;
}

void diging_step(DigingState& state, const MixingMatrix& W, const DigingProblem& problem) {
    const std::size_t K = state.w.size();
    if (W.K != K) throw std::invalid_argument("diging_step: mixing matrix size mismatch");
    const std::size_t m = problem.dim();

    std::vector<std::vector<double>> w_next(K, std::vector<double>(m, 0.0));
    std::vector<std::vector<double>> y_mixed(K, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < K; ++l) {
            const double weight = W.at(k, l);
            if (weight == 0.0) continue;
            for (std::size_t r = 0; r < m; ++r) {
                w_next[k][r] += weight * state.w[l][r];
                y_mixed[k][r] += weight * state.y[l][r];
            }
        }
        for (std::size_t r = 0; r < m; ++r) w_next[k][r] -= state.alpha * state.y[k][r];
    }

    std::vector<double> grad_new;
    for (std::size_t k = 0; k < K; ++k) {
        problem.local_grad(k, w_next[k], grad_new);
        for (std::size_t r = 0; r < m; ++r) {
            state.y[k][r] = y_mixed[k][r] + grad_new[r] - state.grad_prev[k][r];
        }
        state.grad_prev[k] = grad_new;
        state.w[k] = std::move(w_next[k]);
    }
}

double tracking_identity_error(const DigingState& state, const DigingProblem& problem) {
    const std::size_t K = state.w.size();
    const std::size_t m = problem.dim();
    std::vector<double> y_mean(m, 0.0), g_mean(m, 0.0), grad(m);
    for (std::size_t k = 0; k < K; ++k) {
        problem.local_grad(k, state.w[k], grad);
        for (std::size_t r = 0; r < m; ++r) {
            y_mean[r] += state.y[k][r];
            g_mean[r] += grad[r];
        }
    }
    double err = 0.0, norm = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const double e = (y_mean[r] - g_mean[r]) / static_cast<double>(K);
        err += e * e;
        norm += (g_mean[r] / static_cast<double>(K)) * (g_mean[r] / static_cast<double>(K));
    }
    return std::sqrt(err) / (1.0 + std::sqrt(norm));
}

std::vector<double> diging_run(const DigingProblem& problem, const MixingMatrix& W, double alpha,
                               std::size_t steps) {
    DigingState state = diging_init(problem, alpha);
    std::vector<double> trajectory;
    trajectory.reserve(steps + 1);
    trajectory.push_back(problem.objective_at_mean(state));
    for (std::size_t t = 0; t < steps; ++t) {
        diging_step(state, W, problem);
        trajectory.push_back(problem.objective_at_mean(state));
    }
    return trajectory;
}

double grid_search_alpha(const DigingProblem& problem, const MixingMatrix& W,
                         const std::vector<double>& candidates, std::size_t budget) {
    if (candidates.empty()) throw std::invalid_argument("grid_search_alpha: empty candidate list");
    double best_alpha = 0.0;
    double best_value = std::numeric_limits<double>::infinity();
    for (double alpha : candidates) {
        std::vector<double> trajectory = diging_run(problem, W, alpha, budget);
        const double limit = 10.0 * trajectory.front();
        bool diverged = false;
        for (double value : trajectory) {
            if (!std::isfinite(value) || value > limit) {
                diverged = true;
                break;
            }
        }
        if (diverged) continue;
        if (trajectory.back() < best_value) {
            best_value = trajectory.back();
            best_alpha = alpha;
        }
    }
    if (!std::isfinite(best_value)) {
        throw std::runtime_error("grid_search_alpha: every candidate diverged");
    }
    return best_alpha;
}

}  // namespace cola
