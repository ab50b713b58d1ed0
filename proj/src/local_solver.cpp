#include "cola/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cola {

SubproblemView::SubproblemView(const SparseColMatrix& matrix, const std::vector<std::size_t>& block,
                               const SeparablePart& separable, std::vector<double> x_block,
                               std::vector<double> grad_anchor, double sigma_prime, double tau)
    : matrix_(&matrix),
      block_(&block),
      separable_(&separable),
      x_block_(std::move(x_block)),
      grad_anchor_(std::move(grad_anchor)),
      delta_(block.size(), 0.0),
      residual_(matrix.n_rows(), 0.0),
      sigma_over_tau_(sigma_prime / tau) {
    if (x_block_.size() != block.size()) {
        throw std::invalid_argument("SubproblemView: x block size mismatch");
    }
    if (grad_anchor_.size() != matrix.n_rows()) {
        throw std::invalid_argument("SubproblemView: gradient anchor dimension mismatch");
    }
    col_norm_sq_.reserve(block.size());
    for (std::size_t col : block) col_norm_sq_.push_back(matrix.column_norm_sq(col));
}

double SubproblemView::coordinate_update(std::size_t t) {
    const std::size_t col = (*block_)[t];
    const double a = sigma_over_tau_ * col_norm_sq_[t];
    const double u0 = x_block_[t] + delta_[t];

    double u_star;
    if (a > 0.0) {
        double c = 0.0;
        ColumnView column = matrix_->column(col);
        for (std::size_t s = 0; s < column.nnz; ++s) {
            c += column.values[s] *
                 (grad_anchor_[column.rows[s]] + sigma_over_tau_ * residual_[column.rows[s]]);
        }
        u_star = separable_->prox(t_to_global(t), u0 - c / a, 1.0 / a);
    } else {
        // ||A_i|| = 0: the quadratic part vanishes and c = 0 with it; minimize
        // g_i alone, guarding the (unreachable) c != 0 unbounded direction by
        // returning the clamp boundary.
        if (separable_->kind == SeparableKind::l1_bounded) {
            u_star = 0.0;
        } else {
            u_star = separable_->linear[t_to_global(t)];
        }
    }

    double step = u_star - u0;
    if (step != 0.0) {
        delta_[t] += step;
        matrix_->axpy_column(col, step, residual_);
    }
    return delta_[t];
}

double SubproblemView::objective(const std::vector<double>& candidate) const {
    if (candidate.size() != block_->size()) {
        throw std::invalid_argument("subproblem objective: candidate size mismatch");
    }
    std::vector<double> r(matrix_->n_rows(), 0.0);
    for (std::size_t t = 0; t < candidate.size(); ++t) {
        if (candidate[t] != 0.0) matrix_->axpy_column((*block_)[t], candidate[t], r);
    }
    double linear = 0.0, quad = 0.0;
    for (std::size_t row = 0; row < r.size(); ++row) {
        linear += grad_anchor_[row] * r[row];
        quad += r[row] * r[row];
    }
    double g_sum = 0.0;
    for (std::size_t t = 0; t < candidate.size(); ++t) {
        g_sum += separable_->eval(t_to_global(t), x_block_[t] + candidate[t]);
    }
    return linear + 0.5 * sigma_over_tau_ * quad + g_sum;
}

void SubproblemView::refresh_residual() {
    std::fill(residual_.begin(), residual_.end(), 0.0);
    for (std::size_t t = 0; t < delta_.size(); ++t) {
        if (delta_[t] != 0.0) matrix_->axpy_column((*block_)[t], delta_[t], residual_);
    }
}

double SubproblemView::residual_drift() const {
    std::vector<double> fresh(matrix_->n_rows(), 0.0);
    for (std::size_t t = 0; t < delta_.size(); ++t) {
        if (delta_[t] != 0.0) matrix_->axpy_column((*block_)[t], delta_[t], fresh);
    }
    double norm = 0.0, err = 0.0;
    for (std::size_t row = 0; row < fresh.size(); ++row) {
        norm += fresh[row] * fresh[row];
        double e = fresh[row] - residual_[row];
        err += e * e;
    }
    return std::sqrt(err) / (1.0 + std::sqrt(norm));
}

std::size_t SubproblemView::t_to_global(std::size_t t) const { return (*block_)[t]; }

std::vector<double> solve_subproblem(SubproblemView& view, const SolverBudget& budget, Rng& rng) {
    if (budget.kappa < 1) throw std::invalid_argument("solve_subproblem: kappa must be >= 1");
    const std::size_t nk = view.block_size();
    if (nk == 0) return {};

    if (budget.permutation_sweeps) {
        std::vector<std::size_t> order(nk);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t pass = 0; pass < budget.kappa; ++pass) {
            rng.shuffle(order);
            for (std::size_t t : order) view.coordinate_update(t);
        }
    } else {
        const std::size_t updates = budget.kappa * nk;
        for (std::size_t step = 0; step < updates; ++step) {
            view.coordinate_update(static_cast<std::size_t>(rng.next_below(nk)));
            if ((step + 1) % 1000 == 0) view.refresh_residual();
        }
    }
    return view.delta();
}

double measure_theta(const SubproblemView& view, const std::vector<double>& delta,
                     const std::vector<double>& oracle_delta) {
    const double at_zero = view.objective(std::vector<double>(delta.size(), 0.0));
    const double at_delta = view.objective(delta);
    const double at_star = view.objective(oracle_delta);
    const double denom = at_zero - at_star;
    if (denom <= 0.0) return 0.0;  // already optimal at 0
    return (at_delta - at_star) / denom;
}

}  // namespace cola
