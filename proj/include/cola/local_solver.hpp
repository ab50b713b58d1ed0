#pragma once

#include <cstddef>
#include <vector>

#include "cola/matrix.hpp"
#include "cola/problem.hpp"
#include "cola/rng.hpp"

namespace cola {

// The data-local quadratic subproblem a node solves each round, anchored at
// the post-gossip estimate v':
//   min over dx of  <grad f(v'), A_[k] dx> + (sigma'/(2 tau)) ||A_[k] dx||^2
//                   + sum_{i in P_k} g_i(x_i + dx_i)
// The residual cache r = A_[k] dx makes each coordinate update O(nnz(A_i)).
class SubproblemView {
  public:
    SubproblemView(const SparseColMatrix& matrix, const std::vector<std::size_t>& block,
                   const SeparablePart& separable, std::vector<double> x_block,
                   std::vector<double> grad_anchor, double sigma_prime, double tau);

    std::size_t block_size() const { return block_->size(); }
    const std::vector<double>& delta() const { return delta_; }
    const std::vector<double>& residual() const { return residual_; }
    double sigma_over_tau() const { return sigma_over_tau_; }

    // Exact minimizer of the subproblem restricted to local coordinate t,
    // holding the others fixed. Returns the new (dx)_t and updates the
    // residual incrementally.
    double coordinate_update(std::size_t t);

    // Subproblem objective at an arbitrary candidate dx, without the constant
    // (1/K) f(v') term (which cancels from every comparison).
    double objective(const std::vector<double>& candidate) const;
    double objective_current() const { return objective(delta_); }

    // Recomputes r = A_[k] dx from scratch (drift guard).
    void refresh_residual();
    // Largest relative deviation between the cache and a fresh recompute.
    double residual_drift() const;

  private:
    // Global column id of local coordinate t; g_i terms index globally.
    std::size_t t_to_global(std::size_t t) const;

    const SparseColMatrix* matrix_;
    const std::vector<std::size_t>* block_;
    const SeparablePart* separable_;
    std::vector<double> x_block_;
    std::vector<double> grad_anchor_;
    std::vector<double> delta_;
    std::vector<double> residual_;
    std::vector<double> col_norm_sq_;
    double sigma_over_tau_;
};

struct SolverBudget {
    std::size_t kappa = 1;            // local data passes; updates = kappa * n_k
    bool permutation_sweeps = false;  // default is sampling with replacement
};

// Runs kappa * n_k coordinate updates drawing coordinates from the node's
// stream; never increases the subproblem objective relative to dx = 0.
// Returns the accumulated dx block.
std::vector<double> solve_subproblem(SubproblemView& view, const SolverBudget& budget, Rng& rng);

// Assumption-style relative accuracy of `delta` against an externally solved
// minimizer: (G(delta) - G(delta*)) / (G(0) - G(delta*)), 0 when the
// subproblem was already optimal at 0. Diagnostics only, never on the
// algorithm path.
double measure_theta(const SubproblemView& view, const std::vector<double>& delta,
                     const std::vector<double>& oracle_delta);

}  // namespace cola
