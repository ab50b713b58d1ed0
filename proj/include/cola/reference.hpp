#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cola/matrix.hpp"
#include "cola/problem.hpp"

namespace cola {

struct ReferenceOptimum {
    double f_star = 0.0;
    std::uint64_t updates_used = 0;
    double residual_gap = 0.0;  // centralized duality gap at termination
    std::vector<double> x;
    bool reached_target = true;
};

// Centralized duality gap F_A(x) + F_B(grad f(Ax)) with
// F_B(w) = f*(w) + sum_i g_i*(-A_i^T w); finite by the bounded-support g*.
double centralized_gap(const SparseColMatrix& A, const ProblemSpec& problem,
                       const std::vector<double>& x);

// Cyclic proximal coordinate descent until the centralized gap falls below
// gap_target or the update budget is exhausted. Exact coordinate minimization
// for the quadratic smooth parts. A missed target is recorded, not fatal.
ReferenceOptimum compute_reference(const SparseColMatrix& A, const ProblemSpec& problem,
                                   std::uint64_t budget, double gap_target);

// FNV-1a content hash of the data and problem parameters; keys the
// reference-optimum cache.
std::uint64_t content_hash(const SparseColMatrix& A, const ProblemSpec& problem);

// compute_reference with a JSON file cache under cache_dir. A cached value is
// reused only if its recorded residual gap already meets gap_target.
ReferenceOptimum cached_reference(const SparseColMatrix& A, const ProblemSpec& problem,
                                  std::uint64_t budget, double gap_target,
                                  const std::string& cache_dir);

}  // namespace cola
