#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cola/matrix.hpp"

namespace cola {

struct LibsvmData {
    // Sample-major: n_rows = samples, n_cols = features.
    SparseColMatrix matrix;
    std::vector<double> labels;
};

// Parses `label idx:val idx:val ...` lines with 1-based ascending indices.
// Comment lines (starting with '#') and blank lines are skipped. Throws
// std::runtime_error naming the offending line on malformed input.
LibsvmData parse_libsvm(std::istream& in);

// Inverse of parse_libsvm up to float formatting; used for round-trip tests.
void serialize_libsvm(const LibsvmData& data, std::ostream& out);

enum class ColumnsAre { features, samples };

// Maps a parsed sample-major matrix to the column orientation the algorithm
// partitions over: features for the primal-shaped problem, samples for the
// dual-shaped one.
SparseColMatrix transpose_to_columns(const LibsvmData& data, ColumnsAre orientation);

struct Partition {
    std::vector<std::uint32_t> assignments;        // column id -> node id
    std::vector<std::vector<std::size_t>> blocks;  // node id -> owned column ids
    std::size_t n_cols = 0;

    std::size_t K() const { return blocks.size(); }
    std::size_t block_size(std::size_t k) const { return blocks[k].size(); }
};

// Shuffles [0, n) with the seeded generator, then splits into K contiguous
// blocks. Remainder columns go to the lower node ids, so sizes differ by at
// most one. Throws std::invalid_argument if n < K or K == 0.
Partition partition_columns(std::size_t n, std::size_t K, std::uint64_t seed);

// Largest eigenvalue of A_[k]^T A_[k] by power iteration (10000-iteration cap)
// to relative tolerance tol. All-zero blocks yield 0.
double compute_sigma_k(const SparseColMatrix& matrix, const std::vector<std::size_t>& block,
                       double tol = 1e-9);

struct DataConstants {
    std::vector<double> sigma_k;
    double sigma_max = 0.0;
    double sigma = 0.0;          // sum_k sigma_k * n_k
    double sum_nk2_sigma = 0.0;  // sum_k n_k^2 * sigma_k, the certificate constant
};

DataConstants compute_data_constants(const SparseColMatrix& matrix, const Partition& partition,
                                     double tol = 1e-9);

// Sparse gaussian design with a planted sparse signal:
//   A[r,i] ~ N(0,1) kept with probability `density`,
//   x*     has max(1, n/128) nonzero coordinates drawn as 2*N(0,1),
//   b      = A x* + noise * N(0, I).
// Deterministic for a fixed seed.
void synthesize_regression(std::size_t d, std::size_t n, double density, double noise,
                           std::uint64_t seed, SparseColMatrix& A, std::vector<double>& b);

}  // namespace cola
