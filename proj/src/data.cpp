#include "cola/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cola/rng.hpp"

namespace cola {

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("libsvm parse error at line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

LibsvmData parse_libsvm(std::istream& in) {
    struct Row {
        std::vector<std::pair<std::uint32_t, double>> entries;
    };
    std::vector<Row> rows;
    std::vector<double> labels;
    std::uint32_t max_feature = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;

        std::istringstream tokens(line);
        std::string tok;
        if (!(tokens >> tok)) continue;
        double label;
        try {
            std::size_t used = 0;
            label = std::stod(tok, &used);
            if (used != tok.size()) parse_fail(line_no, "bad label token '" + tok + "'");
        } catch (const std::logic_error&) {
            parse_fail(line_no, "bad label token '" + tok + "'");
        }

        Row row;
        std::int64_t prev_idx = 0;
        while (tokens >> tok) {
            std::size_t colon = tok.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
                parse_fail(line_no, "bad idx:val token '" + tok + "'");
            }
            std::int64_t idx;
            double val;
            try {
                std::size_t used = 0;
                idx = std::stoll(tok.substr(0, colon), &used);
                if (used != colon) parse_fail(line_no, "bad index in '" + tok + "'");
                std::string vs = tok.substr(colon + 1);
                val = std::stod(vs, &used);
                if (used != vs.size()) parse_fail(line_no, "bad value in '" + tok + "'");
            } catch (const std::logic_error&) {
                parse_fail(line_no, "bad idx:val token '" + tok + "'");
            }
            if (idx < 1) parse_fail(line_no, "index must be >= 1");
            if (idx <= prev_idx) parse_fail(line_no, "indices must be ascending");
            prev_idx = idx;
            row.entries.emplace_back(static_cast<std::uint32_t>(idx - 1), val);
            max_feature = std::max(max_feature, static_cast<std::uint32_t>(idx));
        }
        rows.push_back(std::move(row));
        labels.push_back(label);
    }

    // Build the sample-major matrix (rows = samples) column-by-column over
    // features via a transpose of the row-wise data.
    SparseColMatrix by_sample(max_feature, rows.size());
    for (const Row& row : rows) by_sample.push_column(row.entries);
    LibsvmData out;
    out.matrix = by_sample.transposed();
    out.labels = std::move(labels);
    return out;
}

void serialize_libsvm(const LibsvmData& data, std::ostream& out) {
    SparseColMatrix by_sample = data.matrix.transposed();
    char buf[64];
    for (std::size_t s = 0; s < by_sample.n_cols(); ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", data.labels[s]);
        out << buf;
        ColumnView col = by_sample.column(s);
        for (std::size_t t = 0; t < col.nnz; ++t) {
            std::snprintf(buf, sizeof buf, "%.17g", col.values[t]);
            out << ' ' << (col.rows[t] + 1) << ':' << buf;
        }
        out << '\n';
    }
}

SparseColMatrix transpose_to_columns(const LibsvmData& data, ColumnsAre orientation) {
    if (orientation == ColumnsAre::features) return data.matrix;
    return data.matrix.transposed();
}

Partition partition_columns(std::size_t n, std::size_t K, std::uint64_t seed) {
    if (K == 0) throw std::invalid_argument("partition_columns: K must be positive");
    if (n < K) throw std::invalid_argument("partition_columns: need n >= K");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_stream_seed(seed, 0xC01AUL));
    rng.shuffle(order);

    Partition part;
    part.n_cols = n;
    part.assignments.assign(n, 0);
    part.blocks.resize(K);
    std::size_t base = n / K;
    std::size_t remainder = n % K;
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < K; ++k) {
        std::size_t size = base + (k < remainder ? 1 : 0);
        for (std::size_t t = 0; t < size; ++t) {
            std::size_t col = order[cursor++];
            part.blocks[k].push_back(col);
            part.assignments[col] = static_cast<std::uint32_t>(k);
        }
    }
    return part;
}

double compute_sigma_k(const SparseColMatrix& matrix, const std::vector<std::size_t>& block,
                       double tol) {
    if (block.empty()) throw std::invalid_argument("compute_sigma_k: empty block");
    const std::size_t nk = block.size();

    bool all_zero = true;
    for (std::size_t i : block) {
        if (matrix.column(i).nnz > 0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) return 0.0;

    // Power iteration on A_[k]^T A_[k], applied through the columns so only a
    // d-length scratch vector is needed.
    std::vector<double> x(nk, 1.0 / std::sqrt(static_cast<double>(nk)));
    std::vector<double> scratch(matrix.n_rows());
    std::vector<double> y(nk);
    double lambda = 0.0;
    constexpr int kMaxIters = 10000;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        std::fill(scratch.begin(), scratch.end(), 0.0);
        for (std::size_t t = 0; t < nk; ++t) {
            if (x[t] != 0.0) matrix.axpy_column(block[t], x[t], scratch);
        }
        for (std::size_t t = 0; t < nk; ++t) y[t] = matrix.dot_column(block[t], scratch);

        double norm = 0.0;
        for (double value : y) norm += value * value;
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            // x landed in the null space; restart from a shifted vector.
            for (std::size_t t = 0; t < nk; ++t) x[t] = 1.0 / static_cast<double>(t + 1);
            lambda = 0.0;
            continue;
        }
        double next = 0.0;  // Rayleigh quotient x^T B x with unit x
        for (std::size_t t = 0; t < nk; ++t) next += x[t] * y[t];
        for (std::size_t t = 0; t < nk; ++t) x[t] = y[t] / norm;
        if (iter > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

DataConstants compute_data_constants(const SparseColMatrix& matrix, const Partition& partition,
                                     double tol) {
    DataConstants out;
    out.sigma_k.reserve(partition.K());
    for (std::size_t k = 0; k < partition.K(); ++k) {
        double sk = compute_sigma_k(matrix, partition.blocks[k], tol);
        double nk = static_cast<double>(partition.block_size(k));
        out.sigma_k.push_back(sk);
        out.sigma_max = std::max(out.sigma_max, sk);
        out.sigma += sk * nk;
        out.sum_nk2_sigma += nk * nk * sk;
    }
    return out;
}

void synthesize_regression(std::size_t d, std::size_t n, double density, double noise,
                           std::uint64_t seed, SparseColMatrix& A, std::vector<double>& b) {
    if (d == 0 || n == 0) throw std::invalid_argument("synthesize_regression: d, n must be positive");
    if (!(density > 0.0) || density > 1.0) {
        throw std::invalid_argument("synthesize_regression: density must be in (0, 1]");
    }
    Rng rng(derive_stream_seed(seed, 0xDA7AUL));

    A = SparseColMatrix(d, n);
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (std::size_t i = 0; i < n; ++i) {
        entries.clear();
        for (std::uint32_t r = 0; r < d; ++r) {
            if (rng.next_double() < density) entries.emplace_back(r, rng.next_gaussian());
        }
        A.push_column(entries);
    }

    std::size_t support = std::max<std::size_t>(1, n / 128);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    b.assign(d, 0.0);
    for (std::size_t t = 0; t < support; ++t) {
        A.axpy_column(order[t], 2.0 * rng.next_gaussian(), b);
    }
    for (std::size_t r = 0; r < d; ++r) b[r] += noise * rng.next_gaussian();
}

}  // namespace cola
