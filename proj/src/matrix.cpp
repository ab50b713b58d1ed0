#include "cola/matrix.hpp"

#include <stdexcept>
#include <string>

namespace cola {

SparseColMatrix::SparseColMatrix(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows), n_cols_(0) {
    col_ptr_.reserve(n_cols + 1);
    (void)n_cols;
}

void SparseColMatrix::push_column(const std::vector<std::pair<std::uint32_t, double>>& entries) {
    // Validate before touching storage so a rejected column leaves the
    // matrix unchanged.
    std::uint32_t prev = 0;
    bool first = true;
    for (const auto& [row, value] : entries) {
        (void)value;
        if (row >= n_rows_) {
            throw std::invalid_argument("sparse column entry row " + std::to_string(row) +
                                        " out of range [0, " + std::to_string(n_rows_) + ")");
        }
        if (!first && row <= prev) {
            throw std::invalid_argument("sparse column row indices must be strictly increasing");
        }
        prev = row;
        first = false;
    }
    for (const auto& [row, value] : entries) {
        row_idx_.push_back(row);
        values_.push_back(value);
    }
    ++n_cols_;
    col_ptr_.push_back(values_.size());
}

ColumnView SparseColMatrix::column(std::size_t i) const {
    if (i >= n_cols_) throw std::out_of_range("column index out of range");
    ColumnView view;
    view.nnz = col_ptr_[i + 1] - col_ptr_[i];
    if (view.nnz > 0) {
        view.rows = &row_idx_[col_ptr_[i]];
        view.values = &values_[col_ptr_[i]];
    }
    return view;
}

double SparseColMatrix::column_norm_sq(std::size_t i) const {
    ColumnView col = column(i);
    double acc = 0.0;
    for (std::size_t t = 0; t < col.nnz; ++t) acc += col.values[t] * col.values[t];
    return acc;
}

void SparseColMatrix::axpy_column(std::size_t i, double coef, std::vector<double>& out) const {
    ColumnView col = column(i);
    for (std::size_t t = 0; t < col.nnz; ++t) out[col.rows[t]] += coef * col.values[t];
}

double SparseColMatrix::dot_column(std::size_t i, const std::vector<double>& w) const {
    ColumnView col = column(i);
    double acc = 0.0;
    for (std::size_t t = 0; t < col.nnz; ++t) acc += col.values[t] * w[col.rows[t]];
    return acc;
}

void SparseColMatrix::multiply(const std::vector<double>& x, std::vector<double>& out) const {
    if (x.size() != n_cols_) throw std::invalid_argument("multiply: x length must equal n_cols");
    out.assign(n_rows_, 0.0);
    for (std::size_t i = 0; i < n_cols_; ++i) {
        if (x[i] != 0.0) axpy_column(i, x[i], out);
    }
}

SparseColMatrix SparseColMatrix::transposed() const {
    SparseColMatrix result(n_cols_, n_rows_);
    result.n_rows_ = n_cols_;
    // Counting pass: entries per output column (= input row).
    std::vector<std::size_t> counts(n_rows_ + 1, 0);
    for (std::uint32_t r : row_idx_) ++counts[r + 1];
    for (std::size_t r = 1; r <= n_rows_; ++r) counts[r] += counts[r - 1];
    result.col_ptr_.assign(counts.begin(), counts.end());
    result.row_idx_.resize(values_.size());
    result.values_.resize(values_.size());
    std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
    for (std::size_t i = 0; i < n_cols_; ++i) {
        for (std::size_t t = col_ptr_[i]; t < col_ptr_[i + 1]; ++t) {
            std::size_t dst = cursor[row_idx_[t]]++;
            result.row_idx_[dst] = static_cast<std::uint32_t>(i);
            result.values_[dst] = values_[t];
        }
    }
    result.n_cols_ = n_rows_;
    return result;
}

bool SparseColMatrix::structurally_equal(const SparseColMatrix& other) const {
    return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ &&
           col_ptr_ == other.col_ptr_ && row_idx_ == other.row_idx_ &&
           values_ == other.values_;
}

}  // namespace cola
