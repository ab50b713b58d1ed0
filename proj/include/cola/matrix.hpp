#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cola {

// Read-only view of one sparse column.
struct ColumnView {
    const std::uint32_t* rows = nullptr;
    const double* values = nullptr;
    std::size_t nnz = 0;
};

// Column-compressed sparse matrix A in R^{d x n}. The algorithm only ever
// touches A column-by-column inside a node's block, so no row access is
// provided.
class SparseColMatrix {
  public:
    SparseColMatrix() { col_ptr_.push_back(0); }
    SparseColMatrix(std::size_t n_rows, std::size_t n_cols);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    std::size_t nnz() const { return values_.size(); }

    // Appends one column; entries must have strictly increasing row indices
    // in [0, n_rows). Throws std::invalid_argument otherwise.
    void push_column(const std::vector<std::pair<std::uint32_t, double>>& entries);

    ColumnView column(std::size_t i) const;

    // Squared euclidean norm of column i.
    double column_norm_sq(std::size_t i) const;

    // out += coef * A_i
    void axpy_column(std::size_t i, double coef, std::vector<double>& out) const;

    // <A_i, w>
    double dot_column(std::size_t i, const std::vector<double>& w) const;

    // out = A x (dense x of length n_cols).
    void multiply(const std::vector<double>& x, std::vector<double>& out) const;

    // Swaps the roles of rows and columns.
    SparseColMatrix transposed() const;

    bool structurally_equal(const SparseColMatrix& other) const;

  private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<std::uint32_t> row_idx_;
    std::vector<double> values_;
};

}  // namespace cola
