#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace lcgnn {

/// Row-major dense float64 matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool same_shape(const DenseMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Square sparse operator in compressed-row layout. Column indices are
/// strictly increasing inside each row; duplicates are rejected.
class CsrMatrix {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    CsrMatrix() = default;
    CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col_idx,
              std::vector<double> values);

    static CsrMatrix from_entries(std::size_t n, std::vector<Entry> entries);
    static CsrMatrix identity(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return col_idx_.size(); }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const std::size_t> row_cols(std::size_t i) const noexcept {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_values(std::size_t i) const noexcept {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /// Value at (i, j), zero when the entry is not stored.
    double at(std::size_t i, std::size_t j) const;
    DenseMatrix to_dense() const;

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// Rectangular compressed-row matrix holding the nonzeros of a dense
/// feature matrix. Used so that feature products and feature dropout
/// only touch stored entries.
struct RowSparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    static RowSparseMatrix from_dense(const DenseMatrix& dense);
    std::size_t nnz() const noexcept { return values.size(); }
};

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b);
/// aᵀ·b without forming the transpose.
DenseMatrix spmm_transposed(const CsrMatrix& a, const DenseMatrix& b);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀ·b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a·bᵀ
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

/// Divides each row by its sum. Throws when a row sum is not strictly positive.
DenseMatrix row_normalize(const DenseMatrix& t);
DenseMatrix softmax_rows(const DenseMatrix& x);
DenseMatrix relu(const DenseMatrix& x);

std::vector<double> row_sums(const DenseMatrix& x);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

void require_finite(const DenseMatrix& x, std::string_view what);
/// Throws std::domain_error naming the worst row when any row sum is off by more than `tolerance`.
void require_row_stochastic(const DenseMatrix& x, double tolerance, std::string_view what);

}  // namespace lcgnn
