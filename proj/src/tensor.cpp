#include "lcgnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lcgnn {

namespace {

std::string shape(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("DenseMatrix: data length " + std::to_string(data_.size()) +
                                    " does not match shape " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw std::invalid_argument("DenseMatrix::from_rows: ragged rows");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CsrMatrix::CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    if (row_ptr_.size() != n_ + 1) {
        throw std::invalid_argument("CsrMatrix: row_ptr must have n+1 entries");
    }
    if (row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size()) {
        throw std::invalid_argument("CsrMatrix: row_ptr must start at 0 and end at nnz");
    }
    if (values_.size() != col_idx_.size()) {
        throw std::invalid_argument("CsrMatrix: values and col_idx lengths differ");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1]) {
            throw std::invalid_argument("CsrMatrix: row_ptr decreases at row " + std::to_string(i));
        }
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] >= n_) {
                throw std::invalid_argument("CsrMatrix: column index out of range in row " +
                                            std::to_string(i));
            }
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
                throw std::invalid_argument(
                    "CsrMatrix: column indices not strictly increasing (duplicate or unsorted) in row " +
                    std::to_string(i));
            }
            if (!std::isfinite(values_[k])) {
                throw std::invalid_argument("CsrMatrix: non-finite value in row " + std::to_string(i));
            }
        }
    }
}

CsrMatrix CsrMatrix::from_entries(std::size_t n, std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Entry& e = entries[k];
        if (e.row >= n || e.col >= n) {
            throw std::invalid_argument("CsrMatrix::from_entries: entry (" + std::to_string(e.row) +
                                        "," + std::to_string(e.col) + ") outside " +
                                        std::to_string(n) + "x" + std::to_string(n));
        }
        if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
            throw std::invalid_argument("CsrMatrix::from_entries: duplicate entry (" +
                                        std::to_string(e.row) + "," + std::to_string(e.col) + ")");
        }
        ++row_ptr[e.row + 1];
        col_idx.push_back(e.col);
        values.push_back(e.value);
    }
    for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
    return CsrMatrix(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1);
    std::vector<std::size_t> col_idx(n);
    for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
    for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
    return CsrMatrix(n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("CsrMatrix::at: index out of range");
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

DenseMatrix CsrMatrix::to_dense() const {
    DenseMatrix d(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) = values_[k];
    }
    return d;
}

RowSparseMatrix RowSparseMatrix::from_dense(const DenseMatrix& dense) {
    RowSparseMatrix s;
    s.rows = dense.rows();
    s.cols = dense.cols();
    s.row_ptr.assign(s.rows + 1, 0);
    for (std::size_t i = 0; i < s.rows; ++i) {
        const auto row = dense.row(i);
        for (std::size_t j = 0; j < s.cols; ++j) {
            if (row[j] != 0.0) {
                s.col_idx.push_back(j);
                s.values.push_back(row[j]);
            }
        }
        s.row_ptr[i + 1] = s.values.size();
    }
    return s;
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b) {
    if (a.n() != b.rows()) {
        throw std::invalid_argument("spmm: shape mismatch, sparse " + std::to_string(a.n()) + "x" +
                                    std::to_string(a.n()) + " times dense " + shape(b));
    }
    const std::size_t d = b.cols();
    DenseMatrix out(a.n(), d);
    for (std::size_t i = 0; i < a.n(); ++i) {
        auto dst = out.row(i);
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const double w = vals[k];
            const auto src = b.row(cols[k]);
            for (std::size_t c = 0; c < d; ++c) dst[c] += w * src[c];
        }
    }
    return out;
}

DenseMatrix spmm_transposed(const CsrMatrix& a, const DenseMatrix& b) {
    if (a.n() != b.rows()) {
        throw std::invalid_argument("spmm_transposed: shape mismatch, sparse " +
                                    std::to_string(a.n()) + "x" + std::to_string(a.n()) +
                                    " times dense " + shape(b));
    }
    const std::size_t d = b.cols();
    DenseMatrix out(a.n(), d);
    for (std::size_t i = 0; i < a.n(); ++i) {
        const auto src = b.row(i);
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            auto dst = out.row(cols[k]);
            const double w = vals[k];
            for (std::size_t c = 0; c < d; ++c) dst[c] += w * src[c];
        }
    }
    return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: shape mismatch " + shape(a) + " times " + shape(b));
    }
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        const auto lhs = a.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double w = lhs[k];
            if (w == 0.0) continue;
            const auto rhs = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += w * rhs[j];
        }
    }
    return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("matmul_tn: shape mismatch, transpose of " + shape(a) +
                                    " times " + shape(b));
    }
    DenseMatrix out(a.cols(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto lhs = a.row(r);
        const auto rhs = b.row(r);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double w = lhs[i];
            if (w == 0.0) continue;
            auto dst = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += w * rhs[j];
        }
    }
    return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("matmul_nt: shape mismatch " + shape(a) + " times transpose of " +
                                    shape(b));
    }
    DenseMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto lhs = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const auto rhs = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += lhs[k] * rhs[k];
            out(i, j) = acc;
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    }
    return out;
}

DenseMatrix row_normalize(const DenseMatrix& t) {
    DenseMatrix out = t;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        auto row = out.row(i);
        double sum = 0.0;
        for (double v : row) sum += v;
        if (!(sum > 0.0)) {
            throw std::domain_error("row_normalize: non-positive row sum at row " + std::to_string(i));
        }
        for (double& v : row) v /= sum;
    }
    return out;
}

DenseMatrix softmax_rows(const DenseMatrix& x) {
    require_finite(x, "softmax_rows input");
    DenseMatrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto row = out.row(i);
        if (row.empty()) continue;
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double& v : row) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    return out;
}

DenseMatrix relu(const DenseMatrix& x) {
    DenseMatrix out = x;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
}

std::vector<double> row_sums(const DenseMatrix& x) {
    std::vector<double> sums(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (double v : x.row(i)) sums[i] += v;
    }
    return sums;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("max_abs_diff: shape mismatch " + shape(a) + " vs " + shape(b));
    }
    double worst = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t k = 0; k < da.size(); ++k) worst = std::max(worst, std::abs(da[k] - db[k]));
    return worst;
}

void require_finite(const DenseMatrix& x, std::string_view what) {
    const auto d = x.data();
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (!std::isfinite(d[k])) {
            const std::size_t c = x.cols() == 0 ? 1 : x.cols();
            throw std::domain_error(std::string(what) + ": non-finite value at (" +
                                    std::to_string(k / c) + "," + std::to_string(k % c) + ")");
        }
    }
}

void require_row_stochastic(const DenseMatrix& x, double tolerance, std::string_view what) {
    double worst = 0.0;
    std::size_t worst_row = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double sum = 0.0;
        for (double v : x.row(i)) sum += v;
        const double dev = std::isfinite(sum) ? std::abs(sum - 1.0) : std::numeric_limits<double>::infinity();
        if (dev > worst) {
            worst = dev;
            worst_row = i;
        }
    }
    if (worst > tolerance) {
        throw std::domain_error(std::string(what) + ": not row-stochastic, worst row " +
                                std::to_string(worst_row) + " deviates by " + std::to_string(worst));
    }
}

}  // namespace lcgnn
