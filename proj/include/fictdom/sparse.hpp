#pragma once

// Coordinate-list assembly buffer with a compressed-row finalized form.
// Finalization merges duplicate coordinates by summation in ascending
// (row, col) order, so assembled matrices are bitwise reproducible.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fictdom {

class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols) {
        if (n_rows < 0 || n_cols < 0) {
            throw std::invalid_argument("SparseMatrix: negative dimension");
        }
    }

    int rows() const { return n_rows_; }
    int cols() const { return n_cols_; }
    bool finalized() const { return finalized_; }

    void add(int r, int c, double v) {
        if (finalized_) throw std::logic_error("SparseMatrix::add after finalize");
        if (r < 0 || r >= n_rows_ || c < 0 || c >= n_cols_) {
            throw std::out_of_range("SparseMatrix::add: index out of range");
        }
        coo_.push_back({r, c, v});
    }

    void finalize() {
        if (finalized_) return;
        std::stable_sort(coo_.begin(), coo_.end(), [](const Triplet& a, const Triplet& b) {
            return a.r != b.r ? a.r < b.r : a.c < b.c;
        });
        row_ptr_.assign(static_cast<std::size_t>(n_rows_) + 1, 0);
        for (std::size_t k = 0; k < coo_.size();) {
            std::size_t k2 = k;
            double sum = 0.0;
            while (k2 < coo_.size() && coo_[k2].r == coo_[k].r && coo_[k2].c == coo_[k].c) {
                sum += coo_[k2].v;
                ++k2;
            }
            col_idx_.push_back(coo_[k].c);
            values_.push_back(sum);
            row_ptr_[static_cast<std::size_t>(coo_[k].r) + 1] += 1;
            k = k2;
        }
        for (int r = 0; r < n_rows_; ++r) {
            row_ptr_[static_cast<std::size_t>(r) + 1] += row_ptr_[static_cast<std::size_t>(r)];
        }
        coo_.clear();
        coo_.shrink_to_fit();
        finalized_ = true;
    }

    std::size_t nnz() const {
        require_finalized();
        return values_.size();
    }

    double coeff(int r, int c) const {
        require_finalized();
        for (std::size_t k = row_ptr_[static_cast<std::size_t>(r)];
             k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
            if (col_idx_[k] == c) return values_[k];
        }
        return 0.0;
    }

    // y = A x
    void multiply(std::span<const double> x, std::span<double> y) const {
        require_finalized();
        check_sizes(x.size(), n_cols_, y.size(), n_rows_);
        for (int r = 0; r < n_rows_; ++r) {
            double sum = 0.0;
            for (std::size_t k = row_ptr_[static_cast<std::size_t>(r)];
                 k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
                sum += values_[k] * x[static_cast<std::size_t>(col_idx_[k])];
            }
            y[static_cast<std::size_t>(r)] = sum;
        }
    }

    // y = A^T x
    void multiply_transpose(std::span<const double> x, std::span<double> y) const {
        require_finalized();
        check_sizes(x.size(), n_rows_, y.size(), n_cols_);
        std::fill(y.begin(), y.end(), 0.0);
        for (int r = 0; r < n_rows_; ++r) {
            const double xr = x[static_cast<std::size_t>(r)];
            for (std::size_t k = row_ptr_[static_cast<std::size_t>(r)];
                 k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
                y[static_cast<std::size_t>(col_idx_[k])] += values_[k] * xr;
            }
        }
    }

    template <class Fn>
    void for_each(Fn&& fn) const {  // fn(row, col, value), ascending (row, col)
        require_finalized();
        for (int r = 0; r < n_rows_; ++r) {
            for (std::size_t k = row_ptr_[static_cast<std::size_t>(r)];
                 k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
                fn(r, col_idx_[k], values_[k]);
            }
        }
    }

private:
    struct Triplet {
        int r, c;
        double v;
    };

    void require_finalized() const {
        if (!finalized_) throw std::logic_error("SparseMatrix: not finalized");
    }

    static void check_sizes(std::size_t xs, int nc, std::size_t ys, int nr) {
        if (xs != static_cast<std::size_t>(nc) || ys != static_cast<std::size_t>(nr)) {
            throw std::invalid_argument("SparseMatrix: vector size mismatch");
        }
    }

    int n_rows_ = 0, n_cols_ = 0;
    bool finalized_ = false;
    std::vector<Triplet> coo_;
    std::vector<std::size_t> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

}  // namespace fictdom
