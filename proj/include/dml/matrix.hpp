#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dml/errors.hpp"

namespace dml {

// Row-major dense matrix of 64-bit reals. All public operations either
// produce finite entries or throw NumericError.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const DenseMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const DenseMatrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B with ascending-k accumulation per output element.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// A * B^T, the row-by-row dot-product form used for similarities.
DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double squared_l2(std::span<const double> v);
double l2_norm(std::span<const double> v);

// v / ||v||. Rejects ||v|| < 1e-12 (no epsilon is folded into the
// denominator; degenerate inputs are errors, not silently smoothed).
std::vector<double> l2_normalize(std::span<const double> v);

// Pullback of grad_out through v -> v/||v||:
//   (grad_out - vhat * <vhat, grad_out>) / ||v||.
std::vector<double> l2_normalize_backward(std::span<const double> v,
                                          std::span<const double> grad_out);

// Normalizes each row in place semantics-wise (returns a new matrix).
DenseMatrix l2_normalize_rows(const DenseMatrix& m);

// Throws NumericError if any entry is non-finite.
void ensure_finite(std::span<const double> values, const char* context);
void ensure_finite(const DenseMatrix& m, const char* context);

}  // namespace dml
