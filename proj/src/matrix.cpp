#include "dml/matrix.hpp"

#include <cmath>
#include <string>

namespace dml {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("DenseMatrix: data size " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void ensure_finite(std::span<const double> values, const char* context) {
    for (double x : values) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(context) + ": non-finite value");
        }
    }
}

void ensure_finite(const DenseMatrix& m, const char* context) {
    ensure_finite(std::span<const double>(m.data()), context);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dims " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
    }
    DenseMatrix out(a.rows(), b.cols());
    // k ascending per output element; matches the naive triple loop bitwise.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    ensure_finite(out, "matmul");
    return out;
}

DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_transposed: inner dims " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()));
    }
    DenseMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            out(i, j) = dot(a.row(i), b.row(j));
        }
    }
    ensure_finite(out, "matmul_transposed");
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ShapeError("dot: lengths " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_l2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(squared_l2(v)); }

namespace {
constexpr double kMinNorm = 1e-12;
}

std::vector<double> l2_normalize(std::span<const double> v) {
    const double n = l2_norm(v);
    if (!(n >= kMinNorm)) {
        throw NumericError("l2_normalize: norm " + std::to_string(n) + " below 1e-12");
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    ensure_finite(out, "l2_normalize");
    return out;
}

std::vector<double> l2_normalize_backward(std::span<const double> v,
                                          std::span<const double> grad_out) {
    if (v.size() != grad_out.size()) {
        throw ShapeError("l2_normalize_backward: lengths differ");
    }
    const double n = l2_norm(v);
    if (!(n >= kMinNorm)) {
        throw NumericError("l2_normalize_backward: norm below 1e-12");
    }
    const double radial = dot(v, grad_out) / (n * n);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = (grad_out[i] - v[i] * radial) / n;
    }
    ensure_finite(out, "l2_normalize_backward");
    return out;
}

DenseMatrix l2_normalize_rows(const DenseMatrix& m) {
    DenseMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = l2_normalize(m.row(i));
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = row[j];
    }
    return out;
}

}  // namespace dml
