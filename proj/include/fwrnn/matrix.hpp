#ifndef FWRNN_MATRIX_HPP_
#define FWRNN_MATRIX_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwrnn {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit floats. The only numeric container in
/// the library together with Vector.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, Vector data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("Matrix: data length " +
                                        std::to_string(data_.size()) +
                                        " != " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    Vector& raw() { return data_; }
    const Vector& raw() const { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_, cols_;
    Vector data_;
};

/// C = A * B (optionally transposing either operand). Backed by BLAS dgemm,
/// single threaded so summation order is fixed.
Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a = false,
              bool trans_b = false);

/// ell-p norm with p in [1, inf]. Pass infinity() for the max norm.
/// Returns 0 for an empty vector.
double lp_norm(const Vector& v, double p);

/// Conjugate exponent q with 1/p + 1/q = 1 (p=1 -> inf, p=inf -> 1).
double dual_exponent(double p);

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: length mismatch " +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double alpha, const Vector& x, Vector& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace fwrnn

#endif  // FWRNN_MATRIX_HPP_
