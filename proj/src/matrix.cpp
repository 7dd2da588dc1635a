#include "fwrnn/matrix.hpp"

#include <cblas.h>

namespace fwrnn {

Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a, bool trans_b) {
    const std::size_t m = trans_a ? a.cols() : a.rows();
    const std::size_t ka = trans_a ? a.rows() : a.cols();
    const std::size_t kb = trans_b ? b.cols() : b.rows();
    const std::size_t n = trans_b ? b.rows() : b.cols();
    if (ka != kb)
        throw std::invalid_argument(
            "matmul: inner dimension mismatch, lhs " + std::to_string(a.rows()) +
            "x" + std::to_string(a.cols()) + (trans_a ? "^T" : "") + " vs rhs " +
            std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
            (trans_b ? "^T" : ""));
    Matrix c(m, n);
    if (m == 0 || n == 0 || ka == 0) return c;
    openblas_set_num_threads(1);
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
                static_cast<int>(n), static_cast<int>(ka), 1.0, a.data(),
                static_cast<int>(a.cols()), b.data(), static_cast<int>(b.cols()),
                0.0, c.data(), static_cast<int>(n));
    return c;
}

double lp_norm(const Vector& v, double p) {
    if (p < 1.0 || std::isnan(p))
        throw std::invalid_argument("lp_norm: p = " + std::to_string(p) +
                                    " is not a norm exponent (need p >= 1)");
    if (v.empty()) return 0.0;
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::fabs(x));
        return m;
    }
    if (p == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::fabs(x);
        return s;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    // General p: scale by the max magnitude to avoid overflow in |x|^p.
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::pow(std::fabs(x) / m, p);
    return m * std::pow(s, 1.0 / p);
}

double dual_exponent(double p) {
    if (p < 1.0 || std::isnan(p))
        throw std::invalid_argument("dual_exponent: need p >= 1");
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

}  // namespace fwrnn
