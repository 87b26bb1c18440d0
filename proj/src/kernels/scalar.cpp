#include "kernels_impl.hpp"

#include <algorithm>

namespace dcda::kernels::detail {

void gemm_nn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    std::fill(c, c + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] = crow[j] + aip * brow[j];
            }
        }
    }
}

void gemm_tn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    std::fill(c, c + k * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            double* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] = crow[j] + aip * brow[j];
            }
        }
    }
}

void add_bias_scalar(double* x, const double* bias, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* row = x + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] = row[j] + bias[j];
    }
}

void relu_scalar(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_scalar(const double* pre, const double* grad, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = pre[i] > 0.0 ? grad[i] : 0.0;
}

void scale_scalar(const double* in, double alpha, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha * in[i];
}

void momentum_step_scalar(double* p, double* v, const double* g, double lr, double momentum, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = momentum * v[i] + g[i];
        p[i] = p[i] - lr * v[i];
    }
}

}  // namespace dcda::kernels::detail
