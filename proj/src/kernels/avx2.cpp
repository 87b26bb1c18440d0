// AVX2 variants. Built with -mavx2 and without -mfma: every lane performs the
// same separate multiply and add as the scalar loop.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>

namespace dcda::kernels::detail {

namespace {

// row[j] += s * src[j] for j < n
inline void axpy_row(double* row, const double* src, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        __m256d c0 = _mm256_loadu_pd(row + j);
        __m256d c1 = _mm256_loadu_pd(row + j + 4);
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(vs, _mm256_loadu_pd(src + j)));
        c1 = _mm256_add_pd(c1, _mm256_mul_pd(vs, _mm256_loadu_pd(src + j + 4)));
        _mm256_storeu_pd(row + j, c0);
        _mm256_storeu_pd(row + j + 4, c1);
    }
    for (; j + 4 <= n; j += 4) {
        __m256d c0 = _mm256_loadu_pd(row + j);
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(vs, _mm256_loadu_pd(src + j)));
        _mm256_storeu_pd(row + j, c0);
    }
    for (; j < n; ++j) row[j] = row[j] + s * src[j];
}

}  // namespace

void gemm_nn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    std::fill(c, c + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) axpy_row(crow, b + p * n, a[i * k + p], n);
    }
}

void gemm_tn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    std::fill(c, c + k * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) axpy_row(c + p * n, brow, a[i * k + p], n);
    }
}

void add_bias_avx2(double* x, const double* bias, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* row = x + i * n;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            _mm256_storeu_pd(row + j, _mm256_add_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(bias + j)));
        }
        for (; j < n; ++j) row[j] = row[j] + bias[j];
    }
}

void relu_avx2(const double* in, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    // max_pd returns its second operand on equality or NaN, matching the scalar ternary.
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(in + i), zero));
    for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_avx2(const double* pre, const double* grad, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(out + i, _mm256_and_pd(mask, _mm256_loadu_pd(grad + i)));
    }
    for (; i < n; ++i) out[i] = pre[i] > 0.0 ? grad[i] : 0.0;
}

void scale_avx2(const double* in, double alpha, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(in + i)));
    for (; i < n; ++i) out[i] = alpha * in[i];
}

void momentum_step_avx2(double* p, double* v, const double* g, double lr, double momentum, std::size_t n) {
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d vmu = _mm256_set1_pd(momentum);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(vmu, _mm256_loadu_pd(v + i)), _mm256_loadu_pd(g + i));
        _mm256_storeu_pd(v + i, vv);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), _mm256_mul_pd(vlr, vv)));
    }
    for (; i < n; ++i) {
        v[i] = momentum * v[i] + g[i];
        p[i] = p[i] - lr * v[i];
    }
}

}  // namespace dcda::kernels::detail
