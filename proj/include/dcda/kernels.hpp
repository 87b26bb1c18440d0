#pragma once

// Arithmetic inner loops behind Matrix-level operations.
//
// Every kernel exists as a portable scalar reference and, where the CPU
// supports it, an AVX2 variant picked once at startup. All kernels are
// written in elementwise/axpy form with the same accumulation order in
// every variant and no fused multiply-add, so the variants agree bit for
// bit and a training run is reproducible whichever table is active.

#include <cstddef>

namespace dcda::kernels {

struct KernelTable {
    const char* name;

    // c[m x n] = a[m x k] * b[k x n]; rows of c accumulate over k in order.
    void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
    // c[k x n] = a[m x k]^T * b[m x n]; accumulates over the m rows in order.
    void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
    // x[m x n] += bias[n] broadcast over rows.
    void (*add_bias)(double* x, const double* bias, std::size_t m, std::size_t n);
    // out = max(in, 0) with -0 and NaN mapped to +0.
    void (*relu)(const double* in, double* out, std::size_t n);
    // out = pre > 0 ? grad : 0.
    void (*relu_backward)(const double* pre, const double* grad, double* out, std::size_t n);
    // out = alpha * in.
    void (*scale)(const double* in, double alpha, double* out, std::size_t n);
    // v = momentum * v + g; p = p - lr * v.
    void (*momentum_step)(double* p, double* v, const double* g, double lr, double momentum, std::size_t n);
};

const KernelTable& scalar();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2();

// Table used by the library. Chosen on first use: the best supported variant,
// unless DCDA_KERNELS=scalar (or =avx2) in the environment says otherwise.
const KernelTable& active();

}  // namespace dcda::kernels
