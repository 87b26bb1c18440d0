#pragma once

#include <cstddef>

namespace dcda::kernels::detail {

void gemm_nn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void gemm_tn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void add_bias_scalar(double* x, const double* bias, std::size_t m, std::size_t n);
void relu_scalar(const double* in, double* out, std::size_t n);
void relu_backward_scalar(const double* pre, const double* grad, double* out, std::size_t n);
void scale_scalar(const double* in, double alpha, double* out, std::size_t n);
void momentum_step_scalar(double* p, double* v, const double* g, double lr, double momentum, std::size_t n);

#if defined(DCDA_HAVE_AVX2)
void gemm_nn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void gemm_tn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
void add_bias_avx2(double* x, const double* bias, std::size_t m, std::size_t n);
void relu_avx2(const double* in, double* out, std::size_t n);
void relu_backward_avx2(const double* pre, const double* grad, double* out, std::size_t n);
void scale_avx2(const double* in, double alpha, double* out, std::size_t n);
void momentum_step_avx2(double* p, double* v, const double* g, double lr, double momentum, std::size_t n);
#endif

}  // namespace dcda::kernels::detail
