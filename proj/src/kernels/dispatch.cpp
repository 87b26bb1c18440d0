#include "dcda/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

#include "kernels_impl.hpp"

namespace dcda::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(DCDA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable& select() {
    const char* forced = std::getenv("DCDA_KERNELS");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return scalar();
    if (const KernelTable* t = avx2()) return *t;
    if (forced != nullptr && std::strcmp(forced, "avx2") == 0) {
        std::cerr << "dcda: DCDA_KERNELS=avx2 requested but unavailable, using scalar kernels\n";
    }
    return scalar();
}

}  // namespace

const KernelTable& scalar() {
    static const KernelTable table{
        "scalar",
        &detail::gemm_nn_scalar,
        &detail::gemm_tn_scalar,
        &detail::add_bias_scalar,
        &detail::relu_scalar,
        &detail::relu_backward_scalar,
        &detail::scale_scalar,
        &detail::momentum_step_scalar,
    };
    return table;
}

const KernelTable* avx2() {
#if defined(DCDA_HAVE_AVX2)
    static const KernelTable table{
        "avx2",
        &detail::gemm_nn_avx2,
        &detail::gemm_tn_avx2,
        &detail::add_bias_avx2,
        &detail::relu_avx2,
        &detail::relu_backward_avx2,
        &detail::scale_avx2,
        &detail::momentum_step_avx2,
    };
    static const bool supported = cpu_has_avx2();
    return supported ? &table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace dcda::kernels
