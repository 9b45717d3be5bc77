#include <cstdlib>
#include <cstring>

#include "sighedge/kernels/kernels.hpp"

namespace sighedge::kern {

namespace avx2 {
void gemm_nn_f32(const float*, const float*, float*, int, int, int, bool);
void gemm_nn_f64(const double*, const double*, double*, int, int, int, bool);
void gemm_nt_f32(const float*, const float*, float*, int, int, int, bool);
void gemm_nt_f64(const double*, const double*, double*, int, int, int, bool);
void gemm_tn_f32(const float*, const float*, float*, int, int, int, bool);
void gemm_tn_f64(const double*, const double*, double*, int, int, int, bool);
void axpy_f32(float, const float*, float*, size_t);
void axpy_f64(double, const double*, double*, size_t);
double dot_f32(const float*, const float*, size_t);
double dot_f64(const double*, const double*, size_t);
}  // namespace avx2

namespace {

Isa select_isa() {
    bool have_avx2 = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    const char* env = std::getenv("SIGHEDGE_SIMD");
    if (env) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0) return have_avx2 ? Isa::avx2 : Isa::scalar;
    }
    return have_avx2 ? Isa::avx2 : Isa::scalar;
}

const Isa g_isa = select_isa();

}  // namespace

Isa active_isa() { return g_isa; }

std::string isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

template <>
void gemm_nn<float>(const float* A, const float* B, float* C, int m, int k, int n, bool acc) {
    g_isa == Isa::avx2 ? avx2::gemm_nn_f32(A, B, C, m, k, n, acc)
                       : ref::gemm_nn(A, B, C, m, k, n, acc);
}
template <>
void gemm_nn<double>(const double* A, const double* B, double* C, int m, int k, int n, bool acc) {
    g_isa == Isa::avx2 ? avx2::gemm_nn_f64(A, B, C, m, k, n, acc)
                       : ref::gemm_nn(A, B, C, m, k, n, acc);
}
template <>
void gemm_nt<float>(const float* A, const float* B, float* C, int m, int k, int n, bool acc) {
    g_isa == Isa::avx2 ? avx2::gemm_nt_f32(A, B, C, m, k, n, acc)
                       : ref::gemm_nt(A, B, C, m, k, n, acc);
}
template <>
void gemm_nt<double>(const double* A, const double* B, double* C, int m, int k, int n, bool acc) {
    g_isa == Isa::avx2 ? avx2::gemm_nt_f64(A, B, C, m, k, n, acc)
                       : ref::gemm_nt(A, B, C, m, k, n, acc);
}
template <>
void gemm_tn<float>(const float* A, const float* B, float* C, int m, int k, int n, bool acc) {
    g_isa == Isa::avx2 ? avx2::gemm_tn_f32(A, B, C, m, k, n, acc)
                       : ref::gemm_tn(A, B, C, m, k, n, acc);
}
template <>
void gemm_tn<double>(const double* A, const double* B, double* C, int m, int k, int n, bool acc) {
    g_isa == Isa::avx2 ? avx2::gemm_tn_f64(A, B, C, m, k, n, acc)
                       : ref::gemm_tn(A, B, C, m, k, n, acc);
}
template <>
void axpy<float>(float a, const float* x, float* y, size_t n) {
    g_isa == Isa::avx2 ? avx2::axpy_f32(a, x, y, n) : ref::axpy(a, x, y, n);
}
template <>
void axpy<double>(double a, const double* x, double* y, size_t n) {
    g_isa == Isa::avx2 ? avx2::axpy_f64(a, x, y, n) : ref::axpy(a, x, y, n);
}
template <>
double dot<float>(const float* x, const float* y, size_t n) {
    return g_isa == Isa::avx2 ? avx2::dot_f32(x, y, n) : ref::dot(x, y, n);
}
template <>
double dot<double>(const double* x, const double* y, size_t n) {
    return g_isa == Isa::avx2 ? avx2::dot_f64(x, y, n) : ref::dot(x, y, n);
}

}  // namespace sighedge::kern
