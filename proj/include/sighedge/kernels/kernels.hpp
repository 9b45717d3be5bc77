#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner kernels. Scalar reference implementations always
// exist; an AVX2/FMA variant is selected at runtime when the CPU supports
// it. Override with SIGHEDGE_SIMD=scalar|avx2 (falls back to scalar when
// the requested ISA is unavailable).
namespace sighedge::kern {

enum class Isa { scalar, avx2 };

Isa active_isa();
std::string isa_name(Isa isa);

// Row-major GEMM, C (m x n).
//   nn: C (+)= A(m x k) * B(k x n)
//   nt: C (+)= A(m x k) * B(n x k)^T
//   tn: C (+)= A(k x m)^T * B(k x n)
template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate);

// y += a * x
template <typename T>
void axpy(T a, const T* x, T* y, size_t n);

// dot product with double accumulation
template <typename T>
double dot(const T* x, const T* y, size_t n);

// Scalar-only reference versions, kept callable regardless of dispatch so
// equivalence tests can compare against the active ISA.
namespace ref {
template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate);
template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate);
template <typename T>
void axpy(T a, const T* x, T* y, size_t n);
template <typename T>
double dot(const T* x, const T* y, size_t n);
}  // namespace ref

}  // namespace sighedge::kern
