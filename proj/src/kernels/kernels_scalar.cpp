#include "sighedge/kernels/kernels.hpp"

namespace sighedge::kern::ref {

template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        T* ci = C + static_cast<size_t>(i) * n;
        if (!accumulate)
            for (int j = 0; j < n; ++j) ci[j] = T(0);
        const T* ai = A + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            T aip = ai[p];
            const T* bp = B + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        const T* ai = A + static_cast<size_t>(i) * k;
        T* ci = C + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const T* bj = B + static_cast<size_t>(j) * k;
            T s = T(0);
            for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = accumulate ? ci[j] + s : s;
        }
    }
}

template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int m, int k, int n, bool accumulate) {
    if (!accumulate)
        for (size_t t = 0; t < static_cast<size_t>(m) * n; ++t) C[t] = T(0);
    for (int p = 0; p < k; ++p) {
        const T* ap = A + static_cast<size_t>(p) * m;
        const T* bp = B + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            T api = ap[i];
            T* ci = C + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

template <typename T>
void axpy(T a, const T* x, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
double dot(const T* x, const T* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += static_cast<double>(x[i]) * static_cast<double>(y[i]);
    return s;
}

template void gemm_nn<float>(const float*, const float*, float*, int, int, int, bool);
template void gemm_nn<double>(const double*, const double*, double*, int, int, int, bool);
template void gemm_nt<float>(const float*, const float*, float*, int, int, int, bool);
template void gemm_nt<double>(const double*, const double*, double*, int, int, int, bool);
template void gemm_tn<float>(const float*, const float*, float*, int, int, int, bool);
template void gemm_tn<double>(const double*, const double*, double*, int, int, int, bool);
template void axpy<float>(float, const float*, float*, size_t);
template void axpy<double>(double, const double*, double*, size_t);
template double dot<float>(const float*, const float*, size_t);
template double dot<double>(const double*, const double*, size_t);

}  // namespace sighedge::kern::ref
