// AVX2/FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it is reached solely through the runtime dispatch table.
#include <immintrin.h>

#include <vector>

#include "sighedge/kernels/kernels.hpp"

namespace sighedge::kern::avx2 {

// ---------------------------------------------------------------- float ---

namespace {

// 4x16 register-tile micro-kernel over the full k range.
inline void tile_nn_f32(const float* A, const float* B, float* C, int k, int n, int i, int j,
                        bool accumulate) {
    __m256 c00, c01, c10, c11, c20, c21, c30, c31;
    if (accumulate) {
        c00 = _mm256_loadu_ps(C + (size_t)(i + 0) * n + j);
        c01 = _mm256_loadu_ps(C + (size_t)(i + 0) * n + j + 8);
        c10 = _mm256_loadu_ps(C + (size_t)(i + 1) * n + j);
        c11 = _mm256_loadu_ps(C + (size_t)(i + 1) * n + j + 8);
        c20 = _mm256_loadu_ps(C + (size_t)(i + 2) * n + j);
        c21 = _mm256_loadu_ps(C + (size_t)(i + 2) * n + j + 8);
        c30 = _mm256_loadu_ps(C + (size_t)(i + 3) * n + j);
        c31 = _mm256_loadu_ps(C + (size_t)(i + 3) * n + j + 8);
    } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_ps();
    }
    for (int p = 0; p < k; ++p) {
        __m256 b0 = _mm256_loadu_ps(B + (size_t)p * n + j);
        __m256 b1 = _mm256_loadu_ps(B + (size_t)p * n + j + 8);
        __m256 a0 = _mm256_set1_ps(A[(size_t)(i + 0) * k + p]);
        __m256 a1 = _mm256_set1_ps(A[(size_t)(i + 1) * k + p]);
        __m256 a2 = _mm256_set1_ps(A[(size_t)(i + 2) * k + p]);
        __m256 a3 = _mm256_set1_ps(A[(size_t)(i + 3) * k + p]);
        c00 = _mm256_fmadd_ps(a0, b0, c00);
        c01 = _mm256_fmadd_ps(a0, b1, c01);
        c10 = _mm256_fmadd_ps(a1, b0, c10);
        c11 = _mm256_fmadd_ps(a1, b1, c11);
        c20 = _mm256_fmadd_ps(a2, b0, c20);
        c21 = _mm256_fmadd_ps(a2, b1, c21);
        c30 = _mm256_fmadd_ps(a3, b0, c30);
        c31 = _mm256_fmadd_ps(a3, b1, c31);
    }
    _mm256_storeu_ps(C + (size_t)(i + 0) * n + j, c00);
    _mm256_storeu_ps(C + (size_t)(i + 0) * n + j + 8, c01);
    _mm256_storeu_ps(C + (size_t)(i + 1) * n + j, c10);
    _mm256_storeu_ps(C + (size_t)(i + 1) * n + j + 8, c11);
    _mm256_storeu_ps(C + (size_t)(i + 2) * n + j, c20);
    _mm256_storeu_ps(C + (size_t)(i + 2) * n + j + 8, c21);
    _mm256_storeu_ps(C + (size_t)(i + 3) * n + j, c30);
    _mm256_storeu_ps(C + (size_t)(i + 3) * n + j + 8, c31);
}

// 4x8 variant used for the column remainder when n % 16 >= 8; without it the
// narrow matrices common in per-head attention (n = d_model/heads) fall
// through to the scalar edge loop.
inline void tile_nn8_f32(const float* A, const float* B, float* C, int k, int n, int i, int j,
                         bool accumulate) {
    __m256 c0, c1, c2, c3;
    if (accumulate) {
        c0 = _mm256_loadu_ps(C + (size_t)(i + 0) * n + j);
        c1 = _mm256_loadu_ps(C + (size_t)(i + 1) * n + j);
        c2 = _mm256_loadu_ps(C + (size_t)(i + 2) * n + j);
        c3 = _mm256_loadu_ps(C + (size_t)(i + 3) * n + j);
    } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_ps();
    }
    for (int p = 0; p < k; ++p) {
        __m256 b0 = _mm256_loadu_ps(B + (size_t)p * n + j);
        c0 = _mm256_fmadd_ps(_mm256_set1_ps(A[(size_t)(i + 0) * k + p]), b0, c0);
        c1 = _mm256_fmadd_ps(_mm256_set1_ps(A[(size_t)(i + 1) * k + p]), b0, c1);
        c2 = _mm256_fmadd_ps(_mm256_set1_ps(A[(size_t)(i + 2) * k + p]), b0, c2);
        c3 = _mm256_fmadd_ps(_mm256_set1_ps(A[(size_t)(i + 3) * k + p]), b0, c3);
    }
    _mm256_storeu_ps(C + (size_t)(i + 0) * n + j, c0);
    _mm256_storeu_ps(C + (size_t)(i + 1) * n + j, c1);
    _mm256_storeu_ps(C + (size_t)(i + 2) * n + j, c2);
    _mm256_storeu_ps(C + (size_t)(i + 3) * n + j, c3);
}

inline float hsum_f32(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    return _mm_cvtss_f32(lo);
}

inline double hsum_f64(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

inline void tile_nn_f64(const double* A, const double* B, double* C, int k, int n, int i, int j,
                        bool accumulate) {
    __m256d c00, c01, c10, c11, c20, c21, c30, c31;
    if (accumulate) {
        c00 = _mm256_loadu_pd(C + (size_t)(i + 0) * n + j);
        c01 = _mm256_loadu_pd(C + (size_t)(i + 0) * n + j + 4);
        c10 = _mm256_loadu_pd(C + (size_t)(i + 1) * n + j);
        c11 = _mm256_loadu_pd(C + (size_t)(i + 1) * n + j + 4);
        c20 = _mm256_loadu_pd(C + (size_t)(i + 2) * n + j);
        c21 = _mm256_loadu_pd(C + (size_t)(i + 2) * n + j + 4);
        c30 = _mm256_loadu_pd(C + (size_t)(i + 3) * n + j);
        c31 = _mm256_loadu_pd(C + (size_t)(i + 3) * n + j + 4);
    } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
    }
    for (int p = 0; p < k; ++p) {
        __m256d b0 = _mm256_loadu_pd(B + (size_t)p * n + j);
        __m256d b1 = _mm256_loadu_pd(B + (size_t)p * n + j + 4);
        __m256d a0 = _mm256_set1_pd(A[(size_t)(i + 0) * k + p]);
        __m256d a1 = _mm256_set1_pd(A[(size_t)(i + 1) * k + p]);
        __m256d a2 = _mm256_set1_pd(A[(size_t)(i + 2) * k + p]);
        __m256d a3 = _mm256_set1_pd(A[(size_t)(i + 3) * k + p]);
        c00 = _mm256_fmadd_pd(a0, b0, c00);
        c01 = _mm256_fmadd_pd(a0, b1, c01);
        c10 = _mm256_fmadd_pd(a1, b0, c10);
        c11 = _mm256_fmadd_pd(a1, b1, c11);
        c20 = _mm256_fmadd_pd(a2, b0, c20);
        c21 = _mm256_fmadd_pd(a2, b1, c21);
        c30 = _mm256_fmadd_pd(a3, b0, c30);
        c31 = _mm256_fmadd_pd(a3, b1, c31);
    }
    _mm256_storeu_pd(C + (size_t)(i + 0) * n + j, c00);
    _mm256_storeu_pd(C + (size_t)(i + 0) * n + j + 4, c01);
    _mm256_storeu_pd(C + (size_t)(i + 1) * n + j, c10);
    _mm256_storeu_pd(C + (size_t)(i + 1) * n + j + 4, c11);
    _mm256_storeu_pd(C + (size_t)(i + 2) * n + j, c20);
    _mm256_storeu_pd(C + (size_t)(i + 2) * n + j + 4, c21);
    _mm256_storeu_pd(C + (size_t)(i + 3) * n + j, c30);
    _mm256_storeu_pd(C + (size_t)(i + 3) * n + j + 4, c31);
}

}  // namespace

void gemm_nn_f32(const float* A, const float* B, float* C, int m, int k, int n, bool accumulate) {
    int m4 = m - m % 4;
    int n16 = n - n % 16;
    int n8 = n - n % 8;
    for (int i = 0; i < m4; i += 4) {
        for (int j = 0; j < n16; j += 16) tile_nn_f32(A, B, C, k, n, i, j, accumulate);
        if (n8 > n16) tile_nn8_f32(A, B, C, k, n, i, n16, accumulate);
    }
    // edges
    if (n8 < n)
        for (int i = 0; i < m4; ++i) {
            float* ci = C + (size_t)i * n;
            if (!accumulate)
                for (int j = n8; j < n; ++j) ci[j] = 0.f;
            const float* ai = A + (size_t)i * k;
            for (int p = 0; p < k; ++p) {
                float aip = ai[p];
                const float* bp = B + (size_t)p * n;
                for (int j = n8; j < n; ++j) ci[j] += aip * bp[j];
            }
        }
    if (m4 < m) ref::gemm_nn(A + (size_t)m4 * k, B, C + (size_t)m4 * n, m - m4, k, n, accumulate);
}

void gemm_nn_f64(const double* A, const double* B, double* C, int m, int k, int n,
                 bool accumulate) {
    int m4 = m - m % 4;
    int n8 = n - n % 8;
    for (int i = 0; i < m4; i += 4)
        for (int j = 0; j < n8; j += 8) tile_nn_f64(A, B, C, k, n, i, j, accumulate);
    if (n8 < n)
        for (int i = 0; i < m4; ++i) {
            double* ci = C + (size_t)i * n;
            if (!accumulate)
                for (int j = n8; j < n; ++j) ci[j] = 0.0;
            const double* ai = A + (size_t)i * k;
            for (int p = 0; p < k; ++p) {
                double aip = ai[p];
                const double* bp = B + (size_t)p * n;
                for (int j = n8; j < n; ++j) ci[j] += aip * bp[j];
            }
        }
    if (m4 < m) ref::gemm_nn(A + (size_t)m4 * k, B, C + (size_t)m4 * n, m - m4, k, n, accumulate);
}

void gemm_nt_f32(const float* A, const float* B, float* C, int m, int k, int n, bool accumulate) {
    // When the transposed copy of B is small enough to stay cache-resident the
    // broadcast/FMA tile path is far faster than row-wise dot products.
    if ((size_t)n * k <= (size_t)(1 << 20)) {
        thread_local std::vector<float> bt;
        bt.resize((size_t)k * n);
        for (int j = 0; j < n; ++j)
            for (int p = 0; p < k; ++p) bt[(size_t)p * n + j] = B[(size_t)j * k + p];
        gemm_nn_f32(A, bt.data(), C, m, k, n, accumulate);
        return;
    }
    int k8 = k - k % 8;
    for (int i = 0; i < m; ++i) {
        const float* ai = A + (size_t)i * k;
        float* ci = C + (size_t)i * n;
        for (int j = 0; j < n; ++j) {
            const float* bj = B + (size_t)j * k;
            __m256 acc = _mm256_setzero_ps();
            for (int p = 0; p < k8; p += 8)
                acc = _mm256_fmadd_ps(_mm256_loadu_ps(ai + p), _mm256_loadu_ps(bj + p), acc);
            float s = hsum_f32(acc);
            for (int p = k8; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = accumulate ? ci[j] + s : s;
        }
    }
}

void gemm_nt_f64(const double* A, const double* B, double* C, int m, int k, int n,
                 bool accumulate) {
    if ((size_t)n * k <= (size_t)(1 << 19)) {
        thread_local std::vector<double> bt;
        bt.resize((size_t)k * n);
        for (int j = 0; j < n; ++j)
            for (int p = 0; p < k; ++p) bt[(size_t)p * n + j] = B[(size_t)j * k + p];
        gemm_nn_f64(A, bt.data(), C, m, k, n, accumulate);
        return;
    }
    int k4 = k - k % 4;
    for (int i = 0; i < m; ++i) {
        const double* ai = A + (size_t)i * k;
        double* ci = C + (size_t)i * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = B + (size_t)j * k;
            __m256d acc = _mm256_setzero_pd();
            for (int p = 0; p < k4; p += 4)
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(ai + p), _mm256_loadu_pd(bj + p), acc);
            double s = hsum_f64(acc);
            for (int p = k4; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = accumulate ? ci[j] + s : s;
        }
    }
}

// 4x8 column-remainder tile of C = A^T B over the row chunk [p0, p1).
static inline void tile_tn8_f32(const float* A, const float* B, float* C, int m, int n, int i,
                                int j, int p0, int p1, bool accumulate) {
    __m256 c0, c1, c2, c3;
    if (accumulate) {
        c0 = _mm256_loadu_ps(C + (size_t)(i + 0) * n + j);
        c1 = _mm256_loadu_ps(C + (size_t)(i + 1) * n + j);
        c2 = _mm256_loadu_ps(C + (size_t)(i + 2) * n + j);
        c3 = _mm256_loadu_ps(C + (size_t)(i + 3) * n + j);
    } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_ps();
    }
    for (int p = p0; p < p1; ++p) {
        const float* ap = A + (size_t)p * m + i;
        __m256 b0 = _mm256_loadu_ps(B + (size_t)p * n + j);
        c0 = _mm256_fmadd_ps(_mm256_set1_ps(ap[0]), b0, c0);
        c1 = _mm256_fmadd_ps(_mm256_set1_ps(ap[1]), b0, c1);
        c2 = _mm256_fmadd_ps(_mm256_set1_ps(ap[2]), b0, c2);
        c3 = _mm256_fmadd_ps(_mm256_set1_ps(ap[3]), b0, c3);
    }
    _mm256_storeu_ps(C + (size_t)(i + 0) * n + j, c0);
    _mm256_storeu_ps(C + (size_t)(i + 1) * n + j, c1);
    _mm256_storeu_ps(C + (size_t)(i + 2) * n + j, c2);
    _mm256_storeu_ps(C + (size_t)(i + 3) * n + j, c3);
}

// 4x16 tile of C = A^T B accumulated over the row chunk [p0, p1); A is k x m.
static inline void tile_tn_f32(const float* A, const float* B, float* C, int m, int n, int i,
                               int j, int p0, int p1, bool accumulate) {
    __m256 c00, c01, c10, c11, c20, c21, c30, c31;
    if (accumulate) {
        c00 = _mm256_loadu_ps(C + (size_t)(i + 0) * n + j);
        c01 = _mm256_loadu_ps(C + (size_t)(i + 0) * n + j + 8);
        c10 = _mm256_loadu_ps(C + (size_t)(i + 1) * n + j);
        c11 = _mm256_loadu_ps(C + (size_t)(i + 1) * n + j + 8);
        c20 = _mm256_loadu_ps(C + (size_t)(i + 2) * n + j);
        c21 = _mm256_loadu_ps(C + (size_t)(i + 2) * n + j + 8);
        c30 = _mm256_loadu_ps(C + (size_t)(i + 3) * n + j);
        c31 = _mm256_loadu_ps(C + (size_t)(i + 3) * n + j + 8);
    } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_ps();
    }
    for (int p = p0; p < p1; ++p) {
        const float* ap = A + (size_t)p * m + i;
        __m256 b0 = _mm256_loadu_ps(B + (size_t)p * n + j);
        __m256 b1 = _mm256_loadu_ps(B + (size_t)p * n + j + 8);
        __m256 a0 = _mm256_set1_ps(ap[0]);
        __m256 a1 = _mm256_set1_ps(ap[1]);
        __m256 a2 = _mm256_set1_ps(ap[2]);
        __m256 a3 = _mm256_set1_ps(ap[3]);
        c00 = _mm256_fmadd_ps(a0, b0, c00);
        c01 = _mm256_fmadd_ps(a0, b1, c01);
        c10 = _mm256_fmadd_ps(a1, b0, c10);
        c11 = _mm256_fmadd_ps(a1, b1, c11);
        c20 = _mm256_fmadd_ps(a2, b0, c20);
        c21 = _mm256_fmadd_ps(a2, b1, c21);
        c30 = _mm256_fmadd_ps(a3, b0, c30);
        c31 = _mm256_fmadd_ps(a3, b1, c31);
    }
    _mm256_storeu_ps(C + (size_t)(i + 0) * n + j, c00);
    _mm256_storeu_ps(C + (size_t)(i + 0) * n + j + 8, c01);
    _mm256_storeu_ps(C + (size_t)(i + 1) * n + j, c10);
    _mm256_storeu_ps(C + (size_t)(i + 1) * n + j + 8, c11);
    _mm256_storeu_ps(C + (size_t)(i + 2) * n + j, c20);
    _mm256_storeu_ps(C + (size_t)(i + 2) * n + j + 8, c21);
    _mm256_storeu_ps(C + (size_t)(i + 3) * n + j, c30);
    _mm256_storeu_ps(C + (size_t)(i + 3) * n + j + 8, c31);
}

void gemm_tn_f32(const float* A, const float* B, float* C, int m, int k, int n, bool accumulate) {
    const int m4 = m - m % 4;
    const int n16 = n - n % 16;
    const int n8 = n - n % 8;
    const int chunk = 512;  // keep the streamed A/B slabs inside L2
    for (int p0 = 0; p0 < k || p0 == 0; p0 += chunk) {
        const int p1 = k < p0 + chunk ? k : p0 + chunk;
        const bool acc = accumulate || p0 > 0;
        for (int i = 0; i < m4; i += 4) {
            for (int j = 0; j < n16; j += 16) tile_tn_f32(A, B, C, m, n, i, j, p0, p1, acc);
            if (n8 > n16) tile_tn8_f32(A, B, C, m, n, i, n16, p0, p1, acc);
        }
        // edge rows/columns: plain broadcast loop over the same chunk
        for (int i = 0; i < m; ++i) {
            const int jlo = i < m4 ? n8 : 0;
            if (jlo == n) continue;
            float* ci = C + (size_t)i * n;
            if (!acc)
                for (int j = jlo; j < n; ++j) ci[j] = 0.f;
            for (int p = p0; p < p1; ++p) {
                const float aip = A[(size_t)p * m + i];
                const float* bp = B + (size_t)p * n;
                for (int j = jlo; j < n; ++j) ci[j] += aip * bp[j];
            }
        }
        if (p1 == k) break;
    }
}

// 4x8 tile of C = A^T B accumulated over the row chunk [p0, p1); A is k x m.
static inline void tile_tn_f64(const double* A, const double* B, double* C, int m, int n, int i,
                               int j, int p0, int p1, bool accumulate) {
    __m256d c00, c01, c10, c11, c20, c21, c30, c31;
    if (accumulate) {
        c00 = _mm256_loadu_pd(C + (size_t)(i + 0) * n + j);
        c01 = _mm256_loadu_pd(C + (size_t)(i + 0) * n + j + 4);
        c10 = _mm256_loadu_pd(C + (size_t)(i + 1) * n + j);
        c11 = _mm256_loadu_pd(C + (size_t)(i + 1) * n + j + 4);
        c20 = _mm256_loadu_pd(C + (size_t)(i + 2) * n + j);
        c21 = _mm256_loadu_pd(C + (size_t)(i + 2) * n + j + 4);
        c30 = _mm256_loadu_pd(C + (size_t)(i + 3) * n + j);
        c31 = _mm256_loadu_pd(C + (size_t)(i + 3) * n + j + 4);
    } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
    }
    for (int p = p0; p < p1; ++p) {
        const double* ap = A + (size_t)p * m + i;
        __m256d b0 = _mm256_loadu_pd(B + (size_t)p * n + j);
        __m256d b1 = _mm256_loadu_pd(B + (size_t)p * n + j + 4);
        __m256d a0 = _mm256_set1_pd(ap[0]);
        __m256d a1 = _mm256_set1_pd(ap[1]);
        __m256d a2 = _mm256_set1_pd(ap[2]);
        __m256d a3 = _mm256_set1_pd(ap[3]);
        c00 = _mm256_fmadd_pd(a0, b0, c00);
        c01 = _mm256_fmadd_pd(a0, b1, c01);
        c10 = _mm256_fmadd_pd(a1, b0, c10);
        c11 = _mm256_fmadd_pd(a1, b1, c11);
        c20 = _mm256_fmadd_pd(a2, b0, c20);
        c21 = _mm256_fmadd_pd(a2, b1, c21);
        c30 = _mm256_fmadd_pd(a3, b0, c30);
        c31 = _mm256_fmadd_pd(a3, b1, c31);
    }
    _mm256_storeu_pd(C + (size_t)(i + 0) * n + j, c00);
    _mm256_storeu_pd(C + (size_t)(i + 0) * n + j + 4, c01);
    _mm256_storeu_pd(C + (size_t)(i + 1) * n + j, c10);
    _mm256_storeu_pd(C + (size_t)(i + 1) * n + j + 4, c11);
    _mm256_storeu_pd(C + (size_t)(i + 2) * n + j, c20);
    _mm256_storeu_pd(C + (size_t)(i + 2) * n + j + 4, c21);
    _mm256_storeu_pd(C + (size_t)(i + 3) * n + j, c30);
    _mm256_storeu_pd(C + (size_t)(i + 3) * n + j + 4, c31);
}

void gemm_tn_f64(const double* A, const double* B, double* C, int m, int k, int n,
                 bool accumulate) {
    const int m4 = m - m % 4;
    const int n8 = n - n % 8;
    const int chunk = 256;
    for (int p0 = 0; p0 < k || p0 == 0; p0 += chunk) {
        const int p1 = k < p0 + chunk ? k : p0 + chunk;
        const bool acc = accumulate || p0 > 0;
        for (int i = 0; i < m4; i += 4)
            for (int j = 0; j < n8; j += 8) tile_tn_f64(A, B, C, m, n, i, j, p0, p1, acc);
        for (int i = 0; i < m; ++i) {
            const int jlo = i < m4 ? n8 : 0;
            if (jlo == n) continue;
            double* ci = C + (size_t)i * n;
            if (!acc)
                for (int j = jlo; j < n; ++j) ci[j] = 0.0;
            for (int p = p0; p < p1; ++p) {
                const double aip = A[(size_t)p * m + i];
                const double* bp = B + (size_t)p * n;
                for (int j = jlo; j < n; ++j) ci[j] += aip * bp[j];
            }
        }
        if (p1 == k) break;
    }
}

void axpy_f32(float a, const float* x, float* y, size_t n) {
    __m256 av = _mm256_set1_ps(a);
    size_t n8 = n - n % 8;
    size_t i = 0;
    for (; i < n8; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_f64(double a, const double* x, double* y, size_t n) {
    __m256d av = _mm256_set1_pd(a);
    size_t n4 = n - n % 4;
    size_t i = 0;
    for (; i < n4; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

double dot_f32(const float* x, const float* y, size_t n) {
    // accumulate in double lanes for the reduction contract
    __m256d acc = _mm256_setzero_pd();
    size_t n4 = n - n % 4;
    size_t i = 0;
    for (; i < n4; i += 4) {
        __m256d xv = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
        __m256d yv = _mm256_cvtps_pd(_mm_loadu_ps(y + i));
        acc = _mm256_fmadd_pd(xv, yv, acc);
    }
    double s = hsum_f64(acc);
    for (; i < n; ++i) s += static_cast<double>(x[i]) * static_cast<double>(y[i]);
    return s;
}

double dot_f64(const double* x, const double* y, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t n4 = n - n % 4;
    size_t i = 0;
    for (; i < n4; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double s = hsum_f64(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

}  // namespace sighedge::kern::avx2
