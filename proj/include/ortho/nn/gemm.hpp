#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ortho::nn {

// All kernels compute each output element with a fixed reduction order on a
// single thread, so results are bit-reproducible for any thread count.

/// C[M x N] (+)= A[M x K] * B[K x N], all row-major.
inline void gemm(int M, int N, int K, const float* A, const float* B, float* C,
                 bool accumulate) {
#pragma omp parallel
    {
#ifdef _OPENMP
        const int nt = omp_get_num_threads();
        const int tid = omp_get_thread_num();
#else
        const int nt = 1, tid = 0;
#endif
        const int chunk = (N + nt - 1) / nt;
        const int n0 = tid * chunk;
        const int n1 = n0 + chunk < N ? n0 + chunk : N;
        if (n0 < n1) {
            for (int m = 0; m < M; ++m) {
                float* c = C + std::size_t(m) * N;
                if (!accumulate)
                    for (int n = n0; n < n1; ++n) c[n] = 0.0f;
                const float* a = A + std::size_t(m) * K;
                for (int k = 0; k < K; ++k) {
                    const float av = a[k];
                    const float* b = B + std::size_t(k) * N;
#pragma omp simd
                    for (int n = n0; n < n1; ++n) c[n] += av * b[n];
                }
            }
        }
    }
}

/// C[M x N] (+)= A[M x K] * B[N x K]^T, i.e. rows of A dotted with rows of B.
/// Used for weight gradients where K is the large pixel dimension.
inline void gemm_nt(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate) {
    const long total = long(M) * N;
#pragma omp parallel for schedule(static)
    for (long mn = 0; mn < total; ++mn) {
        const int m = int(mn / N);
        const int n = int(mn % N);
        const float* a = A + std::size_t(m) * K;
        const float* b = B + std::size_t(n) * K;
        float s0 = 0.0f, s1 = 0.0f, s2 = 0.0f, s3 = 0.0f;
        int k = 0;
        for (; k + 4 <= K; k += 4) {
            s0 += a[k] * b[k];
            s1 += a[k + 1] * b[k + 1];
            s2 += a[k + 2] * b[k + 2];
            s3 += a[k + 3] * b[k + 3];
        }
        float s = (s0 + s1) + (s2 + s3);
        for (; k < K; ++k) s += a[k] * b[k];
        C[mn] = accumulate ? C[mn] + s : s;
    }
}

}  // namespace ortho::nn
