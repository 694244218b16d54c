#pragma once

#include <cstddef>
#include <vector>

namespace fstnet::detail {

// C[M x N] += A[M x K] * B[K x N]; i-k-j order so the inner loop runs over
// contiguous rows of B and C and auto-vectorizes.
template <typename T>
void gemm_nn(int M, int K, int N, const T* A, const T* B, T* C) {
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<std::size_t>(i) * K;
        T* c = C + static_cast<std::size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const T av = a[k];
            if (av == T(0)) continue;
            const T* b = B + static_cast<std::size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

// C[M x N] += A[K x M]^T * B[K x N]
template <typename T>
void gemm_tn(int M, int K, int N, const T* A, const T* B, T* C) {
    for (int k = 0; k < K; ++k) {
        const T* a = A + static_cast<std::size_t>(k) * M;
        const T* b = B + static_cast<std::size_t>(k) * N;
        for (int i = 0; i < M; ++i) {
            const T av = a[i];
            if (av == T(0)) continue;
            T* c = C + static_cast<std::size_t>(i) * N;
            for (int j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

// C[M x N] += A[M x K] * B[N x K]^T (row-dot form; fine for thin matrices)
template <typename T>
void gemm_nt(int M, int K, int N, const T* A, const T* B, T* C) {
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<std::size_t>(i) * K;
        for (int j = 0; j < N; ++j) {
            const T* b = B + static_cast<std::size_t>(j) * K;
            T acc = T(0);
            for (int k = 0; k < K; ++k) acc += a[k] * b[k];
            C[static_cast<std::size_t>(i) * N + j] += acc;
        }
    }
}

// out[C x R] = in[R x C]^T
template <typename T>
void transpose(int R, int C, const T* in, T* out) {
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            out[static_cast<std::size_t>(c) * R + r] = in[static_cast<std::size_t>(r) * C + c];
}

inline int conv_out_extent(int in, int kernel, int stride, int pad) {
    return (in + 2 * pad - kernel) / stride + 1;
}

// One sample [C,H,W] -> col[C*K*K, Ho*Wo] with zero padding.
template <typename T>
void im2col(const T* x, int C, int H, int W, int K, int stride, int pad, int Ho, int Wo, T* col) {
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < K; ++ky) {
            for (int kx = 0; kx < K; ++kx) {
                T* dst = col + (static_cast<std::size_t>(c) * K * K + ky * K + kx) *
                                   (static_cast<std::size_t>(Ho) * Wo);
                for (int oy = 0; oy < Ho; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    T* drow = dst + static_cast<std::size_t>(oy) * Wo;
                    if (iy < 0 || iy >= H) {
                        for (int ox = 0; ox < Wo; ++ox) drow[ox] = T(0);
                        continue;
                    }
                    const T* srow = x + (static_cast<std::size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < Wo; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        drow[ox] = (ix >= 0 && ix < W) ? srow[ix] : T(0);
                    }
                }
            }
        }
    }
}

// Scatter-add of a col matrix back into one sample's gradient [C,H,W].
template <typename T>
void col2im_add(const T* col, int C, int H, int W, int K, int stride, int pad, int Ho, int Wo,
                T* gx) {
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < K; ++ky) {
            for (int kx = 0; kx < K; ++kx) {
                const T* src = col + (static_cast<std::size_t>(c) * K * K + ky * K + kx) *
                                         (static_cast<std::size_t>(Ho) * Wo);
                for (int oy = 0; oy < Ho; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= H) continue;
                    const T* srow = src + static_cast<std::size_t>(oy) * Wo;
                    T* drow = gx + (static_cast<std::size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < Wo; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        if (ix >= 0 && ix < W) drow[ix] += srow[ox];
                    }
                }
            }
        }
    }
}

}  // namespace fstnet::detail
