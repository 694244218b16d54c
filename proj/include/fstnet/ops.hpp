#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fstnet/autograd.hpp"
#include "fstnet/linalg.hpp"
#include "fstnet/tensor.hpp"

namespace fstnet {

// ---------------------------------------------------------------------------
// convolutions

// input [N,C,H,W], weight [O,C,K,K] -> [N,O,Ho,Wo]; no bias.
// Forward and both gradients ride im2col + GEMM.
template <typename T>
VarT<T> conv2d(const VarT<T>& input, const VarT<T>& weight, int stride, int pad) {
    const auto& xd = input->value.dims;
    const auto& wd = weight->value.dims;
    require(xd.size() == 4, "conv2d: input must be rank 4, got ", shape_str(xd));
    require(wd.size() == 4, "conv2d: weight must be rank 4, got ", shape_str(wd));
    require(wd[2] == wd[3], "conv2d: kernel must be square, got weight ", shape_str(wd));
    require(xd[1] == wd[1], "conv2d: input channels ", xd[1], " != weight input channels ", wd[1],
            " (input ", shape_str(xd), ", weight ", shape_str(wd), ")");
    require(stride >= 1 && pad >= 0, "conv2d: need stride >= 1 and pad >= 0, got stride=", stride,
            " pad=", pad);

    const int N = xd[0], C = xd[1], H = xd[2], W = xd[3];
    const int O = wd[0], K = wd[2];
    const int Ho = detail::conv_out_extent(H, K, stride, pad);
    const int Wo = detail::conv_out_extent(W, K, stride, pad);
    require(Ho >= 1 && Wo >= 1, "conv2d: kernel ", K, " with stride ", stride, " pad ", pad,
            " does not fit input ", shape_str(xd));

    const std::size_t col_rows = static_cast<std::size_t>(C) * K * K;
    const std::size_t col_cols = static_cast<std::size_t>(Ho) * Wo;
    auto cols = std::make_shared<std::vector<T>>(static_cast<std::size_t>(N) * col_rows * col_cols);

    TensorT<T> out({N, O, Ho, Wo});
    for (int n = 0; n < N; ++n) {
        T* col = cols->data() + static_cast<std::size_t>(n) * col_rows * col_cols;
        detail::im2col(input->value.data.data() + static_cast<std::size_t>(n) * C * H * W, C, H, W,
                       K, stride, pad, Ho, Wo, col);
        detail::gemm_nn(O, static_cast<int>(col_rows), static_cast<int>(col_cols),
                        weight->value.data.data(), col,
                        out.data.data() + static_cast<std::size_t>(n) * O * col_cols);
    }

    auto node = make_var(std::move(out));
    node->parents = {input, weight};
    node->backward_fn = [input, weight, cols, N, C, H, W, O, K, stride, pad, Ho, Wo,
                         col_rows, col_cols](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        auto& gw = weight->ensure_grad();
        std::vector<T> col_t(col_rows * col_cols);
        std::vector<T> gcol(col_rows * col_cols);
        for (int n = 0; n < N; ++n) {
            const T* col = cols->data() + static_cast<std::size_t>(n) * col_rows * col_cols;
            const T* gout = self.grad.data() + static_cast<std::size_t>(n) * O * col_cols;
            // dW += gout * col^T
            detail::transpose(static_cast<int>(col_rows), static_cast<int>(col_cols), col,
                              col_t.data());
            detail::gemm_nn(O, static_cast<int>(col_cols), static_cast<int>(col_rows), gout,
                            col_t.data(), gw.data());
            // dX += col2im(W^T * gout)
            std::fill(gcol.begin(), gcol.end(), T(0));
            detail::gemm_tn(static_cast<int>(col_rows), O, static_cast<int>(col_cols),
                            weight->value.data.data(), gout, gcol.data());
            detail::col2im_add(gcol.data(), C, H, W, K, stride, pad, Ho, Wo,
                               gx.data() + static_cast<std::size_t>(n) * C * H * W);
        }
    };
    return node;
}

// input [N,C,H,W], weight [C,1,K,K] -> [N,C,Ho,Wo]; one kernel per channel.
template <typename T>
VarT<T> depthwise_conv2d(const VarT<T>& input, const VarT<T>& weight, int stride, int pad) {
    const auto& xd = input->value.dims;
    const auto& wd = weight->value.dims;
    require(xd.size() == 4, "depthwise_conv2d: input must be rank 4, got ", shape_str(xd));
    require(wd.size() == 4 && wd[1] == 1 && wd[2] == wd[3],
            "depthwise_conv2d: weight must be [C,1,K,K], got ", shape_str(wd));
    require(wd[0] == xd[1], "depthwise_conv2d: weight channels ", wd[0], " != input channels ",
            xd[1], " (input ", shape_str(xd), ", weight ", shape_str(wd), ")");
    require(stride >= 1 && pad >= 0, "depthwise_conv2d: need stride >= 1 and pad >= 0");

    const int N = xd[0], C = xd[1], H = xd[2], W = xd[3];
    const int K = wd[2];
    const int Ho = detail::conv_out_extent(H, K, stride, pad);
    const int Wo = detail::conv_out_extent(W, K, stride, pad);
    require(Ho >= 1 && Wo >= 1, "depthwise_conv2d: kernel does not fit input ", shape_str(xd));

    TensorT<T> out({N, C, Ho, Wo});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T* x = input->value.data.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
            const T* w = weight->value.data.data() + static_cast<std::size_t>(c) * K * K;
            T* o = out.data.data() + (static_cast<std::size_t>(n) * C + c) * Ho * Wo;
            for (int oy = 0; oy < Ho; ++oy)
                for (int ox = 0; ox < Wo; ++ox) {
                    T acc = T(0);
                    for (int ky = 0; ky < K; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < K; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            acc += x[static_cast<std::size_t>(iy) * W + ix] * w[ky * K + kx];
                        }
                    }
                    o[static_cast<std::size_t>(oy) * Wo + ox] = acc;
                }
        }

    auto node = make_var(std::move(out));
    node->parents = {input, weight};
    node->backward_fn = [input, weight, N, C, H, W, K, stride, pad, Ho, Wo](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        auto& gw = weight->ensure_grad();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                const T* x =
                    input->value.data.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                const T* w = weight->value.data.data() + static_cast<std::size_t>(c) * K * K;
                const T* g = self.grad.data() + (static_cast<std::size_t>(n) * C + c) * Ho * Wo;
                T* gxc = gx.data() + (static_cast<std::size_t>(n) * C + c) * H * W;
                T* gwc = gw.data() + static_cast<std::size_t>(c) * K * K;
                for (int oy = 0; oy < Ho; ++oy)
                    for (int ox = 0; ox < Wo; ++ox) {
                        const T go = g[static_cast<std::size_t>(oy) * Wo + ox];
                        if (go == T(0)) continue;
                        for (int ky = 0; ky < K; ++ky) {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= H) continue;
                            for (int kx = 0; kx < K; ++kx) {
                                const int ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= W) continue;
                                gxc[static_cast<std::size_t>(iy) * W + ix] += go * w[ky * K + kx];
                                gwc[ky * K + kx] += go * x[static_cast<std::size_t>(iy) * W + ix];
                            }
                        }
                    }
            }
    };
    return node;
}

// input [N,C,H,W], weight [O,C,1,1] -> [N,O,H,W]; per-pixel channel mixing.
template <typename T>
VarT<T> pointwise_conv2d(const VarT<T>& input, const VarT<T>& weight) {
    const auto& xd = input->value.dims;
    const auto& wd = weight->value.dims;
    require(xd.size() == 4, "pointwise_conv2d: input must be rank 4, got ", shape_str(xd));
    require(wd.size() == 4 && wd[2] == 1 && wd[3] == 1,
            "pointwise_conv2d: weight must be [O,C,1,1], got ", shape_str(wd));
    require(wd[1] == xd[1], "pointwise_conv2d: input channels ", xd[1],
            " != weight input channels ", wd[1], " (input ", shape_str(xd), ", weight ",
            shape_str(wd), ")");

    const int N = xd[0], C = xd[1], HW = xd[2] * xd[3];
    const int O = wd[0];
    TensorT<T> out({N, O, xd[2], xd[3]});
    for (int n = 0; n < N; ++n)
        detail::gemm_nn(O, C, HW, weight->value.data.data(),
                        input->value.data.data() + static_cast<std::size_t>(n) * C * HW,
                        out.data.data() + static_cast<std::size_t>(n) * O * HW);

    auto node = make_var(std::move(out));
    node->parents = {input, weight};
    node->backward_fn = [input, weight, N, C, HW, O](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        auto& gw = weight->ensure_grad();
        for (int n = 0; n < N; ++n) {
            const T* x = input->value.data.data() + static_cast<std::size_t>(n) * C * HW;
            const T* g = self.grad.data() + static_cast<std::size_t>(n) * O * HW;
            detail::gemm_nt(O, HW, C, g, x, gw.data());
            detail::gemm_tn(C, O, HW, weight->value.data.data(), g,
                            gx.data() + static_cast<std::size_t>(n) * C * HW);
        }
    };
    return node;
}

// ---------------------------------------------------------------------------
// pooling

// Gradient routes to the argmax; ties go to the first element in row-major
// scan order.
template <typename T>
VarT<T> maxpool2d(const VarT<T>& input, int window, int stride) {
    const auto& xd = input->value.dims;
    require(xd.size() == 4, "maxpool2d: input must be rank 4, got ", shape_str(xd));
    require(window >= 1 && stride >= 1, "maxpool2d: need window >= 1 and stride >= 1");
    require(window <= xd[2] && window <= xd[3], "maxpool2d: window ", window,
            " larger than input ", shape_str(xd));

    const int N = xd[0], C = xd[1], H = xd[2], W = xd[3];
    const int Ho = (H - window) / stride + 1;
    const int Wo = (W - window) / stride + 1;

    TensorT<T> out({N, C, Ho, Wo});
    auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
    std::size_t oi = 0;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const std::size_t plane = (static_cast<std::size_t>(n) * C + c) * H * W;
            for (int oy = 0; oy < Ho; ++oy)
                for (int ox = 0; ox < Wo; ++ox, ++oi) {
                    T best = input->value.data[plane + static_cast<std::size_t>(oy * stride) * W +
                                               ox * stride];
                    std::size_t best_i =
                        plane + static_cast<std::size_t>(oy * stride) * W + ox * stride;
                    for (int ky = 0; ky < window; ++ky)
                        for (int kx = 0; kx < window; ++kx) {
                            const std::size_t i =
                                plane + static_cast<std::size_t>(oy * stride + ky) * W +
                                (ox * stride + kx);
                            if (input->value.data[i] > best) {
                                best = input->value.data[i];
                                best_i = i;
                            }
                        }
                    out.data[oi] = best;
                    (*argmax)[oi] = best_i;
                }
        }

    auto node = make_var(std::move(out));
    node->parents = {input};
    node->backward_fn = [input, argmax](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[(*argmax)[i]] += self.grad[i];
    };
    return node;
}

// ---------------------------------------------------------------------------
// normalization (no learned affine)

namespace detail {

// Shared kernel: normalize `groups` contiguous runs of length `len`.
template <typename T>
VarT<T> normalize_groups(const VarT<T>& input, std::size_t groups, std::size_t len, T eps,
                         const char* opname) {
    require(eps > T(0), opname, ": eps must be positive");
    TensorT<T> out(input->value.dims);
    auto inv_std = std::make_shared<std::vector<T>>(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const T* x = input->value.data.data() + g * len;
        T* y = out.data.data() + g * len;
        T mean = T(0);
        for (std::size_t i = 0; i < len; ++i) mean += x[i];
        mean /= static_cast<T>(len);
        T var = T(0);
        for (std::size_t i = 0; i < len; ++i) var += (x[i] - mean) * (x[i] - mean);
        var /= static_cast<T>(len);
        const T inv = T(1) / std::sqrt(var + eps);
        (*inv_std)[g] = inv;
        for (std::size_t i = 0; i < len; ++i) y[i] = (x[i] - mean) * inv;
    }

    auto node = make_var(std::move(out));
    node->parents = {input};
    node->backward_fn = [input, inv_std, groups, len](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        for (std::size_t g = 0; g < groups; ++g) {
            const T* y = self.value.data.data() + g * len;
            const T* go = self.grad.data() + g * len;
            T* gxp = gx.data() + g * len;
            T mg = T(0), mgy = T(0);
            for (std::size_t i = 0; i < len; ++i) {
                mg += go[i];
                mgy += go[i] * y[i];
            }
            mg /= static_cast<T>(len);
            mgy /= static_cast<T>(len);
            const T inv = (*inv_std)[g];
            for (std::size_t i = 0; i < len; ++i) gxp[i] += inv * (go[i] - mg - y[i] * mgy);
        }
    };
    return node;
}

}  // namespace detail

// Zero mean / unit variance per (sample, channel) over H*W.
template <typename T>
VarT<T> instance_norm(const VarT<T>& input, T eps = T(1e-5)) {
    const auto& d = input->value.dims;
    require(d.size() == 4, "instance_norm: input must be rank 4, got ", shape_str(d));
    return detail::normalize_groups(input, static_cast<std::size_t>(d[0]) * d[1],
                                    static_cast<std::size_t>(d[2]) * d[3], eps, "instance_norm");
}

// Zero mean / unit variance per sample over C*H*W.
template <typename T>
VarT<T> layer_norm(const VarT<T>& input, T eps = T(1e-5)) {
    const auto& d = input->value.dims;
    require(d.size() == 4, "layer_norm: input must be rank 4, got ", shape_str(d));
    return detail::normalize_groups(input, static_cast<std::size_t>(d[0]),
                                    static_cast<std::size_t>(d[1]) * d[2] * d[3], eps,
                                    "layer_norm");
}

// ---------------------------------------------------------------------------
// elementwise

template <typename T>
VarT<T> relu(const VarT<T>& input) {
    TensorT<T> out(input->value.dims);
    for (std::size_t i = 0; i < out.numel(); ++i)
        out.data[i] = input->value.data[i] > T(0) ? input->value.data[i] : T(0);
    auto node = make_var(std::move(out));
    node->parents = {input};
    node->backward_fn = [input](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            if (input->value.data[i] > T(0)) gx[i] += self.grad[i];
    };
    return node;
}

template <typename T>
VarT<T> sigmoid(const VarT<T>& input) {
    TensorT<T> out(input->value.dims);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        const T x = input->value.data[i];
        out.data[i] = x >= T(0) ? T(1) / (T(1) + std::exp(-x))
                                : std::exp(x) / (T(1) + std::exp(x));
    }
    auto node = make_var(std::move(out));
    node->parents = {input};
    node->backward_fn = [input](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const T y = self.value.data[i];
            gx[i] += self.grad[i] * y * (T(1) - y);
        }
    };
    return node;
}

template <typename T>
VarT<T> add(const VarT<T>& a, const VarT<T>& b) {
    require(a->value.same_shape(b->value), "add: shape mismatch ", a->value.shape(), " vs ",
            b->value.shape());
    TensorT<T> out(a->value.dims);
    for (std::size_t i = 0; i < out.numel(); ++i)
        out.data[i] = a->value.data[i] + b->value.data[i];
    auto node = make_var(std::move(out));
    node->parents = {a, b};
    node->backward_fn = [a, b](NodeT<T>& self) {
        auto& ga = a->ensure_grad();
        auto& gb = b->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            ga[i] += self.grad[i];
            gb[i] += self.grad[i];
        }
    };
    return node;
}

template <typename T>
VarT<T> scale(const VarT<T>& input, T k) {
    TensorT<T> out(input->value.dims);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = input->value.data[i] * k;
    auto node = make_var(std::move(out));
    node->parents = {input};
    node->backward_fn = [input, k](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i] * k;
    };
    return node;
}

// ---------------------------------------------------------------------------
// shape plumbing

template <typename T>
VarT<T> reshape(const VarT<T>& input, std::vector<int> dims) {
    TensorT<T> out(std::move(dims));
    require(out.numel() == input->value.numel(), "reshape: ", input->value.shape(), " has ",
            input->value.numel(), " elements, target ", out.shape(), " has ", out.numel());
    out.data = input->value.data;
    auto node = make_var(std::move(out));
    node->parents = {input};
    node->backward_fn = [input](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
    };
    return node;
}

// Concatenate rank-4 inputs along the channel axis.
template <typename T>
VarT<T> concat_channels(const std::vector<VarT<T>>& inputs) {
    require(!inputs.empty(), "concat_channels: no inputs");
    const auto& d0 = inputs[0]->value.dims;
    require(d0.size() == 4, "concat_channels: inputs must be rank 4, got ", shape_str(d0));
    int total_c = 0;
    for (const auto& v : inputs) {
        const auto& d = v->value.dims;
        require(d.size() == 4 && d[0] == d0[0] && d[2] == d0[2] && d[3] == d0[3],
                "concat_channels: incompatible input ", shape_str(d), " vs ", shape_str(d0));
        total_c += d[1];
    }
    const int N = d0[0], H = d0[2], W = d0[3];
    const std::size_t hw = static_cast<std::size_t>(H) * W;
    TensorT<T> out({N, total_c, H, W});
    for (int n = 0; n < N; ++n) {
        std::size_t coff = 0;
        for (const auto& v : inputs) {
            const std::size_t c = static_cast<std::size_t>(v->value.dims[1]);
            std::copy_n(v->value.data.data() + static_cast<std::size_t>(n) * c * hw, c * hw,
                        out.data.data() + (static_cast<std::size_t>(n) * total_c + coff) * hw);
            coff += c;
        }
    }
    auto node = make_var(std::move(out));
    node->parents = inputs;
    node->backward_fn = [inputs, N, total_c, hw](NodeT<T>& self) {
        for (int n = 0; n < N; ++n) {
            std::size_t coff = 0;
            for (const auto& v : inputs) {
                auto& gx = v->ensure_grad();
                const std::size_t c = static_cast<std::size_t>(v->value.dims[1]);
                const T* g =
                    self.grad.data() + (static_cast<std::size_t>(n) * total_c + coff) * hw;
                T* dst = gx.data() + static_cast<std::size_t>(n) * c * hw;
                for (std::size_t i = 0; i < c * hw; ++i) dst[i] += g[i];
                coff += c;
            }
        }
    };
    return node;
}

// ---------------------------------------------------------------------------
// dense layer and losses

// input [N,D], weight [D,M], bias [M] -> [N,M]
template <typename T>
VarT<T> fully_connected(const VarT<T>& input, const VarT<T>& weight, const VarT<T>& bias) {
    const auto& xd = input->value.dims;
    const auto& wd = weight->value.dims;
    const auto& bd = bias->value.dims;
    require(xd.size() == 2, "fully_connected: input must be rank 2, got ", shape_str(xd));
    require(wd.size() == 2, "fully_connected: weight must be rank 2, got ", shape_str(wd));
    require(bd.size() == 1, "fully_connected: bias must be rank 1, got ", shape_str(bd));
    require(xd[1] == wd[0], "fully_connected: inner dims disagree (input ", shape_str(xd),
            ", weight ", shape_str(wd), ")");
    require(bd[0] == wd[1], "fully_connected: bias ", shape_str(bd), " != weight columns ", wd[1]);

    const int N = xd[0], D = xd[1], M = wd[1];
    TensorT<T> out({N, M});
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m)
            out.data[static_cast<std::size_t>(n) * M + m] = bias->value.data[m];
    detail::gemm_nn(N, D, M, input->value.data.data(), weight->value.data.data(),
                    out.data.data());

    auto node = make_var(std::move(out));
    node->parents = {input, weight, bias};
    node->backward_fn = [input, weight, bias, N, D, M](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        auto& gw = weight->ensure_grad();
        auto& gb = bias->ensure_grad();
        detail::gemm_nt(N, M, D, self.grad.data(), weight->value.data.data(), gx.data());
        detail::gemm_tn(D, N, M, input->value.data.data(), self.grad.data(), gw.data());
        for (int n = 0; n < N; ++n)
            for (int m = 0; m < M; ++m) gb[m] += self.grad[static_cast<std::size_t>(n) * M + m];
    };
    return node;
}

// logits [N,2], labels in {0 = live, 1 = spoof} -> scalar mean NLL.
template <typename T>
VarT<T> softmax_cross_entropy(const VarT<T>& logits, const std::vector<int>& labels) {
    const auto& d = logits->value.dims;
    require(d.size() == 2 && d[1] == 2, "softmax_cross_entropy: logits must be [N,2], got ",
            shape_str(d));
    require(static_cast<int>(labels.size()) == d[0], "softmax_cross_entropy: ", labels.size(),
            " labels for ", d[0], " rows");
    const int N = d[0];
    for (int label : labels)
        require(label == 0 || label == 1, "softmax_cross_entropy: label out of range: ", label);

    auto probs = std::make_shared<std::vector<T>>(static_cast<std::size_t>(N) * 2);
    T loss = T(0);
    for (int n = 0; n < N; ++n) {
        const T a = logits->value.data[static_cast<std::size_t>(n) * 2];
        const T b = logits->value.data[static_cast<std::size_t>(n) * 2 + 1];
        const T m = std::max(a, b);
        const T ea = std::exp(a - m), eb = std::exp(b - m);
        const T z = ea + eb;
        (*probs)[static_cast<std::size_t>(n) * 2] = ea / z;
        (*probs)[static_cast<std::size_t>(n) * 2 + 1] = eb / z;
        const T p = (*probs)[static_cast<std::size_t>(n) * 2 + labels[n]];
        loss -= std::log(p);
    }
    loss /= static_cast<T>(N);

    auto node = make_var(TensorT<T>({1}, std::vector<T>{loss}));
    node->parents = {logits};
    node->backward_fn = [logits, probs, labels, N](NodeT<T>& self) {
        auto& gx = logits->ensure_grad();
        const T g = self.grad[0] / static_cast<T>(N);
        for (int n = 0; n < N; ++n)
            for (int k = 0; k < 2; ++k) {
                const T onehot = labels[n] == k ? T(1) : T(0);
                gx[static_cast<std::size_t>(n) * 2 + k] +=
                    g * ((*probs)[static_cast<std::size_t>(n) * 2 + k] - onehot);
            }
    };
    return node;
}

// Mean squared difference over all elements.
template <typename T>
VarT<T> l2_loss(const VarT<T>& pred, const TensorT<T>& target) {
    require(pred->value.same_shape(target), "l2_loss: shape mismatch ", pred->value.shape(),
            " vs ", target.shape());
    const std::size_t n = pred->value.numel();
    T loss = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        const T d = pred->value.data[i] - target.data[i];
        loss += d * d;
    }
    loss /= static_cast<T>(n);

    auto node = make_var(TensorT<T>({1}, std::vector<T>{loss}));
    node->parents = {pred};
    auto tgt = std::make_shared<TensorT<T>>(target);
    node->backward_fn = [pred, tgt, n](NodeT<T>& self) {
        auto& gx = pred->ensure_grad();
        const T g = self.grad[0] * T(2) / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i)
            gx[i] += g * (pred->value.data[i] - tgt->data[i]);
    };
    return node;
}

// Scalar dot with fixed weights; handy for reducing a map to a test scalar.
template <typename T>
VarT<T> weighted_sum(const VarT<T>& input, const TensorT<T>& weights) {
    require(input->value.same_shape(weights), "weighted_sum: shape mismatch ",
            input->value.shape(), " vs ", weights.shape());
    T acc = T(0);
    for (std::size_t i = 0; i < weights.numel(); ++i)
        acc += input->value.data[i] * weights.data[i];
    auto node = make_var(TensorT<T>({1}, std::vector<T>{acc}));
    node->parents = {input};
    auto w = std::make_shared<TensorT<T>>(weights);
    node->backward_fn = [input, w](NodeT<T>& self) {
        auto& gx = input->ensure_grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[0] * w->data[i];
    };
    return node;
}

}  // namespace fstnet
