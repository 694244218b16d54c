#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fstnet/autograd.hpp"
#include "fstnet/rng.hpp"
#include "fstnet/tensor.hpp"

namespace fstnet {

enum class LrKind { Cosine, WarmupHold };

struct LrSchedule {
    LrKind kind = LrKind::Cosine;
    double base_lr = 0.0;
    int total_epochs = 0;
    int warmup_epochs = 0;  // 0 for cosine
};

// epoch_fraction in [0,1].
//   cosine:      base * 0.5 * (1 + cos(pi * t))
//   warmup-hold: linear ramp from 0 over the warmup span, then hold at base
inline double lr_at(const LrSchedule& s, double epoch_fraction) {
    require(s.base_lr > 0.0, "lr_at: base_lr must be positive, got ", s.base_lr);
    require(s.total_epochs >= 1, "lr_at: total_epochs must be >= 1, got ", s.total_epochs);
    require(s.warmup_epochs >= 0 && s.warmup_epochs <= s.total_epochs,
            "lr_at: need 0 <= warmup_epochs <= total_epochs, got ", s.warmup_epochs, "/",
            s.total_epochs);
    require(epoch_fraction >= 0.0 && epoch_fraction <= 1.0,
            "lr_at: epoch_fraction must be in [0,1], got ", epoch_fraction);

    if (s.kind == LrKind::Cosine)
        return s.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch_fraction));

    const double warmup_fraction =
        static_cast<double>(s.warmup_epochs) / static_cast<double>(s.total_epochs);
    if (epoch_fraction < warmup_fraction) return s.base_lr * (epoch_fraction / warmup_fraction);
    return s.base_lr;
}

// p <- p - lr * (grad + weight_decay * p); grads cleared afterwards.
template <typename T>
void sgd_step(const std::vector<VarT<T>>& params, double lr, double weight_decay) {
    require(lr >= 0.0, "sgd_step: lr must be >= 0, got ", lr);
    for (const auto& p : params) {
        auto& g = p->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            p->value.data[i] -= static_cast<T>(
                lr * (static_cast<double>(g[i]) +
                      weight_decay * static_cast<double>(p->value.data[i])));
        }
        p->zero_grad();
    }
}

template <typename T = float>
TensorT<T> init_normal(std::vector<int> dims, double mean, double stddev, std::uint64_t seed) {
    Rng rng(seed);
    TensorT<T> t(std::move(dims));
    for (auto& v : t.data) v = static_cast<T>(rng.normal(mean, stddev));
    return t;
}

}  // namespace fstnet
