#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fstnet/autograd.hpp"
#include "fstnet/rng.hpp"
#include "fstnet/tensor.hpp"

namespace testutil {

inline fstnet::TensorT<double> random_tensor(std::vector<int> dims, fstnet::Rng& rng,
                                             double stddev = 1.0) {
    fstnet::TensorT<double> t(std::move(dims));
    for (auto& v : t.data) v = rng.normal(0.0, stddev);
    return t;
}

inline fstnet::Tensor random_tensor_f(std::vector<int> dims, fstnet::Rng& rng,
                                      double stddev = 1.0) {
    fstnet::Tensor t(std::move(dims));
    for (auto& v : t.data) v = static_cast<float>(rng.normal(0.0, stddev));
    return t;
}

// Central finite differences against the analytic gradient, all in double.
// loss_fn must rebuild the graph from the same leaf nodes on every call.
inline double max_grad_rel_error(const std::function<fstnet::VarT<double>()>& loss_fn,
                                 const std::vector<fstnet::VarT<double>>& leaves,
                                 double h = 1e-5) {
    for (const auto& leaf : leaves) leaf->zero_grad();
    fstnet::backward(loss_fn());

    std::vector<std::vector<double>> analytic;
    analytic.reserve(leaves.size());
    for (const auto& leaf : leaves) analytic.push_back(leaf->ensure_grad());

    double worst = 0.0;
    for (std::size_t l = 0; l < leaves.size(); ++l) {
        auto& x = leaves[l]->value.data;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double saved = x[i];
            x[i] = saved + h;
            const double up = loss_fn()->value.data[0];
            x[i] = saved - h;
            const double down = loss_fn()->value.data[0];
            x[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[l][i];
            const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
            worst = std::max(worst, std::abs(a - numeric) / scale);
        }
    }
    for (const auto& leaf : leaves) leaf->zero_grad();
    return worst;
}

// Scoped temporary directory under the system temp root.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("fstnet_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

}  // namespace testutil
