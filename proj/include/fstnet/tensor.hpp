#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fstnet/check.hpp"

namespace fstnet {

inline std::string shape_str(const std::vector<int>& dims) {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(dims[i]);
    }
    return s + "]";
}

// Dense n-dimensional array, row-major, NCHW for rank-4 feature maps.
template <typename T>
struct TensorT {
    std::vector<int> dims;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> d, T fill = T(0))
        : dims(std::move(d)), data(checked_count(dims), fill) {}
    TensorT(std::vector<int> d, std::vector<T> values) : dims(std::move(d)), data(std::move(values)) {
        require(checked_count(dims) == data.size(), "tensor: ", shape_str(dims), " holds ",
                checked_count(dims), " elements, got ", data.size());
    }

    static std::size_t checked_count(const std::vector<int>& d) {
        std::size_t n = 1;
        for (int e : d) {
            require(e > 0, "tensor extent must be positive, got ", e, " in ", shape_str(d));
            n *= static_cast<std::size_t>(e);
        }
        return n;
    }

    std::size_t numel() const { return data.size(); }
    int rank() const { return static_cast<int>(dims.size()); }
    int dim(int i) const { return dims[static_cast<std::size_t>(i)]; }
    bool same_shape(const TensorT& o) const { return dims == o.dims; }
    std::string shape() const { return shape_str(dims); }
};

using Tensor = TensorT<float>;

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& t) {
    TensorT<To> out;
    out.dims = t.dims;
    out.data.resize(t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i) out.data[i] = static_cast<To>(t.data[i]);
    return out;
}

namespace detail {

// flat offset into a rank-4 NCHW tensor
inline std::size_t idx4(const std::vector<int>& d, int n, int c, int y, int x) {
    return ((static_cast<std::size_t>(n) * d[1] + c) * d[2] + y) * d[3] + x;
}

}  // namespace detail

}  // namespace fstnet
