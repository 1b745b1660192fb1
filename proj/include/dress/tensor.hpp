#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dress/error.hpp"

namespace dress {

/// Dense row-major tensor. float is the training type; the double
/// instantiation exists for gradient checking.
template <typename S>
struct TensorT {
    std::vector<std::size_t> shape;
    std::vector<S> data;

    TensorT() = default;

    explicit TensorT(std::vector<std::size_t> sh, S fill = S(0))
        : shape(std::move(sh)), data(numel_of(shape), fill) {}

    TensorT(std::vector<std::size_t> sh, std::vector<S> values)
        : shape(std::move(sh)), data(std::move(values)) {
        if (data.size() != numel_of(shape)) {
            throw ShapeError("tensor data length does not match shape");
        }
    }

    static std::size_t numel_of(const std::vector<std::size_t>& sh) {
        std::size_t n = 1;
        for (std::size_t e : sh) n *= e;
        return sh.empty() ? 0 : n;
    }

    std::size_t numel() const { return data.size(); }
    bool empty() const { return data.empty(); }

    S& operator[](std::size_t i) { return data[i]; }
    const S& operator[](std::size_t i) const { return data[i]; }

    std::size_t extent(std::size_t axis) const { return shape.at(axis); }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    template <typename T>
    TensorT<T> cast() const {
        TensorT<T> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

template <typename S>
bool all_finite(const TensorT<S>& t) {
    for (S v : t.data) {
        if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
}

template <typename S>
bool all_finite(const std::vector<S>& v) {
    for (S x : v) {
        if (!std::isfinite(static_cast<double>(x))) return false;
    }
    return true;
}

}  // namespace dress
