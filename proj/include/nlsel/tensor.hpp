#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlsel/errors.hpp"

namespace nlsel {

/// Dense NCHW tensor. Plain storage type; all math lives in the layer
/// functions (net.hpp).
template <typename T>
struct Tensor4 {
    int b = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor4() = default;
    Tensor4(int b_, int c_, int h_, int w_)
        : b(b_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(b_) * c_ * h_ * w_, T(0)) {
        if (b_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0)
            throw DataError("tensor: dims must be positive");
    }

    std::size_t size() const { return data.size(); }

    T* plane(int bi, int ci) {
        return data.data() + (static_cast<std::size_t>(bi) * c + ci) * h * w;
    }
    const T* plane(int bi, int ci) const {
        return data.data() + (static_cast<std::size_t>(bi) * c + ci) * h * w;
    }

    T& at(int bi, int ci, int y, int x) { return plane(bi, ci)[static_cast<std::size_t>(y) * w + x]; }
    T at(int bi, int ci, int y, int x) const {
        return plane(bi, ci)[static_cast<std::size_t>(y) * w + x];
    }

    bool same_shape(const Tensor4& o) const {
        return b == o.b && c == o.c && h == o.h && w == o.w;
    }
    std::string shape_str() const {
        return "(" + std::to_string(b) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
               std::to_string(w) + ")";
    }
    void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

} // namespace nlsel
