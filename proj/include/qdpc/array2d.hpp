#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qdpc/error.hpp"

namespace qdpc {

/// Dense row-major 2D array. Element (x, y) lives at index y * width + x.
template <typename T>
class Array2D {
public:
    Array2D() = default;
    Array2D(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(checked_size(width, height)), fill) {}

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::span<T> span() noexcept { return data_; }
    std::span<const T> span() const noexcept { return data_; }
    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    [[nodiscard]] bool same_shape(const Array2D& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }
    template <typename U>
    [[nodiscard]] bool same_shape(const Array2D<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Array2D&) const = default;

private:
    static long long checked_size(int width, int height) {
        if (width < 0 || height < 0) {
            throw DimensionError("negative array dimension");
        }
        return static_cast<long long>(width) * height;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using RealImage = Array2D<double>;
using ComplexImage = Array2D<std::complex<double>>;

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                             " vs " + std::to_string(b.width()) + "x" +
                             std::to_string(b.height()) + ")");
    }
}

}  // namespace qdpc
