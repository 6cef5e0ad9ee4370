#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pls/error.hpp"

namespace pls {

using Complex = std::complex<double>;

/// Dense row-major 2D grid. RealImage holds normalized intensities and
/// ComplexImage holds transmittance values; both require height, width > 0.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;

    Grid(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), data_(checked_size(height, width), fill) {}

    Grid(std::size_t height, std::size_t width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (data_.size() != checked_size(height, width)) {
            throw DimensionError("grid data length " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(height) + "x" +
                                 std::to_string(width));
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * width_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const noexcept {
        return data_[row * width_ + col];
    }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool same_shape(const Grid<T>& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }
    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    bool all_finite() const noexcept {
        for (const T& v : data_) {
            if constexpr (std::is_same_v<T, Complex>) {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
            } else {
                if (!std::isfinite(static_cast<double>(v))) return false;
            }
        }
        return true;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static std::size_t checked_size(std::size_t h, std::size_t w) {
        if (h == 0 || w == 0) throw DimensionError("grid dimensions must be positive");
        return h * w;
    }

    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> data_;
};

using RealImage = Grid<double>;
using ComplexImage = Grid<Complex>;

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) +
                             "x" + std::to_string(a.width()) + " vs " +
                             std::to_string(b.height()) + "x" + std::to_string(b.width()));
    }
}

// Small element-wise helpers used across modules.
RealImage amplitude(const ComplexImage& o);
RealImage phase(const ComplexImage& o);
RealImage squared_magnitude(const ComplexImage& o);
ComplexImage to_complex(const RealImage& x);
ComplexImage polar(const RealImage& amplitude, const RealImage& phase);

}  // namespace pls
