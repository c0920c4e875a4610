#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "monostereo/errors.hpp"

namespace monostereo {

/// Dense row-major 2-D array. The workhorse container for images, masks and
/// per-pixel maps throughout the library.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<size_t>(width) * static_cast<size_t>(height), fill) {
        assert(width >= 0 && height >= 0);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }
    bool same_size(const Raster& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

    T& at(int x, int y) {
        assert(in_bounds(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }
    const T& at(int x, int y) const {
        assert(in_bounds(x, y));
        return data_[static_cast<size_t>(y) * width_ + x];
    }
    T& operator()(int x, int y) { return at(x, y); }
    const T& operator()(int x, int y) const { return at(x, y); }

    /// Read with coordinates clamped into the image; used for border handling.
    const T& at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width_ - 1);
        y = std::clamp(y, 0, height_ - 1);
        return data_[static_cast<size_t>(y) * width_ + x];
    }

    T* row(int y) { return data_.data() + static_cast<size_t>(y) * width_; }
    const T* row(int y) const { return data_.data() + static_cast<size_t>(y) * width_; }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Raster& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using ImageGray = Raster<float>;
using Mask = Raster<uint8_t>;

inline void require_same_size_impl(int wa, int ha, int wb, int hb, const char* what) {
    if (wa != wb || ha != hb)
        throw SizeMismatch(std::string(what) + ": " + std::to_string(wa) + "x" +
                           std::to_string(ha) + " vs " + std::to_string(wb) + "x" +
                           std::to_string(hb));
}

template <typename A, typename B>
void require_same_size(const Raster<A>& a, const Raster<B>& b, const char* what) {
    require_same_size_impl(a.width(), a.height(), b.width(), b.height(), what);
}

/// Per-pixel real values plus a validity mask. Depth and disparity maps share
/// this layout; the distinct wrapper types keep units (meters vs pixels) from
/// being mixed up at interfaces.
struct MaskedMap {
    Raster<double> data;
    Mask valid;

    MaskedMap() = default;
    MaskedMap(int width, int height) : data(width, height, 0.0), valid(width, height, 0) {}

    int width() const { return data.width(); }
    int height() const { return data.height(); }

    bool is_valid(int x, int y) const { return valid.at(x, y) != 0; }

    void set(int x, int y, double v) {
        data.at(x, y) = v;
        valid.at(x, y) = 1;
    }
    void invalidate(int x, int y) { valid.at(x, y) = 0; }

    size_t valid_count() const {
        size_t n = 0;
        for (size_t i = 0; i < valid.size(); ++i) n += valid.data()[i] ? 1u : 0u;
        return n;
    }
};

/// Per-pixel depth in meters. Valid entries are finite and positive.
struct DepthMap : MaskedMap {
    using MaskedMap::MaskedMap;
};

/// Per-pixel disparity in pixels. Binocular disparities are non-negative;
/// the reference-relative convention used by the structured-light matcher is
/// signed.
struct DisparityMap : MaskedMap {
    using MaskedMap::MaskedMap;
};

/// Summed-area table over an arbitrary source, queried with clamped windows.
/// Accumulator type S must not overflow the full-image sum.
template <typename S>
class IntegralImage {
public:
    IntegralImage() = default;

    template <typename T, typename Fn>
    IntegralImage(const Raster<T>& src, Fn value_of) {
        build(src.width(), src.height(),
              [&](int x, int y) { return value_of(src.at(x, y)); });
    }

    template <typename Fn>
    void build(int width, int height, Fn value_at) {
        w_ = width;
        h_ = height;
        sums_.assign(static_cast<size_t>(w_ + 1) * (h_ + 1), S{});
        for (int y = 0; y < h_; ++y) {
            S rowsum{};
            const S* above = sums_.data() + static_cast<size_t>(y) * (w_ + 1);
            S* cur = sums_.data() + static_cast<size_t>(y + 1) * (w_ + 1);
            for (int x = 0; x < w_; ++x) {
                rowsum += static_cast<S>(value_at(x, y));
                cur[x + 1] = above[x + 1] + rowsum;
            }
        }
    }

    /// Sum over the half-open rectangle [x0,x1) x [y0,y1), clipped to bounds.
    S rect(int x0, int y0, int x1, int y1) const {
        x0 = std::clamp(x0, 0, w_);
        x1 = std::clamp(x1, 0, w_);
        y0 = std::clamp(y0, 0, h_);
        y1 = std::clamp(y1, 0, h_);
        if (x0 >= x1 || y0 >= y1) return S{};
        const size_t stride = static_cast<size_t>(w_ + 1);
        return sums_[y1 * stride + x1] - sums_[y0 * stride + x1] -
               sums_[y1 * stride + x0] + sums_[y0 * stride + x0];
    }

    /// Sum over the square window of half-size r centered on (x,y), clipped.
    S window(int x, int y, int r) const { return rect(x - r, y - r, x + r + 1, y + r + 1); }

    /// Number of in-bounds cells of the same clipped window.
    int window_count(int x, int y, int r) const {
        const int x0 = std::max(0, x - r), x1 = std::min(w_, x + r + 1);
        const int y0 = std::max(0, y - r), y1 = std::min(h_, y + r + 1);
        return std::max(0, x1 - x0) * std::max(0, y1 - y0);
    }

private:
    int w_ = 0, h_ = 0;
    std::vector<S> sums_;
};

} // namespace monostereo
