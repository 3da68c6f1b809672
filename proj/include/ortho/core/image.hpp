#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ortho/core/error.hpp"

namespace ortho {

/// Interleaved HWC image. `T` is uint8_t for stored 8-bit images and float
/// for working buffers in [0,1] (or unbounded for noise maps).
template <typename T>
struct Image {
    int h = 0, w = 0, c = 1;
    std::vector<T> v;

    Image() = default;
    Image(int h_, int w_, int c_, T fill = T(0)) : h(h_), w(w_), c(c_), v(size_t(h_) * w_ * c_, fill) {}

    T& at(int y, int x, int ch = 0) { return v[(size_t(y) * w + x) * c + ch]; }
    const T& at(int y, int x, int ch = 0) const { return v[(size_t(y) * w + x) * c + ch]; }

    size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }

    bool same_shape(const Image& o) const { return h == o.h && w == o.w && c == o.c; }

    friend bool operator==(const Image& a, const Image& b) {
        return a.h == b.h && a.w == b.w && a.c == b.c && a.v == b.v;
    }
};

using ImageF = Image<float>;
using ImageU8 = Image<std::uint8_t>;

inline ImageU8 to_u8(const ImageF& img) {
    ImageU8 out(img.h, img.w, img.c);
    for (size_t i = 0; i < img.v.size(); ++i) {
        float x = std::clamp(img.v[i], 0.0f, 1.0f);
        out.v[i] = std::uint8_t(x * 255.0f + 0.5f);
    }
    return out;
}

inline ImageF to_f32(const ImageU8& img) {
    ImageF out(img.h, img.w, img.c);
    for (size_t i = 0; i < img.v.size(); ++i) out.v[i] = float(img.v[i]) / 255.0f;
    return out;
}

/// Integer-aligned axis-parallel rectangle in image coordinates.
struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
    bool inside(int img_w, int img_h) const {
        return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= img_w && y + h <= img_h;
    }
    friend bool operator==(const Rect& a, const Rect& b) {
        return a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h;
    }
};

/// Canvas of all contour/condition maps: 128 rows by 256 columns.
inline constexpr int kMapH = 128;
inline constexpr int kMapW = 256;
/// Standardized face side length.
inline constexpr int kFaceSize = 512;

inline void require_map_shape(const ImageF& img, int channels, const char* what) {
    if (img.h != kMapH || img.w != kMapW || img.c != channels)
        throw DomainError(std::string(what) + ": expected " + std::to_string(kMapH) + "x" +
                          std::to_string(kMapW) + "x" + std::to_string(channels));
}

}  // namespace ortho
