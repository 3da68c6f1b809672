#pragma once

#include <cstring>
#include <vector>

#include "ortho/core/error.hpp"
#include "ortho/core/image.hpp"
#include "ortho/core/rng.hpp"

namespace ortho {

/// Dense NCHW float tensor, the working type of the network code.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<float> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_, float fill = 0.0f)
        : n(n_), c(c_), h(h_), w(w_), v(size_t(n_) * c_ * h_ * w_, fill) {}

    size_t size() const { return v.size(); }
    size_t plane() const { return size_t(h) * w; }
    float* data() { return v.data(); }
    const float* data() const { return v.data(); }

    float* chan(int ni, int ci) { return v.data() + (size_t(ni) * c + ci) * plane(); }
    const float* chan(int ni, int ci) const { return v.data() + (size_t(ni) * c + ci) * plane(); }

    float& at(int ni, int ci, int y, int x) { return chan(ni, ci)[size_t(y) * w + x]; }
    const float& at(int ni, int ci, int y, int x) const { return chan(ni, ci)[size_t(y) * w + x]; }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    void zero() { std::memset(v.data(), 0, v.size() * sizeof(float)); }

    void fill_normal(Rng& rng) {
        for (auto& x : v) x = float(rng.normal());
    }
};

/// Copy one HWC image into channel-planar layout at batch slot `ni`,
/// starting at channel `c0`. Values map through `a*x + b`.
inline void image_to_tensor(const ImageF& img, Tensor& t, int ni, int c0,
                            float a = 1.0f, float b = 0.0f) {
    if (img.h != t.h || img.w != t.w || c0 + img.c > t.c)
        throw DomainError("image_to_tensor: shape mismatch");
    for (int ch = 0; ch < img.c; ++ch) {
        float* dst = t.chan(ni, c0 + ch);
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x)
                dst[size_t(y) * img.w + x] = a * img.at(y, x, ch) + b;
    }
}

inline ImageF tensor_to_image(const Tensor& t, int ni, int c0, int channels,
                              float a = 1.0f, float b = 0.0f) {
    ImageF img(t.h, t.w, channels);
    for (int ch = 0; ch < channels; ++ch) {
        const float* src = t.chan(ni, c0 + ch);
        for (int y = 0; y < t.h; ++y)
            for (int x = 0; x < t.w; ++x)
                img.at(y, x, ch) = a * src[size_t(y) * t.w + x] + b;
    }
    return img;
}

}  // namespace ortho
