#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ortho/core/error.hpp"
#include "ortho/core/image.hpp"

namespace ortho::img {

// Contrast-limited adaptive histogram equalization, 8-bit grayscale.
//
// Conventions (shared with the brute-force test oracle):
//  * tiles partition the image; tile (i,j) covers rows [i*th, min((i+1)*th, h))
//    and the analogous column range, so edge tiles may be smaller;
//  * clip count = max(1, floor(clip_limit * tile_area / 256)); the clipped
//    excess is redistributed as floor(excess/256) per bin plus one extra to
//    bins 0..excess%256-1, in a single pass;
//  * the equalization map is lut[v] = round(255 * (cdf(v) - cdf_min) /
//    (area - cdf_min)) with cdf_min the first nonzero cdf value, which keeps
//    an already-uniform histogram fixed;
//  * inter-tile blending is bilinear between tile node pixels at
//    y = y0 + (tile_h - 1) / 2 (integer division), clamped at the borders, so
//    a pixel sitting on a node takes its tile's map exactly.

struct TileGrid {
    int th = 0, tw = 0;  // requested window
    int ny = 0, nx = 0;  // tile counts
    int h = 0, w = 0;

    int row0(int i) const { return i * th; }
    int row1(int i) const { return std::min((i + 1) * th, h); }
    int col0(int j) const { return j * tw; }
    int col1(int j) const { return std::min((j + 1) * tw, w); }
    int node_y(int i) const { return row0(i) + (row1(i) - row0(i) - 1) / 2; }
    int node_x(int j) const { return col0(j) + (col1(j) - col0(j) - 1) / 2; }
};

inline TileGrid make_tile_grid(int h, int w, int th, int tw) {
    if (th > h || tw > w) throw DomainError("clahe: window larger than image");
    if (th < 1 || tw < 1) throw DomainError("clahe: window must be positive");
    TileGrid g;
    g.th = th;
    g.tw = tw;
    g.h = h;
    g.w = w;
    g.ny = (h + th - 1) / th;
    g.nx = (w + tw - 1) / tw;
    return g;
}

/// Clip-redistribute-equalize map for one histogram over `area` pixels.
inline std::array<std::uint8_t, 256> clahe_tile_lut(std::array<int, 256> hist, int area,
                                                    double clip_limit) {
    const long long clip = std::max(1LL, (long long)(clip_limit * area / 256.0));
    long long excess = 0;
    for (auto& b : hist) {
        if (b > clip) {
            excess += b - clip;
            b = int(clip);
        }
    }
    const int bonus = int(excess / 256);
    const int rem = int(excess % 256);
    for (int i = 0; i < 256; ++i) hist[size_t(i)] += bonus + (i < rem ? 1 : 0);

    std::array<std::uint8_t, 256> lut{};
    long long cdf = 0, cdf_min = -1;
    for (int v = 0; v < 256; ++v) {
        cdf += hist[size_t(v)];
        if (cdf_min < 0 && cdf > 0) cdf_min = cdf;
        if (area > cdf_min) {
            const double x = 255.0 * double(cdf - cdf_min) / double(area - cdf_min);
            lut[size_t(v)] = std::uint8_t(std::clamp((long long)std::floor(x + 0.5), 0LL, 255LL));
        } else {
            lut[size_t(v)] = std::uint8_t(v);
        }
    }
    return lut;
}

/// All per-tile equalization maps (exposed for tests).
inline std::vector<std::array<std::uint8_t, 256>> clahe_luts(const ImageU8& img,
                                                             const TileGrid& g,
                                                             double clip_limit) {
    std::vector<std::array<std::uint8_t, 256>> luts(size_t(g.ny) * g.nx);
    for (int i = 0; i < g.ny; ++i) {
        for (int j = 0; j < g.nx; ++j) {
            std::array<int, 256> hist{};
            for (int y = g.row0(i); y < g.row1(i); ++y)
                for (int x = g.col0(j); x < g.col1(j); ++x) hist[img.at(y, x)]++;
            const int area = (g.row1(i) - g.row0(i)) * (g.col1(j) - g.col0(j));
            luts[size_t(i) * g.nx + j] = clahe_tile_lut(hist, area, clip_limit);
        }
    }
    return luts;
}

inline ImageU8 clahe(const ImageU8& img, double clip_limit = 5.0, int window_h = 20,
                     int window_w = 20) {
    if (img.c != 1) throw DomainError("clahe: input must be single-channel");
    const TileGrid g = make_tile_grid(img.h, img.w, window_h, window_w);
    const auto luts = clahe_luts(img, g, clip_limit);

    ImageU8 out(img.h, img.w, 1);
    for (int y = 0; y < img.h; ++y) {
        int iy = 0;
        while (iy + 1 < g.ny && g.node_y(iy + 1) <= y) ++iy;
        int iy1 = iy;
        double wy = 0.0;
        if (y < g.node_y(0)) {
            iy = iy1 = 0;
        } else if (iy + 1 < g.ny) {
            iy1 = iy + 1;
            wy = double(y - g.node_y(iy)) / double(g.node_y(iy1) - g.node_y(iy));
        }
        for (int x = 0; x < img.w; ++x) {
            int jx = 0;
            while (jx + 1 < g.nx && g.node_x(jx + 1) <= x) ++jx;
            int jx1 = jx;
            double wx = 0.0;
            if (x < g.node_x(0)) {
                jx = jx1 = 0;
            } else if (jx + 1 < g.nx) {
                jx1 = jx + 1;
                wx = double(x - g.node_x(jx)) / double(g.node_x(jx1) - g.node_x(jx));
            }
            const std::uint8_t v = img.at(y, x);
            const double v00 = luts[size_t(iy) * g.nx + jx][v];
            const double v01 = luts[size_t(iy) * g.nx + jx1][v];
            const double v10 = luts[size_t(iy1) * g.nx + jx][v];
            const double v11 = luts[size_t(iy1) * g.nx + jx1][v];
            const double blend = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                                 wy * ((1.0 - wx) * v10 + wx * v11);
            out.at(y, x) = std::uint8_t(std::clamp((int)std::floor(blend + 0.5), 0, 255));
        }
    }
    return out;
}

}  // namespace ortho::img
