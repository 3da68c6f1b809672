#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ortho/core/image.hpp"
#include "ortho/core/rng.hpp"
#include "ortho/img/clahe.hpp"
#include "ortho/synth/face.hpp"

namespace ortho::img {

/// HighlightMap / SkinColorMap / MaskedNoise are all 128x256 float maps;
/// see the functions below for their invariants.
using HighlightMap = ImageF;
using SkinColorMap = ImageF;
using MaskedNoise = ImageF;

inline ImageU8 luminance_u8(const ImageF& rgb) {
    ImageU8 out(rgb.h, rgb.w, 1);
    for (int y = 0; y < rgb.h; ++y)
        for (int x = 0; x < rgb.w; ++x) {
            const float l =
                0.299f * rgb.at(y, x, 0) + 0.587f * rgb.at(y, x, 1) + 0.114f * rgb.at(y, x, 2);
            out.at(y, x) = std::uint8_t(std::clamp(l, 0.0f, 1.0f) * 255.0f + 0.5f);
        }
    return out;
}

/// Intra-oral highlight detection: luminance -> CLAHE (clip 5, 20x20) ->
/// binary threshold, confined to the oral mask.
inline HighlightMap extract_highlights(const ImageF& mouth_rgb, const ImageF& mask,
                                       double threshold = 0.9, double clip_limit = 5.0,
                                       int window = 20) {
    require_map_shape(mouth_rgb, 3, "extract_highlights mouth");
    require_map_shape(mask, 1, "extract_highlights mask");
    bool any = false;
    for (float m : mask.v)
        if (m > 0.0f) {
            any = true;
            break;
        }
    if (!any) throw DomainError("extract_highlights: empty oral mask");

    const ImageU8 eq = clahe(luminance_u8(mouth_rgb), clip_limit, window, window);
    HighlightMap out(mask.h, mask.w, 1, 0.0f);
    for (int y = 0; y < mask.h; ++y)
        for (int x = 0; x < mask.w; ++x)
            if (mask.at(y, x) > 0.0f && double(eq.at(y, x)) / 255.0 >= threshold)
                out.at(y, x) = 1.0f;
    return out;
}

/// Mean RGB over two cheek bands flanking the mouth box, broadcast to a
/// constant 128x256x3 map.
inline SkinColorMap extract_skin_color(const synth::FaceSurrogate& face) {
    const Rect& b = face.mouth_box;
    if (!b.inside(face.image.w, face.image.h))
        throw DomainError("extract_skin_color: mouth box outside face");

    double sum[3] = {0.0, 0.0, 0.0};
    long count = 0;
    auto accumulate = [&](int x0, int x1) {
        x0 = std::max(0, x0);
        x1 = std::min(face.image.w, x1);
        for (int y = b.y; y < b.y + b.h; ++y)
            for (int x = x0; x < x1; ++x) {
                for (int k = 0; k < 3; ++k) sum[k] += double(face.image.at(y, x, k)) / 255.0;
                ++count;
            }
    };
    accumulate(b.x - 60, b.x - 20);
    accumulate(b.x + b.w + 20, b.x + b.w + 60);
    if (count == 0) throw DomainError("extract_skin_color: no cheek pixels beside mouth box");

    SkinColorMap out(kMapH, kMapW, 3);
    for (int y = 0; y < kMapH; ++y)
        for (int x = 0; x < kMapW; ++x)
            for (int k = 0; k < 3; ++k) out.at(y, x, k) = float(sum[k] / double(count));
    return out;
}

/// I.i.d. standard normal noise inside the mask, exact zero outside;
/// deterministic per seed.
inline MaskedNoise masked_gaussian(const ImageF& mask, std::uint64_t seed) {
    require_map_shape(mask, 1, "masked_gaussian mask");
    Rng rng(substream_seed(seed, "imgproc/noise"));
    MaskedNoise out(mask.h, mask.w, 1, 0.0f);
    for (int y = 0; y < mask.h; ++y)
        for (int x = 0; x < mask.w; ++x)
            if (mask.at(y, x) > 0.0f) out.at(y, x) = float(rng.normal());
    return out;
}

/// Crop the mouth box region of a face to a float RGB map.
inline ImageF crop_mouth(const ImageU8& face_img, const Rect& box) {
    if (!box.inside(face_img.w, face_img.h)) throw DomainError("crop_mouth: box outside image");
    ImageF out(box.h, box.w, face_img.c);
    for (int y = 0; y < box.h; ++y)
        for (int x = 0; x < box.w; ++x)
            for (int k = 0; k < face_img.c; ++k)
                out.at(y, x, k) = float(face_img.at(box.y + y, box.x + x, k)) / 255.0f;
    return out;
}

/// Paste `generated` into the face through the mouth box, replacing only
/// in-mask pixels; everything else stays bit-equal to the input face.
inline ImageU8 composite(const ImageU8& face_img, const Rect& box, const ImageF& generated,
                         const ImageF& mask) {
    if (!box.inside(face_img.w, face_img.h)) throw DomainError("composite: box outside image");
    if (generated.h != box.h || generated.w != box.w || generated.c != 3)
        throw DomainError("composite: generated region must match the mouth box");
    if (mask.h != box.h || mask.w != box.w || mask.c != 1)
        throw DomainError("composite: mask must match the mouth box");

    ImageU8 out = face_img;
    for (int y = 0; y < box.h; ++y)
        for (int x = 0; x < box.w; ++x) {
            if (mask.at(y, x) <= 0.0f) continue;
            for (int k = 0; k < 3; ++k) {
                const float v = std::clamp(generated.at(y, x, k), 0.0f, 1.0f);
                out.at(box.y + y, box.x + x, k) = std::uint8_t(v * 255.0f + 0.5f);
            }
        }
    return out;
}

inline ImageU8 composite(const synth::FaceSurrogate& face, const ImageF& generated,
                         const ImageF& mask) {
    return composite(face.image, face.mouth_box, generated, mask);
}

}  // namespace ortho::img
