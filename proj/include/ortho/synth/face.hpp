#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ortho/core/image.hpp"
#include "ortho/core/rng.hpp"

namespace ortho::synth {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

/// Named 2D cusp annotations, same order as CuspLandmarks:
/// central L, central R, lateral L, lateral R. Face pixel coordinates.
using MouthLandmarks2d = std::array<Vec2, 4>;

struct FaceSurrogate {
    ImageU8 image;              // 512x512 RGB
    Rect mouth_box;             // 256x128, integer-aligned, inside the image
    ImageF oral_mask;           // 128x256 binary, mouth-box crop coordinates
    MouthLandmarks2d landmarks_2d;
    std::array<float, 3> skin_tone{};  // RGB in [0,1]

    // Generator-side ground truth used for dataset labels and tests.
    Vec2 cavity_center;         // face coordinates
    double cavity_rx = 0.0, cavity_ry = 0.0;
};

inline const std::vector<std::array<float, 3>>& skin_palette() {
    static const std::vector<std::array<float, 3>> p = {
        {0.96f, 0.86f, 0.78f}, {0.94f, 0.80f, 0.70f}, {0.92f, 0.76f, 0.65f},
        {0.89f, 0.72f, 0.60f}, {0.86f, 0.68f, 0.55f}, {0.83f, 0.64f, 0.50f},
        {0.78f, 0.58f, 0.45f}, {0.73f, 0.53f, 0.40f}, {0.68f, 0.48f, 0.36f},
        {0.62f, 0.43f, 0.31f}, {0.56f, 0.38f, 0.27f}, {0.50f, 0.33f, 0.23f},
        {0.44f, 0.29f, 0.20f}, {0.38f, 0.25f, 0.17f}, {0.33f, 0.21f, 0.14f},
        {0.28f, 0.18f, 0.12f},
    };
    return p;
}

/// Tooth enamel color used when teeth are composited into a surrogate mouth.
/// Deliberately tinted by the skin tone so tooth color carries a learnable
/// skin-color signal.
inline std::array<float, 3> tooth_base_color(const std::array<float, 3>& skin) {
    const std::array<float, 3> ivory = {0.93f, 0.90f, 0.84f};
    std::array<float, 3> c{};
    for (int k = 0; k < 3; ++k) c[size_t(k)] = 0.62f * ivory[size_t(k)] + 0.38f * skin[size_t(k)];
    return c;
}

/// Procedural stand-in for a standardized facial photograph: flat skin field,
/// schematic eyes and nose shadow, an elliptical lip annulus and a dark oral
/// cavity. Deterministic per seed.
inline FaceSurrogate gen_face_surrogate(std::uint64_t seed) {
    Rng rng(substream_seed(seed, "dentsynth/face"));
    FaceSurrogate face;

    const auto& palette = skin_palette();
    const auto skin = palette[size_t(rng.below(palette.size()))];
    face.skin_tone = skin;

    const double cx = 256.0 + rng.uniform(-10.0, 10.0);
    const double cy = 340.0 + rng.uniform(-8.0, 8.0);
    const double rx = rng.uniform(68.0, 92.0);
    const double ry = rng.uniform(26.0, 38.0);
    const double lip_tx = rng.uniform(10.0, 16.0);
    const double lip_ty = rng.uniform(9.0, 14.0);
    face.cavity_center = {cx, cy};
    face.cavity_rx = rx;
    face.cavity_ry = ry;

    const float cav_scale = float(rng.uniform(0.85, 1.1));
    const std::array<float, 3> cavity = {0.11f * cav_scale, 0.05f * cav_scale, 0.055f * cav_scale};
    std::array<float, 3> lip{};
    for (int k = 0; k < 3; ++k) lip[size_t(k)] = 0.55f * skin[size_t(k)];
    lip[0] += 0.28f;
    lip[1] += 0.06f;
    lip[2] += 0.09f;

    face.image = ImageU8(kFaceSize, kFaceSize, 3);
    auto put = [&](int y, int x, const std::array<float, 3>& c, float gain) {
        for (int k = 0; k < 3; ++k) {
            const float v = std::clamp(c[size_t(k)] * gain, 0.0f, 1.0f);
            face.image.at(y, x, k) = std::uint8_t(v * 255.0f + 0.5f);
        }
    };

    const double eye_y = 190.0, eye_dx = 86.0;
    for (int y = 0; y < kFaceSize; ++y) {
        for (int x = 0; x < kFaceSize; ++x) {
            const float grad = 1.0f - 0.10f * float(y) / float(kFaceSize);
            const double mx = (x - cx), my = (y - cy);
            const double q_in = (mx * mx) / (rx * rx) + (my * my) / (ry * ry);
            const double q_out = (mx * mx) / ((rx + lip_tx) * (rx + lip_tx)) +
                                 (my * my) / ((ry + lip_ty) * (ry + lip_ty));
            if (q_in <= 1.0) {
                put(y, x, cavity, 1.0f);
            } else if (q_out <= 1.0) {
                put(y, x, lip, grad);
            } else {
                const double el = ((x - 256.0 + eye_dx) * (x - 256.0 + eye_dx)) / (22.0 * 22.0) +
                                  ((y - eye_y) * (y - eye_y)) / (11.0 * 11.0);
                const double er = ((x - 256.0 - eye_dx) * (x - 256.0 - eye_dx)) / (22.0 * 22.0) +
                                  ((y - eye_y) * (y - eye_y)) / (11.0 * 11.0);
                const double nose = ((x - 256.0) * (x - 256.0)) / (14.0 * 14.0) +
                                    ((y - 276.0) * (y - 276.0)) / (26.0 * 26.0);
                if (el <= 1.0 || er <= 1.0)
                    put(y, x, {0.15f, 0.11f, 0.09f}, 1.0f);
                else if (nose <= 1.0)
                    put(y, x, skin, grad * 0.90f);
                else
                    put(y, x, skin, grad);
            }
        }
    }

    face.mouth_box = Rect{int(std::lround(cx)) - kMapW / 2, int(std::lround(cy)) - kMapH / 2,
                          kMapW, kMapH};

    face.oral_mask = ImageF(kMapH, kMapW, 1, 0.0f);
    for (int y = 0; y < kMapH; ++y) {
        for (int x = 0; x < kMapW; ++x) {
            const double fx = face.mouth_box.x + x, fy = face.mouth_box.y + y;
            const double q = ((fx - cx) * (fx - cx)) / (rx * rx) + ((fy - cy) * (fy - cy)) / (ry * ry);
            if (q <= 1.0) face.oral_mask.at(y, x) = 1.0f;
        }
    }

    // 2D cusp annotations: where the incisor tips of a plausible upper row
    // would sit. The per-point jitter stands in for manual annotation noise.
    const double px_per_mm = (2.0 * rx * 0.92) / 48.0;
    const double y_cen = cy - 0.03 * ry + rng.uniform(-1.5, 1.5);
    const double y_lat = y_cen - 1.0 * px_per_mm + rng.uniform(-1.5, 1.5);
    auto jitter = [&]() { return rng.uniform(-1.5, 1.5); };
    face.landmarks_2d = {
        Vec2{cx - 4.3 * px_per_mm + jitter(), y_cen},
        Vec2{cx + 4.3 * px_per_mm + jitter(), y_cen + rng.uniform(-1.0, 1.0)},
        Vec2{cx - 11.7 * px_per_mm + jitter(), y_lat},
        Vec2{cx + 11.7 * px_per_mm + jitter(), y_lat + rng.uniform(-1.0, 1.0)},
    };
    return face;
}

}  // namespace ortho::synth
