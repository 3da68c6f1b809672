#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ortho/core/image.hpp"
#include "ortho/geom/camera.hpp"
#include "ortho/synth/io.hpp"

namespace ortho::geom {

using synth::PosedArch;

/// ContourMap: 128x256 single channel, tooth-boundary curves in [0,1].
using ContourMap = ImageF;

inline constexpr int kSupersample = 4;

/// Per-pixel products of one rasterization pass at canvas resolution.
struct RenderMaps {
    std::vector<std::int16_t> id;  // argmax visible tooth per pixel, -1 = none
    ImageF coverage;               // fraction of subsamples covered by that tooth
    ImageF shade;                  // mean headlight shade of covered subsamples
    std::vector<ImageF> tooth_mask;  // per tooth: 1 where any subsample visible
    int teeth = 0;
};

namespace detail {

struct ScreenVertex {
    double u = 0.0, v = 0.0, inv_rho = 0.0;
};

/// Z-buffered supersampled rasterization of all posed tooth meshes.
/// Depth is interpolated perspectively via 1/rho; the nearest tooth wins.
inline void rasterize_ids(const PosedArch& arch, const CameraParams& cam,
                          std::vector<std::int16_t>& id_buf, std::vector<float>& w_buf,
                          std::vector<float>& shade_buf) {
    const int sh = cam.canvas_h * kSupersample;
    const int sw = cam.canvas_w * kSupersample;
    id_buf.assign(size_t(sh) * sw, -1);
    w_buf.assign(size_t(sh) * sw, 0.0f);
    shade_buf.assign(size_t(sh) * sw, 0.0f);

    const Vector3d cam_fwd = cam.R.col(2);

    for (size_t ti = 0; ti < arch.groups.size(); ++ti) {
        const auto& mesh = arch.groups[ti].mesh;
        std::vector<ScreenVertex> sv(mesh.vertices.size());
        for (size_t vi = 0; vi < mesh.vertices.size(); ++vi) {
            const Projection p = project_point(mesh.vertices[vi], cam);  // throws if behind
            sv[vi].u = (p.u + 0.5) * kSupersample - 0.5;
            sv[vi].v = (p.v + 0.5) * kSupersample - 0.5;
            sv[vi].inv_rho = 1.0 / p.rho;
        }
        for (const auto& tri : mesh.tris) {
            const ScreenVertex& a = sv[size_t(tri[0])];
            const ScreenVertex& b = sv[size_t(tri[1])];
            const ScreenVertex& c = sv[size_t(tri[2])];

            const double area = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
            if (std::abs(area) < 1e-12) continue;

            const Vector3d e1 = mesh.vertices[size_t(tri[1])] - mesh.vertices[size_t(tri[0])];
            const Vector3d e2 = mesh.vertices[size_t(tri[2])] - mesh.vertices[size_t(tri[0])];
            Vector3d n = e1.cross(e2);
            const double nn = n.norm();
            float shade = 0.75f;
            if (nn > 1e-12) {
                n /= nn;
                shade = float(0.58 + 0.42 * std::abs(n.dot(cam_fwd)));
            }

            const int x0 = std::max(0, int(std::floor(std::min({a.u, b.u, c.u}))));
            const int x1 = std::min(sw - 1, int(std::ceil(std::max({a.u, b.u, c.u}))));
            const int y0 = std::max(0, int(std::floor(std::min({a.v, b.v, c.v}))));
            const int y1 = std::min(sh - 1, int(std::ceil(std::max({a.v, b.v, c.v}))));
            if (x0 > x1 || y0 > y1) continue;

            const double inv_area = 1.0 / area;
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const double px = double(x), py = double(y);
                    const double w0 = ((b.u - px) * (c.v - py) - (b.v - py) * (c.u - px)) * inv_area;
                    const double w1 = ((c.u - px) * (a.v - py) - (c.v - py) * (a.u - px)) * inv_area;
                    const double w2 = 1.0 - w0 - w1;
                    if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                    const float inv_rho =
                        float(w0 * a.inv_rho + w1 * b.inv_rho + w2 * c.inv_rho);
                    const size_t idx = size_t(y) * sw + x;
                    if (inv_rho > w_buf[idx]) {
                        w_buf[idx] = inv_rho;
                        id_buf[idx] = std::int16_t(ti);
                        shade_buf[idx] = shade;
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// Rasterize and reduce to canvas resolution.
inline RenderMaps render_maps(const PosedArch& arch, const CameraParams& cam) {
    std::vector<std::int16_t> id_buf;
    std::vector<float> w_buf, shade_buf;
    detail::rasterize_ids(arch, cam, id_buf, w_buf, shade_buf);

    const int h = cam.canvas_h, w = cam.canvas_w, ss = kSupersample;
    const int sw = w * ss;
    RenderMaps maps;
    maps.teeth = int(arch.groups.size());
    maps.id.assign(size_t(h) * w, -1);
    maps.coverage = ImageF(h, w, 1, 0.0f);
    maps.shade = ImageF(h, w, 1, 0.0f);
    maps.tooth_mask.assign(arch.groups.size(), ImageF(h, w, 1, 0.0f));

    std::vector<int> count(arch.groups.size());
    std::vector<float> shade_sum(arch.groups.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::fill(count.begin(), count.end(), 0);
            std::fill(shade_sum.begin(), shade_sum.end(), 0.0f);
            for (int dy = 0; dy < ss; ++dy) {
                const size_t row = size_t(y * ss + dy) * sw + size_t(x) * ss;
                for (int dx = 0; dx < ss; ++dx) {
                    const std::int16_t id = id_buf[row + dx];
                    if (id >= 0) {
                        count[size_t(id)]++;
                        shade_sum[size_t(id)] += shade_buf[row + dx];
                    }
                }
            }
            int best = -1, best_count = 0;
            for (size_t ti = 0; ti < count.size(); ++ti) {
                if (count[ti] > 0) maps.tooth_mask[ti].at(y, x) = 1.0f;
                if (count[ti] > best_count) {
                    best_count = count[ti];
                    best = int(ti);
                }
            }
            if (best >= 0) {
                maps.id[size_t(y) * w + x] = std::int16_t(best);
                maps.coverage.at(y, x) = float(best_count) / float(ss * ss);
                maps.shade.at(y, x) = shade_sum[size_t(best)] / float(best_count);
            }
        }
    }
    return maps;
}

/// Visible silhouette boundaries of each tooth after mutual depth occlusion.
/// A contour pixel is a tooth-mask pixel with a 4-neighbor outside that
/// tooth's mask; neighbors beyond the canvas count as inside, so clipping at
/// the canvas edge draws no line.
inline ContourMap contours_from_maps(const RenderMaps& maps) {
    const int h = maps.coverage.h, w = maps.coverage.w;
    ContourMap out(h, w, 1, 0.0f);
    for (const auto& mask : maps.tooth_mask) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (mask.at(y, x) <= 0.0f) continue;
                const bool edge = (y > 0 && mask.at(y - 1, x) <= 0.0f) ||
                                  (y + 1 < h && mask.at(y + 1, x) <= 0.0f) ||
                                  (x > 0 && mask.at(y, x - 1) <= 0.0f) ||
                                  (x + 1 < w && mask.at(y, x + 1) <= 0.0f);
                if (edge) out.at(y, x) = 1.0f;
            }
        }
    }
    return out;
}

inline ContourMap render_contours(const PosedArch& arch, const CameraParams& cam) {
    if (arch.groups.empty()) return ContourMap(cam.canvas_h, cam.canvas_w, 1, 0.0f);
    return contours_from_maps(render_maps(arch, cam));
}

inline ContourMap render_contours(const synth::ToothArch& arch, const CameraParams& cam) {
    return render_contours(synth::pose_arch(arch), cam);
}

/// Result of registering one pre/post arch pair onto a face.
struct PairedContours {
    ContourMap pre;
    ContourMap post;
    ImageF oral_mask;
    CameraParams cam;
    bool converged = false;
};

inline Correspondences landmark_correspondences(const synth::CuspLandmarks& lm3d,
                                                const synth::MouthLandmarks2d& lm2d,
                                                const Rect& mouth_box) {
    Correspondences corr;
    for (int k = 0; k < 4; ++k) {
        corr.M[size_t(k)] = lm3d.points[size_t(k)];
        corr.m[size_t(k)] = Vector2d(lm2d[size_t(k)].x - mouth_box.x,
                                     lm2d[size_t(k)].y - mouth_box.y);
    }
    return corr;
}

/// Solve one camera from the pre-arch cusps against the face annotations,
/// then render both arches with that same camera.
inline PairedContours make_paired_contours(const synth::ToothArch& pre,
                                           const synth::ToothArch& post,
                                           const synth::FaceSurrogate& face) {
    if (pre.teeth.size() != post.teeth.size())
        throw StructuralError("make_paired_contours: arches differ in tooth count");
    for (size_t i = 0; i < pre.teeth.size(); ++i)
        if (!(pre.teeth[i].id == post.teeth[i].id))
            throw StructuralError("make_paired_contours: tooth_id mismatch at index " +
                                  std::to_string(i));

    const Correspondences corr =
        landmark_correspondences(synth::cusp_landmarks(pre), face.landmarks_2d, face.mouth_box);
    const SolveResult solved = solve_camera(corr, make_initial_camera(corr));

    PairedContours out;
    out.cam = solved.cam;
    out.converged = solved.converged;
    out.pre = render_contours(pre, solved.cam);
    out.post = render_contours(post, solved.cam);
    out.oral_mask = face.oral_mask;
    return out;
}

inline void write_camera_json(const std::string& path, const CameraParams& cam,
                              bool converged, double error_px2) {
    Eigen::AngleAxisd aa(cam.R);
    const Vector3d axis_angle = aa.angle() * aa.axis();
    json j;
    j["focal"] = cam.focal;
    j["principal"] = {cam.principal.x(), cam.principal.y()};
    j["axis_angle"] = {axis_angle.x(), axis_angle.y(), axis_angle.z()};
    j["C"] = {cam.C.x(), cam.C.y(), cam.C.z()};
    j["canvas"] = {cam.canvas_h, cam.canvas_w};
    j["converged"] = converged;
    j["error_px2"] = error_px2;
    save_json(path, j);
}

inline CameraParams read_camera_json(const std::string& path) {
    const json j = load_json(path);
    CameraParams cam;
    cam.focal = j.at("focal").get<double>();
    cam.principal = Vector2d(j.at("principal").at(0).get<double>(),
                             j.at("principal").at(1).get<double>());
    const Vector3d theta(j.at("axis_angle").at(0).get<double>(),
                         j.at("axis_angle").at(1).get<double>(),
                         j.at("axis_angle").at(2).get<double>());
    cam.R = detail::rotation_from_axis_angle(theta);
    cam.C = Vector3d(j.at("C").at(0).get<double>(), j.at("C").at(1).get<double>(),
                     j.at("C").at(2).get<double>());
    cam.canvas_h = j.at("canvas").at(0).get<int>();
    cam.canvas_w = j.at("canvas").at(1).get<int>();
    return cam;
}

}  // namespace ortho::geom
