#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ortho/core/error.hpp"
#include "ortho/core/rng.hpp"
#include "ortho/synth/tooth_mesh.hpp"

namespace ortho::synth {

// Arch-local frame, millimeters: x runs to the image right, y points down
// (crowns extend +y from the gum line at y=0), z runs away from the camera.

enum class ToothType { Central, Lateral, Canine, Premolar1, Premolar2, Molar1 };

/// One of the 12 modeled positions of the upper row; L = negative x.
struct ToothId {
    ToothType type;
    bool left;

    std::string name() const {
        static const char* base[] = {"central_incisor", "lateral_incisor", "canine",
                                     "first_premolar", "second_premolar", "first_molar"};
        return std::string(base[int(type)]) + (left ? "_l" : "_r");
    }
    friend bool operator==(const ToothId& a, const ToothId& b) {
        return a.type == b.type && a.left == b.left;
    }
};

struct RigidPose {
    Matrix3d rot = Matrix3d::Identity();
    Vector3d t = Vector3d::Zero();

    Vector3d apply(const Vector3d& p) const { return rot * p + t; }
};

struct Tooth {
    ToothId id;
    TriMesh mesh;      // crown-local millimeters
    RigidPose pose;    // current pose (perturbed for severity > 0)
    RigidPose nominal; // slot pose the treatment restores
};

/// Parabolic dental arch curve z(x) = x^2 / (2 p), |x| <= half_span.
struct ArchCurve {
    double p = 14.0;
    double half_span = 25.0;
    double z(double x) const { return x * x / (2.0 * p); }
    double dz(double x) const { return x / p; }
};

struct ToothArch {
    std::vector<Tooth> teeth;
    ArchCurve curve;
    double severity = 0.0;
    std::uint64_t seed = 0;
};

struct CuspLandmarks {
    // Order: central L, central R, lateral L, lateral R (arch-local mm).
    std::array<Vector3d, 4> points;
    static const std::array<const char*, 4>& names() {
        static const std::array<const char*, 4> n = {"cusp_central_l", "cusp_central_r",
                                                     "cusp_lateral_l", "cusp_lateral_r"};
        return n;
    }
};

namespace detail {

struct TypeSpec {
    double w, h, d;        // mesiodistal, crown length, buccolingual (mm)
    double exp_plan, exp_vert;
};

inline const std::array<TypeSpec, 6>& type_specs() {
    static const std::array<TypeSpec, 6> s = {{
        {8.5, 10.5, 7.0, 4.0, 2.8},  // central incisor
        {6.6, 9.5, 6.5, 3.5, 2.6},   // lateral incisor
        {7.6, 10.0, 7.5, 2.8, 2.2},  // canine
        {7.0, 8.0, 8.5, 3.0, 2.5},   // first premolar
        {6.6, 7.5, 8.5, 3.0, 2.5},   // second premolar
        {10.0, 7.0, 10.5, 3.5, 3.0}, // first molar
    }};
    return s;
}

/// Arc length along the parabola from 0 to x (midpoint rule, 200 slices).
inline double arc_length(const ArchCurve& c, double x) {
    const int n = 200;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double xm = x * (double(i) + 0.5) / double(n);
        s += std::sqrt(1.0 + c.dz(xm) * c.dz(xm));
    }
    return s * x / double(n);
}

/// Invert arc length by bisection.
inline double x_at_arc_length(const ArchCurve& c, double s) {
    double lo = 0.0, hi = c.half_span * 1.5;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (arc_length(c, mid) < s ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline Matrix3d yaw_rotation(double yaw) {
    Matrix3d r;
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    // rotation about the (vertical) y axis
    r << cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy;
    return r;
}

}  // namespace detail

/// Deterministically generate a 12-tooth upper arch. Crown shapes vary per
/// seed (mirrored L/R so severity-0 arches are exactly symmetric); poses are
/// nominal slots displaced by perturbations whose magnitudes scale linearly
/// with `severity`.
inline ToothArch gen_arch(std::uint64_t seed, double severity) {
    if (!(severity >= 0.0 && severity <= 1.0))
        throw DomainError("gen_arch: severity must lie in [0,1]");

    ToothArch arch;
    arch.curve = ArchCurve{};
    arch.severity = severity;
    arch.seed = seed;

    // Per-type shape jitter, shared by the L/R pair of each type.
    Rng shape_rng(substream_seed(seed, "dentsynth/mesh"));
    std::array<CrownShape, 6> shapes;
    for (int ty = 0; ty < 6; ++ty) {
        const auto& sp = detail::type_specs()[size_t(ty)];
        CrownShape cs;
        cs.half_w = 0.5 * sp.w * shape_rng.uniform(0.94, 1.06);
        cs.half_h = 0.5 * sp.h * shape_rng.uniform(0.94, 1.06);
        cs.half_d = 0.5 * sp.d * shape_rng.uniform(0.94, 1.06);
        cs.exp_plan = sp.exp_plan * shape_rng.uniform(0.9, 1.1);
        cs.exp_vert = sp.exp_vert * shape_rng.uniform(0.9, 1.1);
        shapes[size_t(ty)] = cs;
    }

    // Slot stations by cumulative arc length from the midline, small gaps
    // between neighbouring crowns.
    const double gap = 0.4;
    std::array<double, 6> station_x{};
    double s = 0.0;
    for (int ty = 0; ty < 6; ++ty) {
        const double w = 2.0 * shapes[size_t(ty)].half_w;
        station_x[size_t(ty)] = detail::x_at_arc_length(arch.curve, s + 0.5 * w);
        s += w + gap;
    }

    Rng pose_rng(substream_seed(seed, "dentsynth/pose"));
    for (int ty = 0; ty < 6; ++ty) {
        for (int side = 0; side < 2; ++side) {
            const bool left = (side == 0);
            const double sign = left ? -1.0 : 1.0;
            const auto& cs = shapes[size_t(ty)];

            Tooth tooth;
            tooth.id = ToothId{ToothType(ty), left};
            tooth.mesh = make_crown_mesh(cs);

            const double x = sign * station_x[size_t(ty)];
            const double slot_yaw = -std::atan(arch.curve.dz(x));
            tooth.nominal.rot = detail::yaw_rotation(slot_yaw);
            tooth.nominal.t = Vector3d(x, cs.half_h, arch.curve.z(x));

            // Unit perturbation draws are severity-independent, so the same
            // seed yields the same arch family across severities.
            const double u_yaw = pose_rng.uniform(-1.0, 1.0);
            const double ang = pose_rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            const double rad = std::sqrt(pose_rng.uniform());
            const double u_x = rad * std::cos(ang), u_z = rad * std::sin(ang);
            const double u_y = pose_rng.uniform(-1.0, 1.0);

            if (severity == 0.0) {
                tooth.pose = tooth.nominal;
            } else {
                const double yaw_max = 25.0 * 3.14159265358979323846 / 180.0;
                tooth.pose.rot = detail::yaw_rotation(slot_yaw + severity * yaw_max * u_yaw);
                tooth.pose.t = tooth.nominal.t +
                               Vector3d(3.0 * severity * u_x, 1.5 * severity * u_y,
                                        3.0 * severity * u_z);
            }
            arch.teeth.push_back(std::move(tooth));
        }
    }
    return arch;
}

/// Synthetic treatment plan: snap every tooth back to its nominal slot.
/// Meshes are untouched; the input arch is not modified.
inline ToothArch apply_treatment(const ToothArch& arch) {
    ToothArch out = arch;
    out.severity = 0.0;
    for (auto& tooth : out.teeth) tooth.pose = tooth.nominal;
    return out;
}

/// Incisal-tip landmarks of the four incisors, in posed arch coordinates.
/// The tip is the exact +y pole vertex of the crown mesh, so each landmark
/// lies on its mesh surface and moves rigidly with the tooth pose.
inline CuspLandmarks cusp_landmarks(const ToothArch& arch) {
    CuspLandmarks lm;
    const ToothId wanted[4] = {{ToothType::Central, true},
                               {ToothType::Central, false},
                               {ToothType::Lateral, true},
                               {ToothType::Lateral, false}};
    for (int k = 0; k < 4; ++k) {
        const Tooth* found = nullptr;
        for (const auto& t : arch.teeth)
            if (t.id == wanted[k]) found = &t;
        if (!found)
            throw StructuralError("cusp_landmarks: arch lacks " + wanted[k].name());
        // mesh vertex 1 is the +y (incisal) pole by construction
        lm.points[size_t(k)] = found->pose.apply(found->mesh.vertices[1]);
    }
    return lm;
}

}  // namespace ortho::synth
