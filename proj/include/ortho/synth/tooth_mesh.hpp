#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "ortho/core/rng.hpp"

namespace ortho::synth {

using Eigen::Matrix3d;
using Eigen::Vector3d;

struct TriMesh {
    std::vector<Vector3d> vertices;
    std::vector<std::array<int, 3>> tris;
};

/// Superellipsoid crown parameters in tooth-local millimeters. The local
/// frame is centered on the crown: x mesiodistal, y vertical (+y toward the
/// incisal tip), z buccolingual.
struct CrownShape {
    double half_w = 4.0;   // mesiodistal semi-axis
    double half_h = 5.0;   // vertical semi-axis
    double half_d = 3.5;   // buccolingual semi-axis
    double exp_plan = 4.0; // exponent in the x/z plane (higher = squarer)
    double exp_vert = 2.6; // vertical exponent
};

inline double signed_pow(double s, double e) {
    return (s < 0 ? -1.0 : 1.0) * std::pow(std::abs(s), e);
}

/// Point on the superellipsoid surface for unit direction (sx, sy, sz).
inline Vector3d crown_surface_point(const CrownShape& cs, double sx, double sy, double sz) {
    return {cs.half_w * signed_pow(sx, 2.0 / cs.exp_plan),
            cs.half_h * signed_pow(sy, 2.0 / cs.exp_vert),
            cs.half_d * signed_pow(sz, 2.0 / cs.exp_plan)};
}

/// Closed lat/long triangulation of the crown. Poles sit on the y axis, so
/// the incisal tip is the exact vertex at (0, +half_h, 0).
inline TriMesh make_crown_mesh(const CrownShape& cs, int n_lat = 13, int n_lon = 18) {
    TriMesh m;
    const double pi = 3.14159265358979323846;
    // pole 0: gum-side (-y); pole 1: incisal tip (+y)
    m.vertices.push_back(crown_surface_point(cs, 0.0, -1.0, 0.0));
    m.vertices.push_back(crown_surface_point(cs, 0.0, 1.0, 0.0));
    for (int i = 1; i < n_lat; ++i) {
        const double theta = pi * double(i) / double(n_lat);  // from -y pole
        const double sy = -std::cos(theta);
        const double sr = std::sin(theta);
        for (int j = 0; j < n_lon; ++j) {
            const double phi = 2.0 * pi * double(j) / double(n_lon);
            m.vertices.push_back(crown_surface_point(cs, sr * std::cos(phi), sy, sr * std::sin(phi)));
        }
    }
    auto ring = [&](int i, int j) { return 2 + (i - 1) * n_lon + (j % n_lon); };
    for (int j = 0; j < n_lon; ++j) {
        m.tris.push_back({0, ring(1, j + 1), ring(1, j)});
        m.tris.push_back({1, ring(n_lat - 1, j), ring(n_lat - 1, j + 1)});
    }
    for (int i = 1; i + 1 < n_lat; ++i) {
        for (int j = 0; j < n_lon; ++j) {
            const int a = ring(i, j), b = ring(i, j + 1);
            const int c0 = ring(i + 1, j), d = ring(i + 1, j + 1);
            m.tris.push_back({a, b, d});
            m.tris.push_back({a, d, c0});
        }
    }
    return m;
}

inline double triangle_area(const TriMesh& m, const std::array<int, 3>& t) {
    const Vector3d e1 = m.vertices[t[1]] - m.vertices[t[0]];
    const Vector3d e2 = m.vertices[t[2]] - m.vertices[t[0]];
    return 0.5 * e1.cross(e2).norm();
}

}  // namespace ortho::synth
