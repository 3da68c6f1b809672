#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <limits>

#include "ortho/core/error.hpp"
#include "ortho/core/image.hpp"

namespace ortho::geom {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

inline constexpr double kDefaultFocal = 213.33;  // pixels

/// Pinhole camera: a world point M maps to pixel m through
///   rho * (u, v, 1)^T = (K R^T | -K R^T C) (M; 1),
/// i.e. camera-frame coordinates are X = R^T (M - C) and rho = X_z.
/// R's columns are the camera axes in world coordinates (x right, y down,
/// z forward), C is the camera position in millimeters.
struct CameraParams {
    double focal = kDefaultFocal;
    Vector2d principal = Vector2d(kMapW / 2.0, kMapH / 2.0);
    Matrix3d R = Matrix3d::Identity();
    Vector3d C = Vector3d::Zero();
    int canvas_h = kMapH;
    int canvas_w = kMapW;

    Matrix3d K() const {
        Matrix3d k;
        k << focal, 0.0, principal.x(), 0.0, focal, principal.y(), 0.0, 0.0, 1.0;
        return k;
    }
};

struct Projection {
    double u = 0.0, v = 0.0;
    double rho = 0.0;  // projection depth
};

inline Projection project_point(const Vector3d& M, const CameraParams& cam) {
    const Vector3d X = cam.R.transpose() * (M - cam.C);
    if (X.z() <= 1e-9)
        throw GeometryError("project_point: point at or behind the camera plane");
    Projection p;
    p.rho = X.z();
    p.u = cam.focal * X.x() / X.z() + cam.principal.x();
    p.v = cam.focal * X.y() / X.z() + cam.principal.y();
    return p;
}

/// Four 3D<->2D cusp correspondences used for coarse registration.
struct Correspondences {
    std::array<Vector3d, 4> M;  // arch-frame mm
    std::array<Vector2d, 4> m;  // pixel coordinates in the render canvas
};

struct SolveResult {
    CameraParams cam;
    bool converged = false;
    double error_px2 = 0.0;  // mean squared reprojection error, px^2
    int steps = 0;
};

struct SolveOptions {
    double tolerance_px2 = 0.25;
    int max_steps = 10000;
    double lr = 0.01;
    double lr_decay = 0.9;
    int lr_decay_every = 500;
};

namespace detail {

inline bool collinear(const std::array<Vector3d, 4>& pts) {
    double scale2 = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            scale2 = std::max(scale2, (pts[size_t(i)] - pts[size_t(j)]).squaredNorm());
    if (scale2 <= 0.0) return true;
    double max_area = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k) {
                const Vector3d a = pts[size_t(j)] - pts[size_t(i)];
                const Vector3d b = pts[size_t(k)] - pts[size_t(i)];
                max_area = std::max(max_area, 0.5 * a.cross(b).norm());
            }
    return max_area < 1e-9 * scale2;
}

inline Matrix3d skew(const Vector3d& v) {
    Matrix3d s;
    s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return s;
}

inline Matrix3d rotation_from_axis_angle(const Vector3d& theta) {
    const double angle = theta.norm();
    if (angle < 1e-14) return Matrix3d::Identity() + skew(theta);
    return Eigen::AngleAxisd(angle, theta / angle).toRotationMatrix();
}

/// dR/dtheta_i for the axis-angle parameterization (Gallego & Yezzi form),
/// with the first-order limit near theta = 0.
inline Matrix3d rotation_derivative(const Vector3d& theta, const Matrix3d& R, int i) {
    const double angle2 = theta.squaredNorm();
    Vector3d e = Vector3d::Zero();
    e[i] = 1.0;
    if (angle2 < 1e-14) return skew(e);
    const Vector3d w = theta.cross((Matrix3d::Identity() - R) * e);
    return ((theta[i] * skew(theta) + skew(w)) / angle2) * R;
}

}  // namespace detail

/// Heuristic front-on initialization: depth from the spread ratio of the
/// correspondences, lateral position from centering the projection.
inline CameraParams make_initial_camera(const Correspondences& corr,
                                        double focal = kDefaultFocal) {
    CameraParams cam;
    cam.focal = focal;
    Vector3d c3 = Vector3d::Zero();
    Vector2d c2 = Vector2d::Zero();
    for (int i = 0; i < 4; ++i) {
        c3 += corr.M[size_t(i)];
        c2 += corr.m[size_t(i)];
    }
    c3 /= 4.0;
    c2 /= 4.0;
    double s3 = 0.0, s2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        s3 += (corr.M[size_t(i)] - c3).squaredNorm();
        s2 += (corr.m[size_t(i)] - c2).squaredNorm();
    }
    const double spread3 = std::sqrt(s3 / 4.0);
    const double spread2 = std::sqrt(s2 / 4.0);
    double depth = 100.0;
    if (spread2 > 1e-9 && spread3 > 1e-9) depth = focal * spread3 / spread2;
    depth = std::clamp(depth, 20.0, 400.0);

    cam.R = Matrix3d::Identity();
    cam.C = Vector3d(c3.x() - (c2.x() - cam.principal.x()) * depth / focal,
                     c3.y() - (c2.y() - cam.principal.y()) * depth / focal,
                     c3.z() - depth);
    return cam;
}

/// Gradient-descent coarse registration over (R as axis-angle, C) with the
/// focal and principal point held fixed. Internally the residuals are
/// focal-normalized and C is expressed in 100 mm units so one learning rate
/// serves both parameter blocks; the reported error and the stopping
/// tolerance stay in px^2.
inline SolveResult solve_camera(const Correspondences& corr, const CameraParams& init,
                                const SolveOptions& opt = {}) {
    if (detail::collinear(corr.M))
        throw GeometryError("solve_camera: landmark points are collinear");
    for (const auto& m : corr.m) {
        if (m.x() < 0.0 || m.x() > init.canvas_w || m.y() < 0.0 || m.y() > init.canvas_h)
            throw DomainError("solve_camera: 2D landmark outside the canvas");
    }

    const double f = init.focal;
    const double c_scale = 100.0;  // mm per position unit

    Eigen::AngleAxisd aa(init.R);
    Vector3d theta = aa.angle() * aa.axis();
    Vector3d c_hat = init.C / c_scale;

    SolveResult best;
    best.cam = init;
    best.error_px2 = std::numeric_limits<double>::infinity();

    double lr = opt.lr;
    int step = 0;
    for (;; ++step) {
        const Matrix3d R = detail::rotation_from_axis_angle(theta);
        const Vector3d C = c_scale * c_hat;

        Matrix3d dR[3];
        for (int k = 0; k < 3; ++k) dR[k] = detail::rotation_derivative(theta, R, k);

        double loss_norm = 0.0;
        Vector3d g_theta = Vector3d::Zero();
        Vector3d g_chat = Vector3d::Zero();
        bool in_front = true;
        for (int i = 0; i < 4; ++i) {
            const Vector3d p = corr.M[size_t(i)] - C;
            const Vector3d X = R.transpose() * p;
            if (X.z() <= 1e-6) {
                in_front = false;
                break;
            }
            const double inv_z = 1.0 / X.z();
            const double eu = X.x() * inv_z - (corr.m[size_t(i)].x() - init.principal.x()) / f;
            const double ev = X.y() * inv_z - (corr.m[size_t(i)].y() - init.principal.y()) / f;
            loss_norm += eu * eu + ev * ev;

            const Vector3d deu_dX(inv_z, 0.0, -X.x() * inv_z * inv_z);
            const Vector3d dev_dX(0.0, inv_z, -X.y() * inv_z * inv_z);
            const Vector3d dX = 2.0 * (eu * deu_dX + ev * dev_dX) / 4.0;

            for (int k = 0; k < 3; ++k) g_theta[k] += dX.dot(dR[k].transpose() * p);
            g_chat += -c_scale * (R * dX);
        }

        if (in_front) {
            loss_norm /= 4.0;
            const double loss_px2 = loss_norm * f * f;
            if (loss_px2 < best.error_px2) {
                best.error_px2 = loss_px2;
                best.cam = init;
                best.cam.R = R;
                best.cam.C = C;
            }
            if (loss_px2 < opt.tolerance_px2) {
                best.converged = true;
                break;
            }
        }
        if (step >= opt.max_steps) break;
        if (!in_front) {
            // back off toward the initial distance rather than stepping blind
            c_hat.z() -= 0.05;
            continue;
        }
        theta -= lr * g_theta;
        c_hat -= lr * g_chat;
        if ((step + 1) % opt.lr_decay_every == 0) lr *= opt.lr_decay;
    }
    best.steps = step;
    return best;
}

/// Mean squared reprojection error in px^2 (the solver's objective).
inline double reprojection_error_px2(const Correspondences& corr, const CameraParams& cam) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Projection p = project_point(corr.M[size_t(i)], cam);
        const double du = p.u - corr.m[size_t(i)].x();
        const double dv = p.v - corr.m[size_t(i)].y();
        acc += du * du + dv * dv;
    }
    return acc / 4.0;
}

}  // namespace ortho::geom
