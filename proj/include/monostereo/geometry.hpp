#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "monostereo/errors.hpp"
#include "monostereo/image.hpp"

namespace monostereo {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
    }
};

/// Pinhole camera; focal length and principal point in pixels.
struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
               cx < width && cy >= 0.0 && cy < height;
    }

    /// Camera-frame point (z > 0) to pixel coordinates.
    void project(const Vec3& p, double& u, double& v) const {
        u = fx * p.x / p.z + cx;
        v = fy * p.y / p.z + cy;
    }

    /// Pixel plus depth back to a camera-frame point.
    Vec3 back_project(double u, double v, double z) const {
        return {(u - cx) * z / fx, (v - cy) * z / fy, z};
    }
};

/// Rigid transform x' = R x + t; rotation row-major.
struct RigidTransform {
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 translation{};

    Vec3 apply(const Vec3& p) const {
        const auto& r = rotation;
        return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
                r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
                r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
    }

    bool is_identity_rotation() const {
        static constexpr std::array<double, 9> eye{1, 0, 0, 0, 1, 0, 0, 0, 1};
        return rotation == eye;
    }

    /// Orthonormal with determinant +1, within tol.
    bool rotation_is_valid(double tol = 1e-9) const {
        const auto& r = rotation;
        const Vec3 c0{r[0], r[3], r[6]}, c1{r[1], r[4], r[7]}, c2{r[2], r[5], r[8]};
        auto near = [tol](double a, double b) { return std::abs(a - b) <= tol; };
        const double det = c0.dot(c1.cross(c2));
        return near(c0.dot(c0), 1.0) && near(c1.dot(c1), 1.0) && near(c2.dot(c2), 1.0) &&
               near(c0.dot(c1), 0.0) && near(c0.dot(c2), 0.0) && near(c1.dot(c2), 0.0) &&
               near(det, 1.0);
    }
};

/// The simulated sensor head: a binocular pair (RGB camera = left reference,
/// IR camera = right) plus the structured-light projector paired with the IR
/// camera. Baselines in meters.
///
/// World frame == RGB camera frame. The IR camera sits at +B on the x axis,
/// the projector at +(B + B_m). T_ir_to_rgb maps IR-frame points into the
/// RGB frame and defaults to that pure x-translation.
struct RigModel {
    CameraIntrinsics ir_cam;
    CameraIntrinsics rgb_cam;
    double baseline = 0.0;      // B, stereo baseline
    double msl_baseline = 0.0;  // B_m, IR camera to projector
    double z_ref = 0.0;         // reference plane distance
    RigidTransform ir_to_rgb;

    bool valid() const {
        return ir_cam.valid() && rgb_cam.valid() && baseline > 0.0 && msl_baseline > 0.0 &&
               z_ref > 0.0 && ir_to_rgb.rotation_is_valid();
    }

    void require_valid() const {
        if (!valid()) throw InvalidConfig("rig model failed validation");
    }

    /// The prototype configuration used as the simulator default.
    static RigModel default_rig(int width = 1280, int height = 960, double focal_px = 570.0) {
        RigModel rig;
        rig.ir_cam = {focal_px, focal_px, width / 2.0, height / 2.0, width, height};
        rig.rgb_cam = rig.ir_cam;
        rig.baseline = 0.09414;
        rig.msl_baseline = 0.063;
        rig.z_ref = 0.8;
        rig.ir_to_rgb.translation = {rig.baseline, 0.0, 0.0};
        return rig;
    }
};

/// Floor below which the depth denominator counts as singular and the pixel
/// is invalidated instead of blowing up.
inline constexpr double kDepthDenominatorFloor = 1e-6;

/// Reference-relative disparity to depth:
///   Z = Z_ref / (1 - Z_ref * d / (B_m * f_m)).
/// Zero disparity is the reference plane; positive disparities are farther.
/// Pixels whose denominator falls at or below the positivity floor become
/// invalid; there is no global failure mode.
inline DepthMap msl_disparity_to_depth(const DisparityMap& d_m, const RigModel& rig) {
    rig.require_valid();
    const double bf = rig.msl_baseline * rig.ir_cam.fx;
    DepthMap out(d_m.width(), d_m.height());
    for (int y = 0; y < d_m.height(); ++y) {
        for (int x = 0; x < d_m.width(); ++x) {
            if (!d_m.is_valid(x, y)) continue;
            const double d = d_m.data.at(x, y);
            if (!std::isfinite(d)) continue;
            const double denom = 1.0 - rig.z_ref * d / bf;
            if (denom <= kDepthDenominatorFloor) continue;
            out.set(x, y, rig.z_ref / denom);
        }
    }
    return out;
}

/// Depth in the RGB frame to binocular disparity: d = B * f / Z.
/// Invalid or non-positive/non-finite depths stay invalid.
inline DisparityMap depth_to_binocular_disparity(const DepthMap& z, const RigModel& rig) {
    rig.require_valid();
    const double bf = rig.baseline * rig.rgb_cam.fx;
    DisparityMap out(z.width(), z.height());
    for (int y = 0; y < z.height(); ++y) {
        for (int x = 0; x < z.width(); ++x) {
            if (!z.is_valid(x, y)) continue;
            const double depth = z.data.at(x, y);
            if (!std::isfinite(depth) || depth <= 0.0) continue;
            out.set(x, y, bf / depth);
        }
    }
    return out;
}

/// Inverse of depth_to_binocular_disparity, for round trips.
inline double binocular_disparity_to_depth(double d, const RigModel& rig) {
    return rig.baseline * rig.rgb_cam.fx / d;
}

/// Transfers an IR-frame depth map into the RGB frame: back-project, apply
/// the rig extrinsics, re-project with nearest-pixel rounding. Collisions
/// keep the nearest depth; RGB pixels nothing maps to stay invalid. Holes
/// are expected output, not an error.
inline DepthMap reproject_depth(const DepthMap& z_ir, const RigModel& rig) {
    rig.require_valid();
    const CameraIntrinsics& dst = rig.rgb_cam;
    DepthMap out(dst.width, dst.height);
    for (int y = 0; y < z_ir.height(); ++y) {
        for (int x = 0; x < z_ir.width(); ++x) {
            if (!z_ir.is_valid(x, y)) continue;
            const double depth = z_ir.data.at(x, y);
            if (!std::isfinite(depth) || depth <= 0.0) continue;
            const Vec3 p_rgb = rig.ir_to_rgb.apply(rig.ir_cam.back_project(x, y, depth));
            if (p_rgb.z <= 0.0) continue;
            double u, v;
            dst.project(p_rgb, u, v);
            const int ui = static_cast<int>(std::lround(u));
            const int vi = static_cast<int>(std::lround(v));
            if (!out.data.in_bounds(ui, vi)) continue;
            if (!out.is_valid(ui, vi) || p_rgb.z < out.data.at(ui, vi)) out.set(ui, vi, p_rgb.z);
        }
    }
    return out;
}

} // namespace monostereo
