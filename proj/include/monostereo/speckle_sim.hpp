#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monostereo/errors.hpp"
#include "monostereo/geometry.hpp"
#include "monostereo/image.hpp"
#include "monostereo/rng.hpp"

namespace monostereo {

// ---------------------------------------------------------------------------
// Albedo textures
// ---------------------------------------------------------------------------

/// Surface albedo in [0,1]: uniform, procedural value noise, or a sampled
/// grayscale image.
struct AlbedoSpec {
    enum class Kind { Uniform, Noise, Image };
    Kind kind = Kind::Uniform;
    double value = 0.8;    // uniform level
    double scale = 20.0;   // noise cells per meter (or per uv unit)
    double lo = 0.1, hi = 0.9;
    uint64_t noise_seed = 0;
    ImageGray image;        // image-backed, sampled bilinearly over uv in [0,1]
    std::string image_path; // source of `image`, kept for serialization

    double sample(double u, double v) const {
        switch (kind) {
            case Kind::Uniform:
                return value;
            case Kind::Noise:
                return lo + (hi - lo) * value_noise2(u * scale, v * scale, noise_seed);
            case Kind::Image: {
                if (image.empty()) return value;
                const double fx = std::clamp(u, 0.0, 1.0) * (image.width() - 1);
                const double fy = std::clamp(v, 0.0, 1.0) * (image.height() - 1);
                const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
                const double tx = fx - x0, ty = fy - y0;
                const double a = image.at_clamped(x0, y0), b = image.at_clamped(x0 + 1, y0);
                const double c = image.at_clamped(x0, y0 + 1), d = image.at_clamped(x0 + 1, y0 + 1);
                return (a + (b - a) * tx) * (1 - ty) + (c + (d - c) * tx) * ty;
            }
        }
        return value;
    }
};

// ---------------------------------------------------------------------------
// Scene primitives
// ---------------------------------------------------------------------------

/// Analytic primitive in the world frame (== RGB camera frame, z forward).
/// Only the fields for the active kind are meaningful.
struct ScenePrimitive {
    enum class Kind { FrontoPlane, SlantedPlane, Sphere, Quad };
    Kind kind = Kind::FrontoPlane;

    // FrontoPlane: z = depth, optionally bounded in x/y around (bound_cx, bound_cy).
    double z = 1.0;
    bool bounded = false;
    double bound_cx = 0.0, bound_cy = 0.0, half_x = 0.0, half_y = 0.0;

    // SlantedPlane: passes through `point` with unit `normal` (normal.z < 0 faces camera).
    Vec3 point{0, 0, 1};
    Vec3 normal{0, 0, -1};

    // Sphere.
    Vec3 center{0, 0, 1};
    double radius = 0.2;

    // Quad: center +- s*edge_u +- t*edge_v, s,t in [-1,1].
    Vec3 quad_center{0, 0, 1};
    Vec3 edge_u{0.3, 0, 0};
    Vec3 edge_v{0, 0.3, 0};

    AlbedoSpec albedo;

    /// Nearest z among points the primitive can present to the cameras.
    double nearest_z() const {
        switch (kind) {
            case Kind::FrontoPlane: return z;
            case Kind::SlantedPlane: return point.z;
            case Kind::Sphere: return center.z - radius;
            case Kind::Quad: {
                double zmin = quad_center.z;
                for (int s = -1; s <= 1; s += 2)
                    for (int t = -1; t <= 1; t += 2)
                        zmin = std::min(zmin, (quad_center + edge_u * s + edge_v * t).z);
                return zmin;
            }
        }
        return 0.0;
    }
};

using Scene = std::vector<ScenePrimitive>;

inline void validate_scene(const Scene& scene) {
    if (scene.empty()) throw SceneEmpty("scene has no primitives");
    for (size_t i = 0; i < scene.size(); ++i)
        if (scene[i].nearest_z() <= 0.1)
            throw InvalidConfig("scene primitive " + std::to_string(i) +
                                " reaches z <= 0.1 m in front of the cameras");
}

struct RayHit {
    double t = 0.0;   // depth along an unnormalized (dz = 1) ray == world z offset
    Vec3 point;
    double u = 0.0, v = 0.0;
    const ScenePrimitive* prim = nullptr;
};

namespace detail {

inline bool intersect_primitive(const ScenePrimitive& p, const Vec3& origin, const Vec3& dir,
                                RayHit& hit) {
    switch (p.kind) {
        case ScenePrimitive::Kind::FrontoPlane: {
            if (dir.z == 0.0) return false;
            const double t = (p.z - origin.z) / dir.z;
            if (t <= 0.0) return false;
            const Vec3 x = origin + dir * t;
            if (p.bounded && (std::abs(x.x - p.bound_cx) > p.half_x ||
                              std::abs(x.y - p.bound_cy) > p.half_y))
                return false;
            hit = {t, x, x.x, x.y, &p};
            return true;
        }
        case ScenePrimitive::Kind::SlantedPlane: {
            const Vec3 n = p.normal.normalized();
            const double denom = n.dot(dir);
            if (std::abs(denom) < 1e-12) return false;
            const double t = n.dot(p.point - origin) / denom;
            if (t <= 0.0) return false;
            const Vec3 x = origin + dir * t;
            // in-plane coordinates against a basis derived from the normal
            const Vec3 ref = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
            const Vec3 bu = n.cross(ref).normalized();
            const Vec3 bv = n.cross(bu);
            const Vec3 rel = x - p.point;
            hit = {t, x, rel.dot(bu), rel.dot(bv), &p};
            return true;
        }
        case ScenePrimitive::Kind::Sphere: {
            const Vec3 oc = origin - p.center;
            const double a = dir.dot(dir);
            const double b = 2.0 * oc.dot(dir);
            const double c = oc.dot(oc) - p.radius * p.radius;
            const double disc = b * b - 4.0 * a * c;
            if (disc < 0.0) return false;
            const double sq = std::sqrt(disc);
            double t = (-b - sq) / (2.0 * a);
            if (t <= 0.0) t = (-b + sq) / (2.0 * a);
            if (t <= 0.0) return false;
            const Vec3 x = origin + dir * t;
            const Vec3 d = (x - p.center).normalized();
            hit = {t, x, 0.5 + std::atan2(d.x, d.z) / 6.283185307179586,
                   0.5 + std::asin(std::clamp(d.y, -1.0, 1.0)) / 3.141592653589793, &p};
            return true;
        }
        case ScenePrimitive::Kind::Quad: {
            const Vec3 n = p.edge_u.cross(p.edge_v);
            const double denom = n.dot(dir);
            if (std::abs(denom) < 1e-12) return false;
            const double t = n.dot(p.quad_center - origin) / denom;
            if (t <= 0.0) return false;
            const Vec3 x = origin + dir * t;
            const Vec3 rel = x - p.quad_center;
            const double uu = p.edge_u.dot(p.edge_u), vv = p.edge_v.dot(p.edge_v);
            const double s = rel.dot(p.edge_u) / uu;
            const double tt = rel.dot(p.edge_v) / vv;
            if (std::abs(s) > 1.0 || std::abs(tt) > 1.0) return false;
            hit = {t, x, 0.5 * (s + 1.0), 0.5 * (tt + 1.0), &p};
            return true;
        }
    }
    return false;
}

} // namespace detail

/// Nearest intersection of the ray origin + t*dir with the scene.
inline std::optional<RayHit> cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir) {
    std::optional<RayHit> best;
    RayHit h;
    for (const ScenePrimitive& p : scene)
        if (detail::intersect_primitive(p, origin, dir, h) && (!best || h.t < best->t)) best = h;
    return best;
}

/// True when `point` (on a surface) is the first thing the scene shows to
/// `origin` along the connecting ray.
inline bool point_visible_from(const Scene& scene, const Vec3& origin, const Vec3& point) {
    const Vec3 dir = point - origin;
    const auto hit = cast_ray(scene, origin, dir);
    return hit && hit->t >= 1.0 - 1e-7; // t parameterized so the target sits at t = 1
}

// ---------------------------------------------------------------------------
// Speckle pattern
// ---------------------------------------------------------------------------

/// One projected dot: direction (ax, ay, 1) from the projector, relative
/// intensity in (0,1].
struct SpeckleDot {
    double ax = 0.0, ay = 0.0;
    double intensity = 1.0;
};

/// The DOE dot pattern. Fixed per device; regenerated only through seeds.
struct SpecklePattern {
    std::vector<SpeckleDot> dots;
    uint64_t seed = 0;

    int count() const { return static_cast<int>(dots.size()); }

    /// Uniform random directions covering the IR camera's field of view at
    /// every depth from z_near out to infinity, with a pixel margin so window
    /// matching keeps support at the borders.
    static SpecklePattern generate_for_rig(const RigModel& rig, int count, uint64_t seed,
                                           double z_near = 0.35, double margin_px = 12.0,
                                           double intensity_min = 1.0,
                                           double intensity_max = 1.0) {
        const CameraIntrinsics& cam = rig.ir_cam;
        const double ax_lo = (-margin_px - cam.cx) / cam.fx - rig.msl_baseline / z_near;
        const double ax_hi = (cam.width + margin_px - cam.cx) / cam.fx;
        const double ay_lo = (-margin_px - cam.cy) / cam.fy;
        const double ay_hi = (cam.height + margin_px - cam.cy) / cam.fy;
        SpecklePattern pat;
        pat.seed = seed;
        pat.dots.resize(static_cast<size_t>(count));
        Rng rng(mix64(seed, 0xd075));
        for (SpeckleDot& d : pat.dots) {
            d.ax = rng.uniform(ax_lo, ax_hi);
            d.ay = rng.uniform(ay_lo, ay_hi);
            d.intensity = intensity_min == intensity_max
                              ? intensity_max
                              : rng.uniform(intensity_min, intensity_max);
        }
        return pat;
    }

    /// Per-frame re-randomization for space-time capture: every dot direction
    /// is perturbed by up to +-magnitude (tangent units, ~magnitude*fx pixels).
    SpecklePattern jittered(uint64_t frame_seed, double magnitude) const {
        SpecklePattern out = *this;
        out.seed = mix64(seed, frame_seed);
        Rng rng(out.seed);
        for (SpeckleDot& d : out.dots) {
            d.ax += rng.uniform(-magnitude, magnitude);
            d.ay += rng.uniform(-magnitude, magnitude);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

struct RenderOptions {
    bool projector_on = true;
    double ambient = 0.25;            // ambient level multiplying surface albedo
    double dot_gain = 0.9;            // dot peak intensity at the attenuation reference
    double attenuation_exponent = 2.0;
    double attenuation_ref = 1.0;     // meters
    double near_clip = 0.3;           // attenuation clamp distance
    double splat_sigma = 0.6;         // Gaussian dot footprint, pixels
    double noise_sigma = 0.0;         // optional additive sensor noise
    uint64_t noise_seed = 0;
    bool speckle_visible_to_rgb = false; // auxiliary visible-light projector (GT capture)
};

/// Brightness falloff with distance, (ref/z)^exponent, clamped at near_clip.
inline double distance_attenuation(double z, const RenderOptions& opts) {
    return std::pow(opts.attenuation_ref / std::max(z, opts.near_clip),
                    opts.attenuation_exponent);
}

/// Everything one exposure produces: the asymmetric image pair and exact
/// ray-cast ground truth. gt_disparity is derived from gt_depth_rgb through
/// the same depth-to-disparity conversion the rest of the library uses, so
/// the two are consistent by construction.
struct RenderedFrame {
    ImageGray ir_image;
    ImageGray rgb_image;
    DepthMap gt_depth_ir;
    DepthMap gt_depth_rgb;
    DisparityMap gt_disparity;
    std::vector<std::pair<float, float>> ir_dot_hits; // subpixel splat centers, IR frame
};

namespace detail {

/// Adds a normalized 3x3 Gaussian splat centered at subpixel (u, v).
inline void splat_dot(ImageGray& img, double u, double v, double intensity, double sigma) {
    const int ui = static_cast<int>(std::lround(u));
    const int vi = static_cast<int>(std::lround(v));
    double w[3][3];
    double total = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const double du = ui + dx - u, dv = vi + dy - v;
            const double g = std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
            w[dy + 1][dx + 1] = g;
            total += g;
        }
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const int x = ui + dx, y = vi + dy;
            if (img.in_bounds(x, y)) img.at(x, y) += static_cast<float>(intensity * w[dy + 1][dx + 1] / total);
        }
}

inline void render_ambient(const Scene& scene, const CameraIntrinsics& cam, const Vec3& origin,
                           double ambient, ImageGray& img, DepthMap& depth) {
    img = ImageGray(cam.width, cam.height, 0.0f);
    depth = DepthMap(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const Vec3 dir{(x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0};
            const auto hit = cast_ray(scene, origin, dir);
            if (!hit) continue;
            depth.set(x, y, hit->t); // dz == 1, so t is the z depth
            img.at(x, y) = static_cast<float>(ambient * hit->prim->albedo.sample(hit->u, hit->v));
        }
    }
}

inline void add_noise_and_clamp(ImageGray& img, double sigma, uint64_t seed) {
    if (sigma > 0.0) {
        Rng rng(seed);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                img.at(x, y) += static_cast<float>(rng.normal(0.0, sigma));
    }
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            img.at(x, y) = std::clamp(img.at(x, y), 0.0f, 1.0f);
}

} // namespace detail

/// Renders the scene as both cameras see it. The IR image carries the
/// projected dots (ambient + splats, intensity attenuated with depth); the
/// RGB camera is IR-cut filtered and sees ambient shading only, unless the
/// auxiliary visible-speckle mode is on. Deterministic in all inputs.
inline RenderedFrame render_scene(const Scene& scene, const SpecklePattern& pattern,
                                  const RigModel& rig, const RenderOptions& opts = {}) {
    validate_scene(scene);
    rig.require_valid();

    RenderedFrame frame;
    const Vec3 ir_origin{rig.baseline, 0.0, 0.0};
    const Vec3 rgb_origin{0.0, 0.0, 0.0};
    const Vec3 projector_origin{rig.baseline + rig.msl_baseline, 0.0, 0.0};

    detail::render_ambient(scene, rig.ir_cam, ir_origin, opts.ambient, frame.ir_image,
                           frame.gt_depth_ir);
    detail::render_ambient(scene, rig.rgb_cam, rgb_origin, opts.ambient, frame.rgb_image,
                           frame.gt_depth_rgb);

    if (opts.projector_on) {
        for (const SpeckleDot& dot : pattern.dots) {
            const Vec3 dir{dot.ax, dot.ay, 1.0};
            const auto hit = cast_ray(scene, projector_origin, dir);
            if (!hit || hit->point.z <= 0.0) continue;
            const double intensity =
                dot.intensity * opts.dot_gain * distance_attenuation(hit->point.z, opts);

            if (point_visible_from(scene, ir_origin, hit->point)) {
                double u, v;
                rig.ir_cam.project(hit->point - ir_origin, u, v);
                if (u > -2 && u < rig.ir_cam.width + 1 && v > -2 && v < rig.ir_cam.height + 1) {
                    detail::splat_dot(frame.ir_image, u, v, intensity, opts.splat_sigma);
                    frame.ir_dot_hits.emplace_back(static_cast<float>(u), static_cast<float>(v));
                }
            }
            if (opts.speckle_visible_to_rgb && point_visible_from(scene, rgb_origin, hit->point)) {
                double u, v;
                rig.rgb_cam.project(hit->point - rgb_origin, u, v);
                detail::splat_dot(frame.rgb_image, u, v, intensity, opts.splat_sigma);
            }
        }
    }

    detail::add_noise_and_clamp(frame.ir_image, opts.noise_sigma, mix64(opts.noise_seed, 1));
    detail::add_noise_and_clamp(frame.rgb_image, opts.noise_sigma, mix64(opts.noise_seed, 2));

    frame.gt_disparity = depth_to_binocular_disparity(frame.gt_depth_rgb, rig);
    return frame;
}

/// The pre-stored matching target: the speckle image of a fronto-parallel
/// white plane at Z_ref seen by the IR camera. Ambient defaults to zero so
/// the image is the dot field alone.
inline ImageGray render_reference_image(const SpecklePattern& pattern, const RigModel& rig,
                                        double ambient = 0.0) {
    Scene plane(1);
    plane[0].kind = ScenePrimitive::Kind::FrontoPlane;
    plane[0].z = rig.z_ref;
    plane[0].albedo.kind = AlbedoSpec::Kind::Uniform;
    plane[0].albedo.value = 1.0;
    RenderOptions opts;
    opts.ambient = ambient;
    opts.projector_on = true;
    return render_scene(plane, pattern, rig, opts).ir_image;
}

/// Adds pattern.count() dots at uniformly random pixels of the right image,
/// each scaled by the distance attenuation of the underlying depth. This is
/// the asymmetric-texture dataset augmentation: the left image is left
/// untouched. Dots over invalid depth are skipped.
inline ImageGray speckle_augment(const ImageGray& right_image, const DepthMap& right_depth,
                                 const SpecklePattern& pattern, double gain = 1.0,
                                 const RenderOptions& opts = {}) {
    require_same_size(right_image, right_depth.data, "speckle_augment image/depth");
    ImageGray out = right_image;
    Rng rng(mix64(pattern.seed, 0xa496));
    for (const SpeckleDot& dot : pattern.dots) {
        const int x = static_cast<int>(rng.uniform_u32(static_cast<uint32_t>(out.width())));
        const int y = static_cast<int>(rng.uniform_u32(static_cast<uint32_t>(out.height())));
        if (!right_depth.is_valid(x, y)) continue;
        const double z = right_depth.data.at(x, y);
        detail::splat_dot(out, x, y, dot.intensity * gain * distance_attenuation(z, opts),
                          opts.splat_sigma);
    }
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out.at(x, y) = std::clamp(out.at(x, y), 0.0f, 1.0f);
    return out;
}

/// Marks pixels whose (2r+1)^2 window around them contains at least
/// min_dots projected dot centers; the region where speckle matching has
/// support.
inline Mask speckle_coverage_mask(const std::vector<std::pair<float, float>>& dot_hits, int width,
                                  int height, int window_radius, int min_dots) {
    Raster<uint32_t> counts(width, height, 0);
    for (const auto& [u, v] : dot_hits) {
        const int x = static_cast<int>(std::lround(u));
        const int y = static_cast<int>(std::lround(v));
        if (counts.in_bounds(x, y)) counts.at(x, y) += 1;
    }
    IntegralImage<uint32_t> integral(counts, [](uint32_t c) { return c; });
    Mask mask(width, height, 0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (integral.window(x, y, window_radius) >= static_cast<uint32_t>(min_dots))
                mask.at(x, y) = 1;
    return mask;
}

} // namespace monostereo
