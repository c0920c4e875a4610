#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "monostereo/errors.hpp"
#include "monostereo/geometry.hpp"
#include "monostereo/image.hpp"
#include "monostereo/msl.hpp"
#include "monostereo/rng.hpp"
#include "monostereo/speckle_sim.hpp"
#include "monostereo/stereo_core.hpp"

namespace monostereo {

/// Ordered rectified (left, right) pairs of one static scene under varying
/// illumination.
struct FrameSequence {
    std::vector<std::pair<ImageGray, ImageGray>> frames;

    void validate() const {
        if (frames.empty()) throw EmptySequence("frame sequence is empty");
        const ImageGray& first = frames.front().first;
        for (const auto& [left, right] : frames) {
            require_same_size(left, first, "frame sequence left images");
            require_same_size(right, first, "frame sequence right images");
        }
    }
};

struct SpacetimeParams {
    int dmax = 192;
    int window = 7;              // spatial support; time supplies the rest
    int binarize_radius = 5;
    double min_valid_ratio = 0.8;
    double uniqueness_ratio = 0.9;
    double lrc_tol = 1.0;
    bool subpixel = true;

    void validate() const {
        if (dmax < 2) throw InvalidConfig("spacetime dmax must be >= 2");
        if (window < 3 || window % 2 == 0)
            throw InvalidConfig("spacetime window must be odd and >= 3");
        if (min_valid_ratio <= 0.0 || min_valid_ratio > 1.0)
            throw InvalidConfig("spacetime min_valid_ratio must be in (0, 1]");
        if (uniqueness_ratio <= 0.0 || uniqueness_ratio >= 1.0)
            throw InvalidConfig("spacetime uniqueness_ratio must be in (0, 1)");
        if (lrc_tol <= 0.0) throw InvalidConfig("spacetime lrc_tol must be > 0");
    }
};

/// Pre-consistency-check output of the space-time matcher: winner-take-all
/// disparities referenced to each image.
struct SpacetimePair {
    DisparityMap left;
    DisparityMap right;
};

/// Integrates binarized windowed Hamming costs over frames. Costs are exact
/// integer counts, so accumulation order never changes the result and two
/// accumulators can be merged by addition. The right-reference volume is a
/// pure re-indexing of the left one (cell (x,y,d) maps to (x+d,y,d), with
/// identical window clipping), so consistency checking costs no extra
/// matching pass.
class SpacetimeAccumulator {
public:
    SpacetimeAccumulator(int width, int height, const SpacetimeParams& params = {})
        : w_(width), h_(height), params_(params),
          cost_(static_cast<size_t>(width) * height * params.dmax, 0) {
        params_.validate();
    }

    int width() const { return w_; }
    int height() const { return h_; }
    int frame_count() const { return frames_; }
    const SpacetimeParams& params() const { return params_; }
    const std::vector<uint32_t>& costs() const { return cost_; }

    void add_frame(const ImageGray& left, const ImageGray& right) {
        require_same_size(left, right, "spacetime frame pair");
        require_same_size_impl(left.width(), left.height(), w_, h_, "spacetime frame");
        const BinaryImage lbits = binarize(left, params_.binarize_radius);
        const BinaryImage rbits = binarize(right, params_.binarize_radius);
        const int wr = params_.window / 2;
        for (int d = 0; d < params_.dmax; ++d) {
            const Raster<uint32_t> plane = hamming_plane(lbits, rbits, -d, wr);
            for (int y = 0; y < h_; ++y) {
                const uint32_t* src = plane.row(y);
                uint32_t* dst = cost_.data() + static_cast<size_t>(y) * w_ * params_.dmax + d;
                for (int x = 0; x < w_; ++x, dst += params_.dmax) *dst += src[x];
            }
        }
        ++frames_;
    }

    /// Merge another accumulator over the same geometry (sum of histories).
    void add(const SpacetimeAccumulator& other) {
        if (other.w_ != w_ || other.h_ != h_ || other.params_.dmax != params_.dmax ||
            other.params_.window != params_.window)
            throw SizeMismatch("spacetime accumulators have mismatched shapes");
        for (size_t i = 0; i < cost_.size(); ++i) cost_[i] += other.cost_[i];
        frames_ += other.frames_;
    }

    /// Winner-take-all with parabola refinement and uniqueness gating, for
    /// both reference frames, before the left-right check.
    SpacetimePair extract_raw() const {
        if (frames_ == 0) throw EmptySequence("spacetime accumulator holds no frames");
        SpacetimePair pair{DisparityMap(w_, h_), DisparityMap(w_, h_)};
        extract_side(pair.left, false);
        extract_side(pair.right, true);
        return pair;
    }

    /// The protocol output: WTA both sides, then left-right consistency.
    DisparityMap extract() const {
        SpacetimePair pair = extract_raw();
        return left_right_check(pair.left, pair.right, params_.lrc_tol);
    }

private:
    /// Normalized cost of candidate d at pixel (x,y) for one side; right side
    /// re-indexes into the left volume. Returns false when the candidate has
    /// no window support.
    bool cost_at(int x, int y, int d, bool right_side, double& cost, bool& allowed) const {
        const int lx = right_side ? x + d : x;
        if (lx >= w_) return false;
        const int wr = params_.window / 2;
        const int overlap = hamming_overlap(lx, y, -d, wr, w_, h_);
        if (overlap <= 0) return false;
        const uint32_t mism =
            cost_[(static_cast<size_t>(y) * w_ + lx) * params_.dmax + d];
        cost = static_cast<double>(mism) / (static_cast<double>(frames_) * overlap);
        allowed = overlap >= static_cast<int>(std::ceil(params_.min_valid_ratio *
                                                        params_.window * params_.window));
        return true;
    }

    void extract_side(DisparityMap& out, bool right_side) const {
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                int best_d = -1;
                double best = 0.0;
                for (int d = 0; d < params_.dmax; ++d) {
                    double c;
                    bool allowed;
                    if (!cost_at(x, y, d, right_side, c, allowed) || !allowed) continue;
                    if (best_d < 0 || c < best) {
                        best = c;
                        best_d = d;
                    }
                }
                if (best_d < 0) continue;

                double second = -1.0;
                for (int d = 0; d < params_.dmax; ++d) {
                    if (std::abs(d - best_d) <= 1) continue;
                    double c;
                    bool allowed;
                    if (!cost_at(x, y, d, right_side, c, allowed) || !allowed) continue;
                    if (second < 0.0 || c < second) second = c;
                }
                if (!(second > 0.0) || !(best <= params_.uniqueness_ratio * second))
                    continue;

                double delta = 0.0;
                if (params_.subpixel && best_d > 0 && best_d + 1 < params_.dmax) {
                    double cm, cp;
                    bool am, ap;
                    if (cost_at(x, y, best_d - 1, right_side, cm, am) &&
                        cost_at(x, y, best_d + 1, right_side, cp, ap)) {
                        const double denom = cm + cp - 2.0 * best;
                        if (denom > 1e-12)
                            delta = std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
                    }
                }
                out.set(x, y, best_d + delta);
            }
        }
    }

    int w_, h_;
    SpacetimeParams params_;
    std::vector<uint32_t> cost_;
    int frames_ = 0;
};

inline DisparityMap spacetime_match(const FrameSequence& seq, const SpacetimeParams& params) {
    seq.validate();
    SpacetimeAccumulator acc(seq.frames.front().first.width(),
                             seq.frames.front().first.height(), params);
    for (const auto& [left, right] : seq.frames) acc.add_frame(left, right);
    return acc.extract();
}

inline DisparityMap spacetime_match(const FrameSequence& seq, int dmax, int window) {
    SpacetimeParams params;
    params.dmax = dmax;
    params.window = window;
    return spacetime_match(seq, params);
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

struct GtDatasetParams {
    int n_frames = 200;        // ground-truth capture length
    int device_dots = 11000;   // fixed DOE pattern: evaluation pair + MSL
    int gt_dots = 11000;       // auxiliary projector pattern, re-jittered per frame
    double gt_jitter = 0.02;   // per-frame direction perturbation, tangent units
    uint64_t seed = 0;
    RenderOptions render;
    SpacetimeParams spacetime;
    MslMatchParams msl;
};

/// Everything one scene contributes to the benchmark. `gt` is the space-time
/// protocol product; `sim_disparity` is the simulator's exact ray-cast
/// disparity, kept so the protocol can be audited against perfect truth.
struct SceneDataset {
    ImageGray left;          // IR-cut camera, no speckles
    ImageGray right_on;      // speckle camera, projector on
    ImageGray right_off;     // projector off
    DisparityMap gt;         // space-time GT, left frame
    DisparityMap sim_disparity;
    DisparityMap guide;      // structured-light hints as binocular disparity
    RigModel rig;
    uint64_t seed = 0;
    int n_frames = 0;
};

/// The two asymmetric evaluation exposures: left never sees the dots, the
/// right sees them only with the projector on. Both projector states share
/// one noise seed, so right_on and right_off differ by the dots alone when
/// noise is enabled.
struct EvalPair {
    ImageGray left;
    ImageGray right_on;
    ImageGray right_off;
    DisparityMap sim_disparity; // exact ray-cast disparity, left frame
    std::vector<std::pair<float, float>> dot_hits; // dot splat centers on right_on
};

inline EvalPair render_eval_pair(const Scene& scene, const SpecklePattern& device,
                                 const RigModel& rig, RenderOptions opts,
                                 uint64_t noise_seed) {
    opts.speckle_visible_to_rgb = false;
    opts.noise_seed = noise_seed;
    opts.projector_on = true;
    RenderedFrame active = render_scene(scene, device, rig, opts);
    opts.projector_on = false;
    RenderedFrame passive = render_scene(scene, device, rig, opts);
    return {std::move(active.rgb_image), std::move(active.ir_image),
            std::move(passive.ir_image), std::move(active.gt_disparity),
            std::move(active.ir_dot_hits)};
}

/// The structured-light guidance chain: match the live speckle image against
/// the reference plane, lift to depth, carry the depth across the rig into
/// the left camera, and express it as binocular disparity hints.
inline DisparityMap msl_guidance(const ImageGray& right_on, const ImageGray& reference,
                                 const RigModel& rig, const MslMatchParams& msl = {}) {
    const DepthMap z_msl = msl_depth(right_on, reference, rig, msl);
    const DepthMap z_left = reproject_depth(z_msl, rig);
    return depth_to_binocular_disparity(z_left, rig);
}

/// Renders n_frames exposures of the scene under the auxiliary projector
/// (visible to both cameras, direction-jittered every frame) and integrates
/// them with the space-time matcher.
inline DisparityMap spacetime_gt_map(const Scene& scene, const RigModel& rig,
                                     const SpecklePattern& aux, int n_frames, double jitter,
                                     uint64_t seed, RenderOptions opts,
                                     const SpacetimeParams& spacetime = {}) {
    if (n_frames < 1) throw EmptySequence("spacetime capture needs n_frames >= 1");
    SpacetimeAccumulator acc(rig.rgb_cam.width, rig.rgb_cam.height, spacetime);
    opts.projector_on = true;
    opts.speckle_visible_to_rgb = true;
    for (int k = 0; k < n_frames; ++k) {
        opts.noise_seed = mix64(seed, 100 + static_cast<uint64_t>(k));
        const RenderedFrame frame =
            render_scene(scene, aux.jittered(k + 1, jitter), rig, opts);
        acc.add_frame(frame.rgb_image, frame.ir_image);
    }
    return acc.extract();
}

/// Synthesizes one scene's dataset: the asymmetric evaluation pairs with the
/// fixed device pattern, the structured-light guidance chain, and N
/// ground-truth frames lit by a re-jittered pattern visible to both cameras,
/// integrated by space-time matching.
inline SceneDataset make_gt_dataset(const Scene& scene, const RigModel& rig,
                                    const GtDatasetParams& params = {}) {
    validate_scene(scene);
    rig.require_valid();
    if (params.n_frames < 1) throw InvalidConfig("dataset needs n_frames >= 1");

    SceneDataset ds;
    ds.rig = rig;
    ds.seed = params.seed;
    ds.n_frames = params.n_frames;

    const SpecklePattern device =
        SpecklePattern::generate_for_rig(rig, params.device_dots, mix64(params.seed, 1));
    const ImageGray reference = render_reference_image(device, rig);

    EvalPair pair =
        render_eval_pair(scene, device, rig, params.render, mix64(params.seed, 2));
    ds.left = std::move(pair.left);
    ds.right_on = std::move(pair.right_on);
    ds.right_off = std::move(pair.right_off);
    ds.sim_disparity = std::move(pair.sim_disparity);

    ds.guide = msl_guidance(ds.right_on, reference, rig, params.msl);

    const SpecklePattern aux =
        SpecklePattern::generate_for_rig(rig, params.gt_dots, mix64(params.seed, 3));
    ds.gt = spacetime_gt_map(scene, rig, aux, params.n_frames, params.gt_jitter,
                             params.seed, params.render, params.spacetime);
    return ds;
}

} // namespace monostereo
