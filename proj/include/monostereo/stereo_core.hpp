#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

#include "monostereo/errors.hpp"
#include "monostereo/image.hpp"
#include "monostereo/rng.hpp"

namespace monostereo {

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

enum class FeatureKind {
    CensusBits,      // 7x7 census, center excluded: 48 comparisons, +-1 encoded
    NormalizedPatch, // 9x9 mean-subtracted raw patch
};

/// Per-pixel feature vectors. Census features are held bit-packed (one word
/// per pixel) and expand to +-1.0 entries on demand; patch features are held
/// as dense floats. Both views feed the same correlation formula.
struct FeatureMap {
    FeatureKind kind = FeatureKind::CensusBits;
    int width = 0, height = 0;
    int dim = 0;
    std::vector<float> values;   // NormalizedPatch: width*height*dim
    Raster<uint64_t> census;     // CensusBits: low `dim` bits per pixel

    bool same_shape(const FeatureMap& o) const {
        return width == o.width && height == o.height;
    }

    const float* vector_at(int x, int y) const {
        return values.data() + (static_cast<size_t>(y) * width + x) * dim;
    }

    /// Writes the explicit feature vector for (x, y) into out[0..dim).
    void materialize(int x, int y, float* out) const {
        if (kind == FeatureKind::CensusBits) {
            const uint64_t bits = census.at(x, y);
            for (int b = 0; b < dim; ++b) out[b] = (bits >> b) & 1 ? 1.0f : -1.0f;
        } else {
            std::memcpy(out, vector_at(x, y), sizeof(float) * dim);
        }
    }
};

inline constexpr int kCensusRadius = 3;            // 7x7 window
inline constexpr int kCensusDim = 48;              // 49 cells minus the center
inline constexpr int kPatchRadius = 4;             // 9x9 window
inline constexpr int kPatchDim = 81;

/// Census mode compares every 7x7 neighbor (border-clamped) against the
/// center pixel, so any monotonic intensity remapping leaves the features
/// unchanged. Patch mode stores the mean-subtracted 9x9 patch without
/// rescaling, so contrast survives into the correlation.
inline FeatureMap extract_features(const ImageGray& img,
                                   FeatureKind kind = FeatureKind::CensusBits) {
    FeatureMap f;
    f.kind = kind;
    f.width = img.width();
    f.height = img.height();
    if (kind == FeatureKind::CensusBits) {
        f.dim = kCensusDim;
        f.census = Raster<uint64_t>(f.width, f.height, 0);
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                const float center = img.at(x, y);
                uint64_t bits = 0;
                int b = 0;
                for (int dy = -kCensusRadius; dy <= kCensusRadius; ++dy) {
                    for (int dx = -kCensusRadius; dx <= kCensusRadius; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        if (img.at_clamped(x + dx, y + dy) > center)
                            bits |= uint64_t{1} << b;
                        ++b;
                    }
                }
                f.census.at(x, y) = bits;
            }
        }
    } else {
        f.dim = kPatchDim;
        f.values.resize(static_cast<size_t>(f.width) * f.height * f.dim);
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                float* v = f.values.data() + (static_cast<size_t>(y) * f.width + x) * f.dim;
                double mean = 0.0;
                int b = 0;
                for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy)
                    for (int dx = -kPatchRadius; dx <= kPatchRadius; ++dx)
                        mean += (v[b++] = img.at_clamped(x + dx, y + dy));
                mean /= kPatchDim;
                for (b = 0; b < kPatchDim; ++b) v[b] = static_cast<float>(v[b] - mean);
            }
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Cost volume
// ---------------------------------------------------------------------------

/// Matching scores per pixel and disparity, similarity semantics (higher is
/// better). Freshly built volumes lie in [0,1]; guidance modulation may push
/// hinted cells above 1 by design.
struct CostVolume {
    int width = 0, height = 0, dmax = 0;
    int feature_dim = 0;
    std::vector<float> scores; // (y, x, d), d innermost

    CostVolume() = default;
    CostVolume(int w, int h, int d, float fill = 0.0f)
        : width(w), height(h), dmax(d),
          scores(static_cast<size_t>(w) * h * d, fill) {}

    float& at(int x, int y, int d) {
        return scores[(static_cast<size_t>(y) * width + x) * dmax + d];
    }
    float at(int x, int y, int d) const {
        return scores[(static_cast<size_t>(y) * width + x) * dmax + d];
    }
    float* cell(int x, int y) {
        return scores.data() + (static_cast<size_t>(y) * width + x) * dmax;
    }
    const float* cell(int x, int y) const {
        return scores.data() + (static_cast<size_t>(y) * width + x) * dmax;
    }
    bool same_shape(const CostVolume& o) const {
        return width == o.width && height == o.height && dmax == o.dmax;
    }
};

enum class CorrelationNorm {
    Printed, // <a,b> / (2 (|a|+eps)(|b|+eps)) + 0.5; norm magnitudes leak into the score
    Cosine,  // <a,b> / (2 max(|a||b|, eps)) + 0.5; pure angle
};

/// Correlation of two feature vectors, normalized into [0,1]: 0.5 is
/// uninformative, 1 parallel, 0 anti-parallel. Accumulates in double and
/// rounds once, so an integer-exact path (census popcount) can match it
/// bit for bit.
inline float correlation_score(const float* a, const float* b, int dim, double eps,
                               CorrelationNorm norm = CorrelationNorm::Printed) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < dim; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    const double denom = norm == CorrelationNorm::Printed
                             ? 2.0 * (na + eps) * (nb + eps)
                             : 2.0 * std::max(na * nb, eps);
    return static_cast<float>(dot / denom + 0.5);
}

/// C(x,y,d) scores left pixel (x,y) against right pixel (x-d,y) for
/// d in [0, dmax). Shifts that leave the right image score exactly 0.5.
/// Census features go through an XOR+popcount path that yields bit-identical
/// results to the explicit formula.
inline CostVolume build_cost_volume(const FeatureMap& fl, const FeatureMap& fr, int dmax,
                                    double eps = 1e-4,
                                    CorrelationNorm norm = CorrelationNorm::Printed) {
    if (!fl.same_shape(fr))
        throw SizeMismatch("build_cost_volume: feature map sizes differ");
    if (fl.dim != fr.dim || fl.kind != fr.kind)
        throw FeatureDimMismatch("build_cost_volume: feature layouts differ");
    if (dmax < 1) throw InvalidConfig("build_cost_volume: dmax must be >= 1");
    if (eps <= 0.0) throw InvalidConfig("build_cost_volume: eps must be > 0");

    CostVolume vol(fl.width, fl.height, dmax, 0.5f);
    vol.feature_dim = fl.dim;

    if (fl.kind == FeatureKind::CensusBits) {
        // All census vectors have norm sqrt(dim); the dot product is
        // dim - 2 * hamming. One table lookup per cell.
        const double n = std::sqrt(static_cast<double>(fl.dim));
        const double denom = norm == CorrelationNorm::Printed
                                 ? 2.0 * (n + eps) * (n + eps)
                                 : 2.0 * std::max(n * n, eps);
        std::vector<float> by_hamming(static_cast<size_t>(fl.dim) + 1);
        for (int hmg = 0; hmg <= fl.dim; ++hmg)
            by_hamming[hmg] =
                static_cast<float>((fl.dim - 2.0 * hmg) / denom + 0.5);
        for (int y = 0; y < vol.height; ++y) {
            for (int x = 0; x < vol.width; ++x) {
                const uint64_t left = fl.census.at(x, y);
                float* out = vol.cell(x, y);
                const int dlim = std::min(dmax, x + 1);
                for (int d = 0; d < dlim; ++d)
                    out[d] = by_hamming[std::popcount(left ^ fr.census.at(x - d, y))];
            }
        }
    } else {
        std::vector<double> rnorm(static_cast<size_t>(fl.width) * fl.height);
        for (int y = 0; y < fl.height; ++y)
            for (int x = 0; x < fl.width; ++x) {
                const float* v = fr.vector_at(x, y);
                double s = 0.0;
                for (int i = 0; i < fr.dim; ++i) s += static_cast<double>(v[i]) * v[i];
                rnorm[static_cast<size_t>(y) * fl.width + x] = std::sqrt(s);
            }
        for (int y = 0; y < vol.height; ++y) {
            for (int x = 0; x < vol.width; ++x) {
                const float* a = fl.vector_at(x, y);
                double na = 0.0;
                for (int i = 0; i < fl.dim; ++i) na += static_cast<double>(a[i]) * a[i];
                na = std::sqrt(na);
                float* out = vol.cell(x, y);
                const int dlim = std::min(dmax, x + 1);
                for (int d = 0; d < dlim; ++d) {
                    const float* b = fr.vector_at(x - d, y);
                    double dot = 0.0;
                    for (int i = 0; i < fl.dim; ++i)
                        dot += static_cast<double>(a[i]) * b[i];
                    const double nb = rnorm[static_cast<size_t>(y) * fl.width + (x - d)];
                    const double denom = norm == CorrelationNorm::Printed
                                             ? 2.0 * (na + eps) * (nb + eps)
                                             : 2.0 * std::max(na * nb, eps);
                    out[d] = static_cast<float>(dot / denom + 0.5);
                }
            }
        }
    }
    return vol;
}

// ---------------------------------------------------------------------------
// Guidance
// ---------------------------------------------------------------------------

/// Sparse external disparity hints g with validity mask v. Valid hints are
/// positive, finite, and below the consuming volume's disparity range.
struct GuidanceMap {
    Raster<double> g;
    Mask v;

    GuidanceMap() = default;
    GuidanceMap(int width, int height) : g(width, height, 0.0), v(width, height, 0) {}

    int width() const { return g.width(); }
    int height() const { return g.height(); }

    size_t hint_count() const {
        size_t n = 0;
        for (size_t i = 0; i < v.size(); ++i) n += v.data()[i] ? 1u : 0u;
        return n;
    }
};

struct GuidanceParams {
    double lambda = 10.0;        // Gaussian magnitude, >= 1
    double sigma = 1.0;          // Gaussian width in disparity pixels
    double sample_fraction = 0.10;

    void validate() const {
        if (lambda < 1.0) throw InvalidConfig("guidance lambda must be >= 1");
        if (sigma <= 0.0) throw InvalidConfig("guidance sigma must be > 0");
        if (sample_fraction <= 0.0 || sample_fraction > 1.0)
            throw InvalidConfig("guidance sample_fraction must be in (0, 1]");
    }
};

/// The hint kernel: lambda * exp(-(d - g(x,y))^2 / (2 sigma^2)).
inline double gaussian_guidance(int x, int y, double d, const GuidanceMap& guide,
                                const GuidanceParams& params) {
    const double diff = d - guide.g.at(x, y);
    return params.lambda * std::exp(-diff * diff / (2.0 * params.sigma * params.sigma));
}

/// Cost-volume modulation: C'(x,y,d) = (1 - v + v * f(x,y,d)) * C(x,y,d).
/// Pixels without a hint pass through bit-identical (the multiply is
/// skipped, not rounded). Hints outside (0, dmax) are ignored as if v = 0,
/// which keeps the map's validity invariant enforceable where dmax is known.
inline CostVolume modulate_cost_volume(const CostVolume& vol, const GuidanceMap& guide,
                                       const GuidanceParams& params) {
    params.validate();
    require_same_size_impl(vol.width, vol.height, guide.width(), guide.height(),
                           "modulate_cost_volume volume/guidance");
    CostVolume out = vol;
    const double inv2s2 = 1.0 / (2.0 * params.sigma * params.sigma);
    for (int y = 0; y < vol.height; ++y) {
        for (int x = 0; x < vol.width; ++x) {
            if (!guide.v.at(x, y)) continue;
            const double g = guide.g.at(x, y);
            if (!std::isfinite(g) || g <= 0.0 || g >= vol.dmax) continue;
            float* cell = out.cell(x, y);
            for (int d = 0; d < vol.dmax; ++d) {
                const double diff = d - g;
                const double f = params.lambda * std::exp(-diff * diff * inv2s2);
                cell[d] = static_cast<float>(cell[d] * f);
            }
        }
    }
    return out;
}

/// Draws an exact k = round(fraction * n) subset of the valid input pixels,
/// uniformly without replacement, deterministic in the seed. Non-finite and
/// non-positive input values never become hints. Optional Gaussian noise on
/// the retained hints supports robustness experiments.
inline GuidanceMap sample_guidance(const DisparityMap& d_m, double fraction, uint64_t seed,
                                   double noise_sigma = 0.0) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw InvalidConfig("sample_guidance fraction must be in (0, 1]");
    std::vector<uint32_t> candidates;
    const int w = d_m.width(), h = d_m.height();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!d_m.is_valid(x, y)) continue;
            const double v = d_m.data.at(x, y);
            if (std::isfinite(v) && v > 0.0)
                candidates.push_back(static_cast<uint32_t>(y) * w + x);
        }

    const size_t n = candidates.size();
    const size_t k = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
    Rng rng(mix64(seed, 0x9d1d));
    for (size_t i = 0; i < k && i + 1 < n; ++i) {
        const size_t j = i + static_cast<size_t>(rng.uniform_u64(n - i));
        std::swap(candidates[i], candidates[j]);
    }

    GuidanceMap guide(w, h);
    for (size_t i = 0; i < k; ++i) {
        const int x = static_cast<int>(candidates[i] % w);
        const int y = static_cast<int>(candidates[i] / w);
        double g = d_m.data.at(x, y);
        if (noise_sigma > 0.0) g += rng.normal(0.0, noise_sigma);
        if (!std::isfinite(g) || g <= 0.0) continue;
        guide.g.at(x, y) = g;
        guide.v.at(x, y) = 1;
    }
    return guide;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

enum class AggregationMethod { Box, Sgm };

struct SgmParams {
    double p1 = 0.03; // step penalty, score units
    double p2 = 0.5;  // jump penalty
    int paths = 8;    // 4 or 8

    void validate() const {
        if (p1 < 0.0 || p2 < p1) throw InvalidConfig("SGM penalties need 0 <= p1 <= p2");
        if (paths != 4 && paths != 8) throw InvalidConfig("SGM paths must be 4 or 8");
    }
};

namespace detail {

inline CostVolume aggregate_box(const CostVolume& vol, int radius) {
    CostVolume out(vol.width, vol.height, vol.dmax);
    out.feature_dim = vol.feature_dim;
    IntegralImage<double> integral;
    for (int d = 0; d < vol.dmax; ++d) {
        integral.build(vol.width, vol.height,
                       [&](int x, int y) { return static_cast<double>(vol.at(x, y, d)); });
        for (int y = 0; y < vol.height; ++y)
            for (int x = 0; x < vol.width; ++x)
                out.at(x, y, d) = static_cast<float>(integral.window(x, y, radius) /
                                                     integral.window_count(x, y, radius));
    }
    return out;
}

/// One SGM direction: the standard min-plus recurrence on dissimilarity,
/// normalized by subtracting the predecessor's minimum. Results accumulate
/// into `accum`.
inline void sgm_direction(const CostVolume& dissim, int dir_x, int dir_y,
                          const SgmParams& params, CostVolume& accum) {
    const int w = dissim.width, h = dissim.height, dmax = dissim.dmax;
    const float p1 = static_cast<float>(params.p1);
    const float p2 = static_cast<float>(params.p2);
    // L rows for the previous and current image row along the sweep
    std::vector<float> prev_row(static_cast<size_t>(w) * dmax);
    std::vector<float> cur_row(static_cast<size_t>(w) * dmax);
    std::vector<float> prev_min_row(w), cur_min_row(w);

    const int y0 = dir_y >= 0 ? 0 : h - 1, y_end = dir_y >= 0 ? h : -1;
    const int x0 = dir_x >= 0 ? 0 : w - 1, x_end = dir_x >= 0 ? w : -1;
    const int y_step = dir_y >= 0 ? 1 : -1, x_step = dir_x >= 0 ? 1 : -1;

    for (int y = y0; y != y_end; y += y_step) {
        for (int x = x0; x != x_end; x += x_step) {
            // Sweep order guarantees an in-bounds predecessor is already done.
            const int px = x - dir_x, py = y - dir_y;
            const bool has_pred = px >= 0 && px < w && py >= 0 && py < h;
            float* L = cur_row.data() + static_cast<size_t>(x) * dmax;
            const float* base = dissim.cell(x, y);
            if (!has_pred) {
                std::memcpy(L, base, sizeof(float) * dmax);
            } else {
                const float* Lp = (dir_y == 0 ? cur_row.data() : prev_row.data()) +
                                  static_cast<size_t>(px) * dmax;
                const float pmin = dir_y == 0 ? cur_min_row[px] : prev_min_row[px];
                const float jump = pmin + p2;
                for (int d = 0; d < dmax; ++d) {
                    float best = Lp[d];
                    if (d > 0) best = std::min(best, Lp[d - 1] + p1);
                    if (d + 1 < dmax) best = std::min(best, Lp[d + 1] + p1);
                    best = std::min(best, jump);
                    L[d] = base[d] + best - pmin;
                }
            }
            float m = L[0];
            for (int d = 1; d < dmax; ++d) m = std::min(m, L[d]);
            cur_min_row[x] = m;
            float* acc = accum.cell(x, y);
            for (int d = 0; d < dmax; ++d) acc[d] += L[d];
        }
        std::swap(prev_row, cur_row);
        std::swap(prev_min_row, cur_min_row);
    }
}

inline CostVolume aggregate_sgm(const CostVolume& vol, const SgmParams& params) {
    CostVolume dissim(vol.width, vol.height, vol.dmax);
    for (size_t i = 0; i < vol.scores.size(); ++i)
        dissim.scores[i] = 1.0f - vol.scores[i];

    CostVolume accum(vol.width, vol.height, vol.dmax, 0.0f);
    static constexpr int kDirs[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                        {1, 1},  {-1, 1}, {1, -1}, {-1, -1}};
    for (int i = 0; i < params.paths; ++i)
        sgm_direction(dissim, kDirs[i][0], kDirs[i][1], params, accum);

    CostVolume out(vol.width, vol.height, vol.dmax);
    out.feature_dim = vol.feature_dim;
    const float inv_paths = 1.0f / static_cast<float>(params.paths);
    for (size_t i = 0; i < out.scores.size(); ++i)
        out.scores[i] = 1.0f - accum.scores[i] * inv_paths;
    return out;
}

} // namespace detail

/// Spatial regularization of the volume. Box: per-slice windowed mean
/// (border windows clamped), which leaves constant volumes bit-identical.
/// SGM: semi-global path aggregation run on dissimilarity = 1 - score and
/// mapped back, so the result keeps similarity semantics.
inline CostVolume aggregate(const CostVolume& vol, AggregationMethod method,
                            int box_radius = 4, const SgmParams& sgm = {}) {
    if (method == AggregationMethod::Box) {
        if (box_radius < 1) throw InvalidConfig("box aggregation radius must be >= 1");
        return detail::aggregate_box(vol, box_radius);
    }
    sgm.validate();
    return detail::aggregate_sgm(vol, sgm);
}

// ---------------------------------------------------------------------------
// Extraction and consistency
// ---------------------------------------------------------------------------

/// Winner-take-all over d with 3-point parabola refinement and a uniqueness
/// gate: the runner-up score outside the winner's immediate neighborhood
/// must stay below ratio * best. Flat or non-positive slices come out
/// invalid.
inline DisparityMap extract_disparity(const CostVolume& vol, double uniqueness_ratio = 0.98,
                                      bool subpixel = true) {
    if (uniqueness_ratio <= 0.0 || uniqueness_ratio > 1.0)
        throw InvalidConfig("extract_disparity uniqueness ratio must be in (0, 1]");
    DisparityMap out(vol.width, vol.height);
    for (int y = 0; y < vol.height; ++y) {
        for (int x = 0; x < vol.width; ++x) {
            const float* s = vol.cell(x, y);
            int best_d = 0;
            for (int d = 1; d < vol.dmax; ++d)
                if (s[d] > s[best_d]) best_d = d;
            const float best = s[best_d];
            if (!(best > 0.0f)) continue;

            float second = -std::numeric_limits<float>::infinity();
            for (int d = 0; d < vol.dmax; ++d)
                if (std::abs(d - best_d) > 1) second = std::max(second, s[d]);
            if (std::isfinite(second) &&
                !(second <= static_cast<float>(uniqueness_ratio) * best))
                continue;

            double delta = 0.0;
            if (subpixel && best_d > 0 && best_d + 1 < vol.dmax) {
                const double cm = s[best_d - 1], c0 = best, cp = s[best_d + 1];
                const double denom = cm + cp - 2.0 * c0;
                if (denom < -1e-12)
                    delta = std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
            }
            out.set(x, y, best_d + delta);
        }
    }
    return out;
}

/// Left-right consistency: keeps left pixels whose disparity agrees with the
/// right map at the matched column within `tol`; everything else (including
/// pixels whose match falls outside the right image or on an invalid right
/// pixel) is invalidated. Classic occlusion filter.
inline DisparityMap left_right_check(const DisparityMap& d_left, const DisparityMap& d_right,
                                     double tol = 1.0) {
    if (tol <= 0.0) throw InvalidConfig("left_right_check tolerance must be > 0");
    require_same_size(d_left.data, d_right.data, "left_right_check maps");
    DisparityMap out = d_left;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            if (!out.is_valid(x, y)) continue;
            const double dl = out.data.at(x, y);
            const int xr = x - static_cast<int>(std::lround(dl));
            if (!out.data.in_bounds(xr, y) || !d_right.is_valid(xr, y) ||
                std::abs(dl - d_right.data.at(xr, y)) > tol)
                out.invalidate(x, y);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full matcher
// ---------------------------------------------------------------------------

struct MatcherConfig {
    FeatureKind features = FeatureKind::CensusBits;
    int dmax = 192;
    double eps = 1e-4;
    CorrelationNorm correlation = CorrelationNorm::Printed;
    AggregationMethod aggregation = AggregationMethod::Box;
    int box_radius = 4;
    SgmParams sgm;
    GuidanceParams guidance;
    double uniqueness_ratio = 0.98;
    bool subpixel = true;
    bool lrc = true;
    double lrc_tol = 1.0;

    void validate() const {
        if (dmax < 2) throw InvalidConfig("matcher dmax must be >= 2");
        if (eps <= 0.0) throw InvalidConfig("matcher eps must be > 0");
        if (box_radius < 1) throw InvalidConfig("matcher box radius must be >= 1");
        if (uniqueness_ratio <= 0.0 || uniqueness_ratio > 1.0)
            throw InvalidConfig("matcher uniqueness ratio must be in (0, 1]");
        if (lrc_tol <= 0.0) throw InvalidConfig("matcher LRC tolerance must be > 0");
        sgm.validate();
        guidance.validate();
    }
};

namespace detail {

/// Right-reference volume by re-indexing: scoring right pixel x against left
/// pixel x+d evaluates the same feature pair as the left volume's cell
/// (x+d, y, d), so no second correlation pass is needed. Cells whose left
/// partner falls outside the image get the uninformative 0.5. Applied to a
/// modulated volume this carries each hint to the same matched pair seen
/// from the right.
inline CostVolume reindex_right(const CostVolume& left) {
    CostVolume right(left.width, left.height, left.dmax, 0.5f);
    right.feature_dim = left.feature_dim;
    for (int y = 0; y < left.height; ++y)
        for (int x = 0; x < left.width; ++x) {
            float* out = right.cell(x, y);
            const int dlim = std::min(left.dmax, left.width - x);
            for (int d = 0; d < dlim; ++d) out[d] = left.at(x + d, y, d);
        }
    return right;
}

} // namespace detail

/// The binocular matcher: features, correlation volume, optional hint
/// modulation, aggregation, winner-take-all extraction, optional LRC.
/// Passing no guidance gives the pure passive matcher.
inline DisparityMap match_guided(const ImageGray& left, const ImageGray& right,
                                 const GuidanceMap* guide, const MatcherConfig& cfg = {}) {
    cfg.validate();
    require_same_size(left, right, "match_guided image pair");

    const FeatureMap fl = extract_features(left, cfg.features);
    const FeatureMap fr = extract_features(right, cfg.features);
    CostVolume vol = build_cost_volume(fl, fr, cfg.dmax, cfg.eps, cfg.correlation);
    if (guide != nullptr) vol = modulate_cost_volume(vol, *guide, cfg.guidance);

    const CostVolume agg_left = aggregate(vol, cfg.aggregation, cfg.box_radius, cfg.sgm);
    DisparityMap d_left = extract_disparity(agg_left, cfg.uniqueness_ratio, cfg.subpixel);
    if (!cfg.lrc) return d_left;

    const CostVolume vol_right = detail::reindex_right(vol);
    const CostVolume agg_right =
        aggregate(vol_right, cfg.aggregation, cfg.box_radius, cfg.sgm);
    const DisparityMap d_right =
        extract_disparity(agg_right, cfg.uniqueness_ratio, cfg.subpixel);
    return left_right_check(d_left, d_right, cfg.lrc_tol);
}

} // namespace monostereo
