#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "monostereo/errors.hpp"
#include "monostereo/geometry.hpp"
#include "monostereo/image.hpp"

namespace monostereo {

// ---------------------------------------------------------------------------
// Bit-packed binary image
// ---------------------------------------------------------------------------

/// One bit per pixel, packed LSB-first into 64-bit words per row. Padding
/// bits beyond the width are always zero; the matching kernels rely on that.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(int width, int height)
        : w_(width), h_(height), wpr_((width + 63) / 64),
          words_(static_cast<size_t>(wpr_) * height, 0) {}

    int width() const { return w_; }
    int height() const { return h_; }
    int words_per_row() const { return wpr_; }

    bool bit(int x, int y) const {
        return (row_words(y)[x >> 6] >> (x & 63)) & 1u;
    }
    void set_bit(int x, int y, bool value) {
        uint64_t& word = row_words(y)[x >> 6];
        const uint64_t mask = uint64_t{1} << (x & 63);
        word = value ? (word | mask) : (word & ~mask);
    }

    uint64_t* row_words(int y) { return words_.data() + static_cast<size_t>(y) * wpr_; }
    const uint64_t* row_words(int y) const {
        return words_.data() + static_cast<size_t>(y) * wpr_;
    }

    bool same_size(const BinaryImage& o) const { return w_ == o.w_ && h_ == o.h_; }

    bool operator==(const BinaryImage& o) const {
        return w_ == o.w_ && h_ == o.h_ && words_ == o.words_;
    }

private:
    int w_ = 0, h_ = 0, wpr_ = 0;
    std::vector<uint64_t> words_;
};

namespace detail {

/// 64 bits of a packed row starting at signed bit position `start`; positions
/// outside [0, 64*nwords) read as zero.
inline uint64_t extract_bits(const uint64_t* words, int nwords, int start) {
    const int q = start >> 6; // arithmetic shift: floor division
    const int r = start & 63;
    const uint64_t lo = (q >= 0 && q < nwords) ? words[q] : 0;
    const uint64_t hi = (q + 1 >= 0 && q + 1 < nwords) ? words[q + 1] : 0;
    return r == 0 ? lo : (lo >> r) | (hi << (64 - r));
}

/// Mask of bit positions [lo, hi) within word index wi of a packed row.
inline uint64_t column_mask(int lo, int hi, int wi) {
    const int base = wi * 64;
    const int a = std::clamp(lo - base, 0, 64);
    const int b = std::clamp(hi - base, 0, 64);
    if (a >= b) return 0;
    const uint64_t upper = b == 64 ? ~uint64_t{0} : (uint64_t{1} << b) - 1;
    const uint64_t lower = (uint64_t{1} << a) - 1;
    return upper & ~lower;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Binarization
// ---------------------------------------------------------------------------

/// Threshold against the local mean of the (2r+1)^2 neighborhood, window
/// clamped at the borders. Strictly-greater, so constant regions binarize to
/// zero, and any affine brightness change a*I+b with a > 0 leaves the result
/// unchanged.
inline BinaryImage binarize(const ImageGray& img, int radius = 5) {
    if (radius < 1) throw InvalidConfig("binarize radius must be >= 1");
    IntegralImage<double> integral(img, [](float v) { return static_cast<double>(v); });
    BinaryImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double mean =
                integral.window(x, y, radius) / integral.window_count(x, y, radius);
            if (img.at(x, y) > mean) out.set_bit(x, y, true);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Block matching
// ---------------------------------------------------------------------------

struct MslMatchParams {
    int window = 21;             // odd, >= 5
    int search_min = -64;        // signed shifts, live pixel x matched to reference x+s
    int search_max = 128;
    double min_valid_ratio = 0.8;  // window fraction that must overlap both images
    double uniqueness_ratio = 0.9; // best/second-best cost ratio bound
    int binarize_radius = 5;

    void validate() const {
        if (window < 5 || window % 2 == 0)
            throw InvalidConfig("matching window must be odd and >= 5");
        if (search_min >= search_max)
            throw InvalidConfig("search_min must be less than search_max");
        if (min_valid_ratio <= 0.0 || min_valid_ratio > 1.0)
            throw InvalidConfig("min_valid_ratio must be in (0, 1]");
        if (uniqueness_ratio <= 0.0 || uniqueness_ratio >= 1.0)
            throw InvalidConfig("uniqueness_ratio must be in (0, 1)");
    }
};

/// Windowed Hamming distances between `live` and `reference` shifted by
/// `shift`: out(x,y) counts mismatching bits over the (2r+1)^2 window around
/// (x,y), restricted to columns where both images are in bounds (window
/// clamped at borders). This is the production kernel: packed XOR, then
/// popcount over extracted window slices, then a sliding vertical sum.
inline Raster<uint32_t> hamming_plane(const BinaryImage& live, const BinaryImage& reference,
                                      int shift, int window_radius) {
    if (!live.same_size(reference))
        throw SizeMismatch("hamming_plane: live and reference sizes differ");
    const int w = live.width(), h = live.height(), wpr = live.words_per_row();
    const int win = 2 * window_radius + 1;

    // XOR rows, with columns where the shifted reference leaves the image
    // zeroed so they never count as mismatches.
    const int col_lo = std::max(0, -shift);
    const int col_hi = std::min(w, w - shift);
    std::vector<uint64_t> xbits(static_cast<size_t>(wpr) * h, 0);
    if (col_lo < col_hi) {
        for (int y = 0; y < h; ++y) {
            const uint64_t* lrow = live.row_words(y);
            const uint64_t* rrow = reference.row_words(y);
            uint64_t* xrow = xbits.data() + static_cast<size_t>(y) * wpr;
            for (int wi = 0; wi < wpr; ++wi) {
                const uint64_t mask = detail::column_mask(col_lo, col_hi, wi);
                if (!mask) continue;
                const uint64_t shifted = detail::extract_bits(rrow, wpr, wi * 64 + shift);
                xrow[wi] = (lrow[wi] ^ shifted) & mask;
            }
        }
    }

    // Horizontal window popcounts per pixel.
    Raster<uint16_t> hcount(w, h, 0);
    for (int y = 0; y < h; ++y) {
        const uint64_t* xrow = xbits.data() + static_cast<size_t>(y) * wpr;
        uint16_t* out_row = hcount.row(y);
        for (int x = 0; x < w; ++x) {
            uint32_t c = 0;
            int pos = x - window_radius;
            int remaining = win;
            while (remaining > 0) {
                const int take = std::min(64, remaining);
                uint64_t bits = detail::extract_bits(xrow, wpr, pos);
                if (take < 64) bits &= (uint64_t{1} << take) - 1;
                c += static_cast<uint32_t>(std::popcount(bits));
                pos += take;
                remaining -= take;
            }
            out_row[x] = static_cast<uint16_t>(c);
        }
    }

    // Sliding vertical sum over the clamped row window.
    Raster<uint32_t> out(w, h, 0);
    std::vector<uint32_t> acc(static_cast<size_t>(w), 0);
    for (int y = 0; y <= std::min(window_radius, h - 1); ++y) {
        const uint16_t* row = hcount.row(y);
        for (int x = 0; x < w; ++x) acc[x] += row[x];
    }
    for (int y = 0; y < h; ++y) {
        if (y > 0) {
            const int add = y + window_radius, drop = y - window_radius - 1;
            if (add < h) {
                const uint16_t* row = hcount.row(add);
                for (int x = 0; x < w; ++x) acc[x] += row[x];
            }
            if (drop >= 0) {
                const uint16_t* row = hcount.row(drop);
                for (int x = 0; x < w; ++x) acc[x] -= row[x];
            }
        }
        std::copy(acc.begin(), acc.end(), out.row(y));
    }
    return out;
}

/// Number of window cells contributing to hamming_plane(x, y) at `shift`:
/// columns clipped to both images, rows clipped to the image.
inline int hamming_overlap(int x, int y, int shift, int window_radius, int width, int height) {
    const int col_lo = std::max(0, -shift);
    const int col_hi = std::min(width, width - shift);
    const int cols =
        std::max(0, std::min(x + window_radius, col_hi - 1) - std::max(x - window_radius, col_lo) + 1);
    const int rows =
        std::min(y + window_radius, height - 1) - std::max(y - window_radius, 0) + 1;
    return cols * rows;
}

/// Per-pixel signed shift minimizing the normalized windowed Hamming cost
/// over [search_min, search_max], with 3-point parabola sub-pixel refinement.
/// A pixel is invalid when every shift lacks window support, or when the best
/// cost is not clearly below the runner-up (runner-up excludes the immediate
/// neighbors of the winner, so a smooth cost valley does not defeat itself).
inline DisparityMap block_match(const BinaryImage& live, const BinaryImage& reference,
                                const MslMatchParams& params = {}) {
    params.validate();
    if (!live.same_size(reference))
        throw SizeMismatch("block_match: live and reference sizes differ");
    const int w = live.width(), h = live.height();
    const int wr = params.window / 2;
    const int area = params.window * params.window;
    const int min_overlap = static_cast<int>(std::ceil(params.min_valid_ratio * area));
    const size_t n = static_cast<size_t>(w) * h;

    constexpr float kInf = std::numeric_limits<float>::infinity();
    constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();
    struct Candidate {
        float cost[4] = {kInf, kInf, kInf, kInf};
        int16_t shift[4] = {0, 0, 0, 0};
    };
    std::vector<float> best_cost(n, kInf);
    std::vector<int16_t> best_shift(n, 0);
    std::vector<float> c_before(n, kNaN); // cost one shift before / after the winner
    std::vector<float> c_after(n, kNaN);
    std::vector<Candidate> top(n);
    Raster<float> prev_plane(w, h, kNaN);
    Raster<float> cur_plane(w, h, kNaN);

    for (int s = params.search_min; s <= params.search_max; ++s) {
        const Raster<uint32_t> counts = hamming_plane(live, reference, s, wr);
        const int col_lo = std::max(0, -s);
        const int col_hi = std::min(w, w - s);
        for (int y = 0; y < h; ++y) {
            const int rows = std::min(y + wr, h - 1) - std::max(y - wr, 0) + 1;
            const uint32_t* count_row = counts.row(y);
            float* cur_row = cur_plane.row(y);
            for (int x = 0; x < w; ++x) {
                const int cols =
                    std::max(0, std::min(x + wr, col_hi - 1) - std::max(x - wr, col_lo) + 1);
                const int overlap = cols * rows;
                const float c =
                    overlap > 0 ? static_cast<float>(count_row[x]) / overlap : kNaN;
                cur_row[x] = c;

                const size_t i = static_cast<size_t>(y) * w + x;
                if (std::isfinite(best_cost[i]) && best_shift[i] == s - 1)
                    c_after[i] = c;
                if (overlap < min_overlap || !(c < best_cost[i])) {
                    if (overlap >= min_overlap) {
                        // keep the runner-up tracker complete
                        Candidate& t = top[i];
                        if (c < t.cost[3]) {
                            int k = 3;
                            while (k > 0 && c < t.cost[k - 1]) {
                                t.cost[k] = t.cost[k - 1];
                                t.shift[k] = t.shift[k - 1];
                                --k;
                            }
                            t.cost[k] = c;
                            t.shift[k] = static_cast<int16_t>(s);
                        }
                    }
                    continue;
                }
                c_before[i] = s > params.search_min ? prev_plane.at(x, y) : kNaN;
                c_after[i] = kNaN;
                best_cost[i] = c;
                best_shift[i] = static_cast<int16_t>(s);
                Candidate& t = top[i];
                int k = 3;
                while (k > 0 && c < t.cost[k - 1]) {
                    t.cost[k] = t.cost[k - 1];
                    t.shift[k] = t.shift[k - 1];
                    --k;
                }
                t.cost[k] = c;
                t.shift[k] = static_cast<int16_t>(s);
            }
        }
        std::swap(prev_plane, cur_plane);
    }

    DisparityMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (!std::isfinite(best_cost[i])) continue;

            float second = kInf;
            const Candidate& t = top[i];
            for (int k = 0; k < 4; ++k)
                if (std::isfinite(t.cost[k]) && std::abs(t.shift[k] - best_shift[i]) > 1)
                    second = std::min(second, t.cost[k]);
            if (!(second > 0.0f) || !(best_cost[i] <= params.uniqueness_ratio * second))
                continue;

            double delta = 0.0;
            const double cm = c_before[i], cp = c_after[i], c0 = best_cost[i];
            if (std::isfinite(cm) && std::isfinite(cp)) {
                const double denom = cm + cp - 2.0 * c0;
                if (denom > 1e-12)
                    delta = std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
            }
            out.set(x, y, best_shift[i] + delta);
        }
    }
    return out;
}

/// Full structured-light front end: binarize both images, block-match the
/// live frame against the stored reference, convert the reference-relative
/// disparity to depth.
inline DepthMap msl_depth(const ImageGray& live_ir, const ImageGray& reference,
                          const RigModel& rig, const MslMatchParams& params = {}) {
    require_same_size(live_ir, reference, "msl_depth live/reference");
    const BinaryImage live_bits = binarize(live_ir, params.binarize_radius);
    const BinaryImage ref_bits = binarize(reference, params.binarize_radius);
    const DisparityMap d_m = block_match(live_bits, ref_bits, params);
    return msl_disparity_to_depth(d_m, rig);
}

} // namespace monostereo
