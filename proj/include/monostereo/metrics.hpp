#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "monostereo/errors.hpp"
#include "monostereo/image.hpp"

namespace monostereo {

/// How pixels with valid ground truth but no prediction are scored.
/// Penalize charges them as failures at every threshold and adds a fixed
/// disparity penalty to the EPE sum; Skip drops them from the average.
/// Penalize is the default so a method cannot buy accuracy by invalidating
/// hard pixels.
enum class MaskPolicy { PenalizeInvalid, SkipInvalid };

struct EvalResult {
    double epe = 0.0;
    std::vector<std::pair<double, double>> bad; // (threshold px, percent)
    size_t n_evaluated = 0;
    MaskPolicy policy = MaskPolicy::PenalizeInvalid;

    double bad_at(double tau) const {
        for (const auto& [t, pct] : bad)
            if (t == tau) return pct;
        throw InvalidConfig("no Bad percentage recorded at requested threshold");
    }
};

inline const std::vector<double>& default_bad_thresholds() {
    static const std::vector<double> t{0.5, 1.0, 2.0};
    return t;
}

/// EPE (mean |pred - gt|) and Bad-tau (% of pixels with error strictly above
/// tau) over the pixels where the ground truth is valid. Under the penalty
/// policy an invalid prediction counts `penalty_disparity` toward the EPE
/// and fails every threshold; under the skip policy it is excluded.
inline EvalResult evaluate(const DisparityMap& pred, const DisparityMap& gt,
                           const std::vector<double>& thresholds = default_bad_thresholds(),
                           MaskPolicy policy = MaskPolicy::PenalizeInvalid,
                           double penalty_disparity = 192.0) {
    require_same_size(pred.data, gt.data, "evaluate pred/gt");
    EvalResult result;
    result.policy = policy;

    std::vector<size_t> over(thresholds.size(), 0);
    double err_sum = 0.0;
    size_t n = 0;
    size_t gt_valid = 0;
    for (int y = 0; y < gt.height(); ++y) {
        for (int x = 0; x < gt.width(); ++x) {
            if (!gt.is_valid(x, y)) continue;
            ++gt_valid;
            if (!pred.is_valid(x, y)) {
                if (policy == MaskPolicy::SkipInvalid) continue;
                err_sum += penalty_disparity;
                ++n;
                for (size_t t = 0; t < thresholds.size(); ++t) ++over[t];
                continue;
            }
            const double err = std::abs(pred.data.at(x, y) - gt.data.at(x, y));
            err_sum += err;
            ++n;
            for (size_t t = 0; t < thresholds.size(); ++t)
                if (err > thresholds[t]) ++over[t];
        }
    }
    if (gt_valid == 0) throw EmptyGroundTruth("evaluate: ground truth has no valid pixels");

    result.n_evaluated = n;
    result.epe = n > 0 ? err_sum / static_cast<double>(n) : 0.0;
    for (size_t t = 0; t < thresholds.size(); ++t)
        result.bad.emplace_back(thresholds[t],
                                n > 0 ? 100.0 * static_cast<double>(over[t]) / n : 0.0);
    return result;
}

/// Fraction of ground-truth-valid pixels that carry a valid prediction.
inline double valid_density(const DisparityMap& pred, const DisparityMap& gt) {
    require_same_size(pred.data, gt.data, "valid_density pred/gt");
    size_t both = 0, gt_valid = 0;
    for (int y = 0; y < gt.height(); ++y)
        for (int x = 0; x < gt.width(); ++x) {
            if (!gt.is_valid(x, y)) continue;
            ++gt_valid;
            if (pred.is_valid(x, y)) ++both;
        }
    return gt_valid > 0 ? static_cast<double>(both) / gt_valid : 0.0;
}

// ---------------------------------------------------------------------------
// Method comparison report
// ---------------------------------------------------------------------------

struct ComparisonReport {
    std::string text; // aligned table, best value per column starred
    std::string csv;
    nlohmann::ordered_json json;
};

namespace detail {

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

} // namespace detail

/// Renders named evaluation rows side by side. Lower is better in every
/// column; the minimum per column is flagged with '*' in the text table and
/// named in the JSON. All rows must share the same threshold list.
inline ComparisonReport compare(const std::vector<std::pair<std::string, EvalResult>>& rows) {
    if (rows.empty()) throw InvalidConfig("compare: no evaluation rows");
    const auto& taus = rows.front().second.bad;
    for (const auto& [name, r] : rows) {
        if (r.bad.size() != taus.size())
            throw InvalidConfig("compare: rows use different threshold lists");
        for (size_t t = 0; t < taus.size(); ++t)
            if (r.bad[t].first != taus[t].first)
                throw InvalidConfig("compare: rows use different threshold lists");
    }

    const size_t ncols = 1 + taus.size();
    // column-wise minima
    std::vector<size_t> best_row(ncols, 0);
    for (size_t i = 1; i < rows.size(); ++i) {
        const EvalResult& r = rows[i].second;
        if (r.epe < rows[best_row[0]].second.epe) best_row[0] = i;
        for (size_t t = 0; t < taus.size(); ++t)
            if (r.bad[t].second < rows[best_row[t + 1]].second.bad[t].second)
                best_row[t + 1] = i;
    }

    std::vector<std::string> headers{"method", "EPE"};
    for (const auto& [tau, _] : taus)
        headers.push_back("Bad" + detail::format_fixed(tau, 1) + "(%)");

    std::vector<std::vector<std::string>> cells;
    for (size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::string> row{rows[i].first};
        row.push_back(detail::format_fixed(rows[i].second.epe, 3) +
                      (best_row[0] == i ? "*" : ""));
        for (size_t t = 0; t < taus.size(); ++t)
            row.push_back(detail::format_fixed(rows[i].second.bad[t].second, 2) +
                          (best_row[t + 1] == i ? "*" : ""));
        cells.push_back(std::move(row));
    }

    ComparisonReport report;

    std::vector<size_t> widths(headers.size());
    for (size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : cells) widths[c] = std::max(widths[c], row[c].size());
    }
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (size_t c = 0; c < row.size(); ++c) {
            report.text += row[c];
            report.text.append(widths[c] - row[c].size(), ' ');
            if (c + 1 < row.size()) report.text += "  ";
        }
        report.text += '\n';
    };
    emit_row(headers);
    for (const auto& row : cells) emit_row(row);

    report.csv = "method,epe";
    for (const auto& [tau, _] : taus) report.csv += ",bad" + detail::format_fixed(tau, 1);
    report.csv += '\n';
    for (const auto& [name, r] : rows) {
        report.csv += name + "," + detail::format_fixed(r.epe, 3);
        for (const auto& [_, pct] : r.bad) report.csv += "," + detail::format_fixed(pct, 2);
        report.csv += '\n';
    }

    report.json["columns"] = [&] {
        std::vector<std::string> cols{"epe"};
        for (const auto& [tau, _] : taus) cols.push_back("bad" + detail::format_fixed(tau, 1));
        return cols;
    }();
    report.json["rows"] = nlohmann::ordered_json::array();
    for (const auto& [name, r] : rows) {
        nlohmann::ordered_json row;
        row["method"] = name;
        row["epe"] = detail::format_fixed(r.epe, 3);
        for (const auto& [tau, pct] : r.bad)
            row["bad" + detail::format_fixed(tau, 1)] = detail::format_fixed(pct, 2);
        row["n_evaluated"] = r.n_evaluated;
        row["mask_policy"] =
            r.policy == MaskPolicy::PenalizeInvalid ? "penalize-invalid" : "skip-invalid";
        report.json["rows"].push_back(std::move(row));
    }
    nlohmann::ordered_json best;
    best["epe"] = rows[best_row[0]].first;
    for (size_t t = 0; t < taus.size(); ++t)
        best["bad" + detail::format_fixed(taus[t].first, 1)] = rows[best_row[t + 1]].first;
    report.json["best"] = std::move(best);
    return report;
}

} // namespace monostereo
