#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "monostereo/errors.hpp"
#include "monostereo/metrics.hpp"
#include "monostereo/msl.hpp"
#include "monostereo/spacetime_gt.hpp"
#include "monostereo/speckle_sim.hpp"
#include "monostereo/stereo_core.hpp"

namespace monostereo::io {

using nlohmann::json;

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::parse_error& e) {
        throw MalformedHeader(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

// --- enum name maps --------------------------------------------------------

inline std::string to_string(FeatureKind k) {
    return k == FeatureKind::CensusBits ? "census" : "patch";
}
inline std::string to_string(CorrelationNorm n) {
    return n == CorrelationNorm::Printed ? "printed" : "cosine";
}
inline std::string to_string(AggregationMethod m) {
    return m == AggregationMethod::Box ? "box" : "sgm";
}
inline std::string to_string(MaskPolicy p) {
    return p == MaskPolicy::PenalizeInvalid ? "penalize" : "skip";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "census") return FeatureKind::CensusBits;
    if (s == "patch") return FeatureKind::NormalizedPatch;
    throw InvalidConfig("unknown feature kind '" + s + "' (census|patch)");
}
inline CorrelationNorm correlation_from_string(const std::string& s) {
    if (s == "printed") return CorrelationNorm::Printed;
    if (s == "cosine") return CorrelationNorm::Cosine;
    throw InvalidConfig("unknown correlation norm '" + s + "' (printed|cosine)");
}
inline AggregationMethod aggregation_from_string(const std::string& s) {
    if (s == "box") return AggregationMethod::Box;
    if (s == "sgm") return AggregationMethod::Sgm;
    throw InvalidConfig("unknown aggregation '" + s + "' (box|sgm)");
}
inline MaskPolicy mask_policy_from_string(const std::string& s) {
    if (s == "penalize") return MaskPolicy::PenalizeInvalid;
    if (s == "skip") return MaskPolicy::SkipInvalid;
    throw InvalidConfig("unknown mask policy '" + s + "' (penalize|skip)");
}

// --- parameter blocks ------------------------------------------------------

inline json render_to_json(const RenderOptions& r) {
    return json{{"ambient", r.ambient},
                {"dot_gain", r.dot_gain},
                {"attenuation_exponent", r.attenuation_exponent},
                {"attenuation_ref", r.attenuation_ref},
                {"near_clip", r.near_clip},
                {"splat_sigma", r.splat_sigma},
                {"noise_sigma", r.noise_sigma}};
}

inline RenderOptions render_from_json(const json& j) {
    RenderOptions r;
    r.ambient = j.value("ambient", r.ambient);
    r.dot_gain = j.value("dot_gain", r.dot_gain);
    r.attenuation_exponent = j.value("attenuation_exponent", r.attenuation_exponent);
    r.attenuation_ref = j.value("attenuation_ref", r.attenuation_ref);
    r.near_clip = j.value("near_clip", r.near_clip);
    r.splat_sigma = j.value("splat_sigma", r.splat_sigma);
    r.noise_sigma = j.value("noise_sigma", r.noise_sigma);
    return r;
}

inline json msl_to_json(const MslMatchParams& p) {
    return json{{"window", p.window},
                {"search_min", p.search_min},
                {"search_max", p.search_max},
                {"min_valid_ratio", p.min_valid_ratio},
                {"uniqueness_ratio", p.uniqueness_ratio},
                {"binarize_radius", p.binarize_radius}};
}

inline MslMatchParams msl_from_json(const json& j) {
    MslMatchParams p;
    p.window = j.value("window", p.window);
    p.search_min = j.value("search_min", p.search_min);
    p.search_max = j.value("search_max", p.search_max);
    p.min_valid_ratio = j.value("min_valid_ratio", p.min_valid_ratio);
    p.uniqueness_ratio = j.value("uniqueness_ratio", p.uniqueness_ratio);
    p.binarize_radius = j.value("binarize_radius", p.binarize_radius);
    return p;
}

inline json spacetime_to_json(const SpacetimeParams& p) {
    return json{{"dmax", p.dmax},
                {"window", p.window},
                {"binarize_radius", p.binarize_radius},
                {"min_valid_ratio", p.min_valid_ratio},
                {"uniqueness_ratio", p.uniqueness_ratio},
                {"lrc_tol", p.lrc_tol},
                {"subpixel", p.subpixel}};
}

inline SpacetimeParams spacetime_from_json(const json& j) {
    SpacetimeParams p;
    p.dmax = j.value("dmax", p.dmax);
    p.window = j.value("window", p.window);
    p.binarize_radius = j.value("binarize_radius", p.binarize_radius);
    p.min_valid_ratio = j.value("min_valid_ratio", p.min_valid_ratio);
    p.uniqueness_ratio = j.value("uniqueness_ratio", p.uniqueness_ratio);
    p.lrc_tol = j.value("lrc_tol", p.lrc_tol);
    p.subpixel = j.value("subpixel", p.subpixel);
    return p;
}

inline json matcher_to_json(const MatcherConfig& m) {
    return json{{"features", to_string(m.features)},
                {"dmax", m.dmax},
                {"eps", m.eps},
                {"correlation", to_string(m.correlation)},
                {"aggregation", to_string(m.aggregation)},
                {"box_radius", m.box_radius},
                {"sgm", json{{"p1", m.sgm.p1}, {"p2", m.sgm.p2}, {"paths", m.sgm.paths}}},
                {"guidance", json{{"lambda", m.guidance.lambda},
                                  {"sigma", m.guidance.sigma},
                                  {"sample_fraction", m.guidance.sample_fraction}}},
                {"uniqueness_ratio", m.uniqueness_ratio},
                {"subpixel", m.subpixel},
                {"lrc", m.lrc},
                {"lrc_tol", m.lrc_tol}};
}

inline MatcherConfig matcher_from_json(const json& j) {
    MatcherConfig m;
    if (j.contains("features")) m.features = feature_kind_from_string(j.at("features"));
    m.dmax = j.value("dmax", m.dmax);
    m.eps = j.value("eps", m.eps);
    if (j.contains("correlation")) m.correlation = correlation_from_string(j.at("correlation"));
    if (j.contains("aggregation")) m.aggregation = aggregation_from_string(j.at("aggregation"));
    m.box_radius = j.value("box_radius", m.box_radius);
    if (j.contains("sgm")) {
        const json& s = j.at("sgm");
        m.sgm.p1 = s.value("p1", m.sgm.p1);
        m.sgm.p2 = s.value("p2", m.sgm.p2);
        m.sgm.paths = s.value("paths", m.sgm.paths);
    }
    if (j.contains("guidance")) {
        const json& g = j.at("guidance");
        m.guidance.lambda = g.value("lambda", m.guidance.lambda);
        m.guidance.sigma = g.value("sigma", m.guidance.sigma);
        m.guidance.sample_fraction = g.value("sample_fraction", m.guidance.sample_fraction);
    }
    m.uniqueness_ratio = j.value("uniqueness_ratio", m.uniqueness_ratio);
    m.subpixel = j.value("subpixel", m.subpixel);
    m.lrc = j.value("lrc", m.lrc);
    m.lrc_tol = j.value("lrc_tol", m.lrc_tol);
    return m;
}

// --- pipeline config -------------------------------------------------------

struct PipelineConfig {
    std::string rig_path;                 // empty: the library's default rig
    std::vector<std::string> scene_paths; // one dataset directory per scene
    std::string out_dir = "out";
    uint64_t seed = 0;
    GtDatasetParams dataset;              // includes render/spacetime/msl blocks
    MatcherConfig matcher;
    double guide_noise_sigma = 0.0;       // optional noise on sampled hints
    std::vector<double> eval_thresholds = default_bad_thresholds();
    MaskPolicy eval_policy = MaskPolicy::PenalizeInvalid;

    void validate() const {
        if (out_dir.empty()) throw InvalidConfig("pipeline: out_dir must not be empty");
        if (dataset.n_frames < 1) throw InvalidConfig("pipeline: dataset.n_frames must be >= 1");
        if (dataset.device_dots < 1 || dataset.gt_dots < 1)
            throw InvalidConfig("pipeline: dot counts must be >= 1");
        if (eval_thresholds.empty()) throw InvalidConfig("pipeline: no eval thresholds");
        for (double t : eval_thresholds)
            if (!(t > 0.0)) throw InvalidConfig("pipeline: eval thresholds must be > 0");
        dataset.spacetime.validate();
        dataset.msl.validate();
        matcher.validate();
    }
};

inline json pipeline_config_to_json(const PipelineConfig& c) {
    json j;
    j["rig"] = c.rig_path;
    j["scenes"] = c.scene_paths;
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    j["dataset"] = json{{"n_frames", c.dataset.n_frames},
                        {"device_dots", c.dataset.device_dots},
                        {"gt_dots", c.dataset.gt_dots},
                        {"gt_jitter", c.dataset.gt_jitter}};
    j["render"] = render_to_json(c.dataset.render);
    j["msl"] = msl_to_json(c.dataset.msl);
    j["spacetime"] = spacetime_to_json(c.dataset.spacetime);
    j["matcher"] = matcher_to_json(c.matcher);
    j["guide_noise_sigma"] = c.guide_noise_sigma;
    j["eval"] = json{{"thresholds", c.eval_thresholds}, {"policy", to_string(c.eval_policy)}};
    return j;
}

inline PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig c;
    c.rig_path = j.value("rig", c.rig_path);
    if (j.contains("scenes")) c.scene_paths = j.at("scenes").get<std::vector<std::string>>();
    c.out_dir = j.value("out_dir", c.out_dir);
    c.seed = j.value("seed", c.seed);
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        c.dataset.n_frames = d.value("n_frames", c.dataset.n_frames);
        c.dataset.device_dots = d.value("device_dots", c.dataset.device_dots);
        c.dataset.gt_dots = d.value("gt_dots", c.dataset.gt_dots);
        c.dataset.gt_jitter = d.value("gt_jitter", c.dataset.gt_jitter);
    }
    if (j.contains("render")) c.dataset.render = render_from_json(j.at("render"));
    if (j.contains("msl")) c.dataset.msl = msl_from_json(j.at("msl"));
    if (j.contains("spacetime")) c.dataset.spacetime = spacetime_from_json(j.at("spacetime"));
    if (j.contains("matcher")) c.matcher = matcher_from_json(j.at("matcher"));
    c.guide_noise_sigma = j.value("guide_noise_sigma", c.guide_noise_sigma);
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        if (e.contains("thresholds"))
            c.eval_thresholds = e.at("thresholds").get<std::vector<double>>();
        if (e.contains("policy")) c.eval_policy = mask_policy_from_string(e.at("policy"));
    }
    return c;
}

/// Reads a pipeline config. Relative rig and scene paths are resolved
/// against the config file's directory; out_dir stays relative to the
/// working directory.
inline PipelineConfig read_pipeline_config(const std::string& path) {
    PipelineConfig cfg = pipeline_config_from_json(read_json_file(path));
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
        return (base / p).string();
    };
    cfg.rig_path = resolve(cfg.rig_path);
    for (std::string& p : cfg.scene_paths) p = resolve(p);
    return cfg;
}

} // namespace monostereo::io
