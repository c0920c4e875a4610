#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "monostereo/errors.hpp"
#include "monostereo/io/calib_io.hpp"
#include "monostereo/io/config_io.hpp"
#include "monostereo/io/pfm.hpp"
#include "monostereo/io/png_io.hpp"
#include "monostereo/io/scene_io.hpp"
#include "monostereo/metrics.hpp"
#include "monostereo/spacetime_gt.hpp"

namespace monostereo {

/// Which pipeline stages to execute. Later stages read earlier stages'
/// artifacts from the output directory, so any contiguous or resumed subset
/// works as long as its inputs are on disk.
struct StageSet {
    bool simulate = true;
    bool gt = true;
    bool msl = true;
    bool stereo = true;
    bool eval = true;

    static StageSet none() { return {false, false, false, false, false}; }

    /// Comma-separated stage names, e.g. "stereo,eval".
    static StageSet parse(const std::string& csv) {
        StageSet s = none();
        size_t pos = 0;
        while (pos <= csv.size()) {
            const size_t comma = csv.find(',', pos);
            const std::string name =
                csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (name == "simulate") s.simulate = true;
            else if (name == "gt") s.gt = true;
            else if (name == "msl") s.msl = true;
            else if (name == "stereo") s.stereo = true;
            else if (name == "eval") s.eval = true;
            else if (!name.empty())
                throw InvalidConfig("unknown pipeline stage '" + name +
                                    "' (simulate|gt|msl|stereo|eval)");
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return s;
    }
};

struct PipelineSummary {
    std::vector<std::string> scene_ids;
    std::vector<std::pair<std::string, EvalResult>> suite_rows; // per-method suite means
    ComparisonReport report;
    std::string out_dir;
};

namespace detail {

namespace fs = std::filesystem;

inline std::string scene_dir_name(size_t k) { return "scene_" + std::to_string(k); }

inline void require_artifact(const fs::path& p, const char* stage, const std::string& scene,
                             const char* produced_by) {
    if (fs::exists(p)) return;
    const std::string msg = std::string(stage) + " stage, " + scene + ": missing " +
                            p.filename().string() + " (produced by the " + produced_by +
                            " stage)";
    if (p.filename() == "guide.pfm") throw GuideMissing(msg);
    throw std::runtime_error(msg);
}

inline std::string hex64(uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
    return buf;
}

/// Mean of per-scene results, per method: EPE and percentages averaged
/// unweighted over scenes, evaluated-pixel counts summed.
inline EvalResult mean_result(const std::vector<EvalResult>& per_scene) {
    EvalResult mean = per_scene.front();
    for (size_t i = 1; i < per_scene.size(); ++i) {
        const EvalResult& r = per_scene[i];
        mean.epe += r.epe;
        mean.n_evaluated += r.n_evaluated;
        for (size_t t = 0; t < mean.bad.size(); ++t) mean.bad[t].second += r.bad[t].second;
    }
    const double n = static_cast<double>(per_scene.size());
    mean.epe /= n;
    for (auto& [tau, pct] : mean.bad) pct /= n;
    return mean;
}

} // namespace detail

/// Runs simulate -> gt -> msl -> stereo -> eval for every configured scene,
/// or the selected subset against artifacts already in the output directory.
/// Everything on disk is a pure function of (config, seed): per-scene seeds
/// derive from the global seed and the scene index, the device speckle
/// pattern is shared by all scenes, and the report contains no paths or
/// timestamps, so a re-run reproduces it byte for byte.
inline PipelineSummary run_pipeline(const io::PipelineConfig& cfg,
                                    const StageSet& stages = {}) {
    namespace fs = std::filesystem;
    cfg.validate();
    if (cfg.scene_paths.empty()) throw InvalidConfig("pipeline: no scenes configured");

    const RigModel rig =
        cfg.rig_path.empty() ? RigModel::default_rig() : io::read_calibration(cfg.rig_path);
    rig.require_valid();

    const fs::path out_root(cfg.out_dir);
    fs::create_directories(out_root);
    io::write_json_file((out_root / "config.json").string(),
                        io::pipeline_config_to_json(cfg));

    const SpecklePattern device = SpecklePattern::generate_for_rig(
        rig, cfg.dataset.device_dots, mix64(cfg.seed, 1));
    const fs::path reference_path = out_root / "reference.png";
    if (stages.simulate)
        io::write_png_gray(reference_path.string(), render_reference_image(device, rig));

    std::vector<io::SceneFile> scene_files;
    scene_files.reserve(cfg.scene_paths.size());
    for (const std::string& path : cfg.scene_paths) scene_files.push_back(io::read_scene(path));

    PipelineSummary summary;
    summary.out_dir = cfg.out_dir;
    std::vector<std::vector<EvalResult>> per_method(4);
    const std::vector<std::string> method_names{"msl-only", "passive", "guided",
                                               "spacetime-gt-self-check"};
    nlohmann::ordered_json scenes_json = nlohmann::ordered_json::array();

    for (size_t k = 0; k < scene_files.size(); ++k) {
        const io::SceneFile& sf = scene_files[k];
        const std::string scene_id = detail::scene_dir_name(k);
        summary.scene_ids.push_back(scene_id);
        const fs::path dir = out_root / scene_id;
        fs::create_directories(dir);
        const uint64_t scene_seed = mix64(cfg.seed, 1000 + k);

        if (stages.simulate) {
            const EvalPair pair = render_eval_pair(sf.scene, device, rig, cfg.dataset.render,
                                                   mix64(scene_seed, 2));
            io::write_png_gray((dir / "left.png").string(), pair.left);
            io::write_png_gray((dir / "right_on.png").string(), pair.right_on);
            io::write_png_gray((dir / "right_off.png").string(), pair.right_off);
            io::write_pfm((dir / "sim_gt.pfm").string(), pair.sim_disparity);
            io::write_calibration((dir / "calib.json").string(), rig);
            nlohmann::ordered_json meta;
            meta["scene"] = sf.name;
            meta["scene_hash"] = detail::hex64(sf.content_hash);
            meta["seed"] = detail::hex64(scene_seed);
            meta["n_frames"] = cfg.dataset.n_frames;
            meta["width"] = rig.rgb_cam.width;
            meta["height"] = rig.rgb_cam.height;
            io::write_json_file((dir / "meta.json").string(), meta);
        }

        if (stages.gt) {
            const SpecklePattern aux = SpecklePattern::generate_for_rig(
                rig, cfg.dataset.gt_dots, mix64(scene_seed, 3));
            const DisparityMap gt =
                spacetime_gt_map(sf.scene, rig, aux, cfg.dataset.n_frames,
                                 cfg.dataset.gt_jitter, scene_seed, cfg.dataset.render,
                                 cfg.dataset.spacetime);
            io::write_pfm((dir / "gt.pfm").string(), gt);
        }

        if (stages.msl) {
            detail::require_artifact(dir / "right_on.png", "msl", scene_id, "simulate");
            detail::require_artifact(reference_path, "msl", scene_id, "simulate");
            const ImageGray right_on = io::read_png_gray((dir / "right_on.png").string());
            const ImageGray reference = io::read_png_gray(reference_path.string());
            const DisparityMap guide = msl_guidance(right_on, reference, rig, cfg.dataset.msl);
            io::write_pfm((dir / "guide.pfm").string(), guide);
        }

        if (stages.stereo) {
            detail::require_artifact(dir / "left.png", "stereo", scene_id, "simulate");
            detail::require_artifact(dir / "right_on.png", "stereo", scene_id, "simulate");
            detail::require_artifact(dir / "right_off.png", "stereo", scene_id, "simulate");
            detail::require_artifact(dir / "guide.pfm", "stereo", scene_id, "msl");
            const ImageGray left = io::read_png_gray((dir / "left.png").string());
            const ImageGray right_on = io::read_png_gray((dir / "right_on.png").string());
            const ImageGray right_off = io::read_png_gray((dir / "right_off.png").string());
            const DisparityMap guide_full =
                io::read_pfm_disparity((dir / "guide.pfm").string());
            const GuidanceMap hints =
                sample_guidance(guide_full, cfg.matcher.guidance.sample_fraction,
                                mix64(scene_seed, 4), cfg.guide_noise_sigma);
            const DisparityMap guided = match_guided(left, right_on, &hints, cfg.matcher);
            io::write_pfm((dir / "disp_guided.pfm").string(), guided);
            const DisparityMap passive = match_guided(left, right_off, nullptr, cfg.matcher);
            io::write_pfm((dir / "disp_passive.pfm").string(), passive);
        }

        if (stages.eval) {
            detail::require_artifact(dir / "gt.pfm", "eval", scene_id, "gt");
            detail::require_artifact(dir / "sim_gt.pfm", "eval", scene_id, "simulate");
            detail::require_artifact(dir / "guide.pfm", "eval", scene_id, "msl");
            detail::require_artifact(dir / "disp_passive.pfm", "eval", scene_id, "stereo");
            detail::require_artifact(dir / "disp_guided.pfm", "eval", scene_id, "stereo");
            const DisparityMap gt = io::read_pfm_disparity((dir / "gt.pfm").string());
            const DisparityMap sim = io::read_pfm_disparity((dir / "sim_gt.pfm").string());
            const DisparityMap guide = io::read_pfm_disparity((dir / "guide.pfm").string());
            const DisparityMap passive =
                io::read_pfm_disparity((dir / "disp_passive.pfm").string());
            const DisparityMap guided =
                io::read_pfm_disparity((dir / "disp_guided.pfm").string());

            const double penalty = static_cast<double>(cfg.matcher.dmax);
            const std::vector<EvalResult> rows{
                evaluate(guide, gt, cfg.eval_thresholds, cfg.eval_policy, penalty),
                evaluate(passive, gt, cfg.eval_thresholds, cfg.eval_policy, penalty),
                evaluate(guided, gt, cfg.eval_thresholds, cfg.eval_policy, penalty),
                evaluate(gt, sim, cfg.eval_thresholds, cfg.eval_policy, penalty)};
            std::vector<std::pair<std::string, EvalResult>> named;
            for (size_t m = 0; m < rows.size(); ++m) {
                per_method[m].push_back(rows[m]);
                named.emplace_back(method_names[m], rows[m]);
            }
            nlohmann::ordered_json scene_entry;
            scene_entry["id"] = scene_id;
            scene_entry["name"] = sf.name;
            scene_entry["scene_hash"] = detail::hex64(sf.content_hash);
            scene_entry["rows"] = compare(named).json["rows"];
            scenes_json.push_back(std::move(scene_entry));
        }
    }

    if (stages.eval) {
        for (size_t m = 0; m < method_names.size(); ++m)
            summary.suite_rows.emplace_back(method_names[m],
                                            detail::mean_result(per_method[m]));
        summary.report = compare(summary.suite_rows);

        nlohmann::ordered_json report_json;
        report_json["seed"] = detail::hex64(cfg.seed);
        report_json["n_scenes"] = scene_files.size();
        report_json["suite"] = summary.report.json;
        report_json["scenes"] = std::move(scenes_json);
        io::write_json_file((out_root / "report.json").string(), report_json);

        std::ofstream txt(out_root / "report.txt");
        txt << summary.report.text;
        std::ofstream csv(out_root / "report.csv");
        csv << summary.report.csv;
    }
    return summary;
}

} // namespace monostereo
