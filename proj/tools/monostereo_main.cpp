#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <monostereo/monostereo.hpp>

namespace {

using namespace monostereo;

io::PipelineConfig load_config(const std::string& config_path, uint64_t seed, bool seed_set,
                               const std::string& out_dir) {
    io::PipelineConfig cfg = io::read_pipeline_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return cfg;
}

void print_summary(const PipelineSummary& summary) {
    if (!summary.report.text.empty()) std::cout << summary.report.text;
    std::cout << "artifacts written to " << summary.out_dir << "\n";
}

void run_stages(const std::string& config_path, uint64_t seed, bool seed_set,
                const std::string& out_dir, const StageSet& stages) {
    const io::PipelineConfig cfg = load_config(config_path, seed, seed_set, out_dir);
    print_summary(run_pipeline(cfg, stages));
}

RigModel read_rig(const std::string& calib_path) {
    const RigModel rig = io::read_calibration(calib_path);
    rig.require_valid();
    return rig;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"monostereo: structured-light guided binocular stereo pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        sub->add_option("--config", config_path, "pipeline config JSON")
            ->required(config_required);
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    CLI::App* simulate = app.add_subcommand(
        "simulate", "render scene images, calibration, and simulator ground truth");
    add_common(simulate, true);
    simulate->callback([&] {
        StageSet stages = StageSet::none();
        stages.simulate = true;
        run_stages(config_path, seed, seed_set, out_dir, stages);
    });

    CLI::App* gt = app.add_subcommand(
        "gt", "build space-time ground-truth disparity for each scene");
    add_common(gt, true);
    gt->callback([&] {
        StageSet stages = StageSet::none();
        stages.gt = true;
        run_stages(config_path, seed, seed_set, out_dir, stages);
    });

    CLI::App* run = app.add_subcommand("run", "run the full pipeline (or selected stages)");
    add_common(run, true);
    std::string stages_csv = "simulate,gt,msl,stereo,eval";
    run->add_option("--stages", stages_csv, "comma-separated subset of simulate,gt,msl,stereo,eval");
    run->callback([&] {
        run_stages(config_path, seed, seed_set, out_dir, StageSet::parse(stages_csv));
    });

    CLI::App* msl = app.add_subcommand(
        "msl", "match a live speckle image against the flat-wall reference");
    std::string live_path, ref_path, calib_path, msl_out;
    bool msl_depth_out = false;
    MslMatchParams msl_params;
    msl->add_option("--live", live_path, "live IR image (PNG)")->required();
    msl->add_option("--ref", ref_path, "reference image (PNG)")->required();
    msl->add_option("--calib", calib_path, "calibration JSON")->required();
    msl->add_option("--out", msl_out, "output disparity PFM")->required();
    msl->add_flag("--depth", msl_depth_out, "write metric depth instead of disparity");
    msl->add_option("--window", msl_params.window, "matching window side (odd)");
    msl->add_option("--search-min", msl_params.search_min, "minimum tested shift");
    msl->add_option("--search-max", msl_params.search_max, "maximum tested shift");
    msl->callback([&] {
        const RigModel rig = read_rig(calib_path);
        const ImageGray live = io::read_png_gray(live_path);
        const ImageGray ref = io::read_png_gray(ref_path);
        if (msl_depth_out) {
            io::write_pfm(msl_out, msl_depth(live, ref, rig, msl_params));
        } else {
            io::write_pfm(msl_out, block_match(binarize(live, msl_params.binarize_radius),
                                               binarize(ref, msl_params.binarize_radius),
                                               msl_params));
        }
        std::cout << "wrote " << msl_out << "\n";
    });

    CLI::App* stereo = app.add_subcommand(
        "stereo", "binocular cost-volume matching, optionally guided by hints");
    std::string left_path, right_path, guide_path, stereo_out;
    MatcherConfig matcher;
    double guide_noise = 0.0;
    bool no_lrc = false;
    std::string agg = "box";
    stereo->add_option("--left", left_path, "left (RGB camera) image PNG")->required();
    stereo->add_option("--right", right_path, "right (IR camera) image PNG")->required();
    stereo->add_option("--guide", guide_path, "guidance disparity PFM (sampled into hints)");
    stereo->add_option("--out", stereo_out, "output disparity PFM")->required();
    stereo->add_option("--dmax", matcher.dmax, "disparity search range [0, dmax)");
    stereo->add_flag("--no-lrc", no_lrc, "skip the left-right consistency check");
    stereo->add_option("--agg", agg, "cost aggregation: box|sgm");
    stereo->add_option("--lambda", matcher.guidance.lambda, "guidance peak gain");
    stereo->add_option("--sigma", matcher.guidance.sigma, "guidance width in disparity px");
    stereo->add_option("--guide-fraction", matcher.guidance.sample_fraction,
                       "fraction of valid guide pixels kept as hints");
    stereo->add_option("--guide-noise", guide_noise,
                       "stddev of disparity noise added to sampled hints");
    stereo->add_option("--seed", seed, "hint sampling seed");
    stereo->callback([&] {
        matcher.lrc = !no_lrc;
        matcher.aggregation = io::aggregation_from_string(agg);
        const ImageGray left = io::read_png_gray(left_path);
        const ImageGray right = io::read_png_gray(right_path);
        GuidanceMap hints;
        const GuidanceMap* hints_ptr = nullptr;
        if (!guide_path.empty()) {
            const DisparityMap guide = io::read_pfm_disparity(guide_path);
            hints = sample_guidance(guide, matcher.guidance.sample_fraction, seed, guide_noise);
            hints_ptr = &hints;
        }
        io::write_pfm(stereo_out, match_guided(left, right, hints_ptr, matcher));
        std::cout << "wrote " << stereo_out << "\n";
    });

    CLI::App* eval = app.add_subcommand("eval", "score a disparity map against ground truth");
    std::string pred_path, gt_path, eval_out, policy = "penalize", method_name = "prediction";
    double penalty = 192.0;
    eval->add_option("--pred", pred_path, "predicted disparity PFM")->required();
    eval->add_option("--gt", gt_path, "ground-truth disparity PFM")->required();
    eval->add_option("--out", eval_out, "output base path (writes .txt/.csv/.json)");
    eval->add_option("--policy", policy, "invalid-prediction handling: penalize|skip");
    eval->add_option("--penalty", penalty, "disparity error charged to invalid predictions");
    eval->add_option("--name", method_name, "row label in the report");
    eval->callback([&] {
        const DisparityMap pred = io::read_pfm_disparity(pred_path);
        const DisparityMap gtmap = io::read_pfm_disparity(gt_path);
        const EvalResult result = evaluate(pred, gtmap, default_bad_thresholds(),
                                           io::mask_policy_from_string(policy), penalty);
        const ComparisonReport report = compare({{method_name, result}});
        std::cout << report.text;
        if (!eval_out.empty()) {
            std::ofstream(eval_out + ".txt") << report.text;
            std::ofstream(eval_out + ".csv") << report.csv;
            io::write_json_file(eval_out + ".json", report.json);
            std::cout << "wrote " << eval_out << ".{txt,csv,json}\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
