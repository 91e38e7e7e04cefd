// Command-line front end: track / eval / synth / render.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mkcf/commands.hpp"
#include "mkcf/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "mkcf - multiple-object tracking with per-object kernelized correlation filters\n"
        "arbitrated against background-subtraction blobs"};
    app.require_subcommand(1);

    // --- track ---------------------------------------------------------
    auto* track = app.add_subcommand("track", "Track objects over an image sequence");
    std::string preset, config_file;
    std::vector<std::pair<CLI::Option*, std::string>> bound;
    auto cfg_opt = [&](const std::string& flag, const std::string& key, const std::string& desc) {
        bound.emplace_back(track->add_option(flag)->description(desc), key);
    };
    cfg_opt("--frames", "frames", "printf-style frame pattern (e.g. dir/%06d.ppm) or directory");
    cfg_opt("--masks", "masks", "foreground mask pattern or directory (omit to use the "
                                "fallback subtractor)");
    cfg_opt("--output", "output", "trajectory CSV to write (default tracks.csv)");
    cfg_opt("--colornames", "colornames", "color-names CSV (default data/colornames.csv)");
    cfg_opt("--gt", "gt", "ground-truth CSV; prints MOTA/MOTP after the run");
    cfg_opt("--render-dir", "render_dir", "write annotated frames here");
    cfg_opt("--match-threshold", "match_threshold", "evaluation match distance, px (default 50)");
    cfg_opt("--first-frame", "first_frame", "first frame number (default: probe 0 then 1)");
    cfg_opt("--max-frames", "max_frames", "process at most this many frames");
    cfg_opt("--fallback-threshold", "fallback_threshold",
            "gray-level threshold of the fallback subtractor (default 25)");
    cfg_opt("--T_r", "T_r", "minimum blob area, px");
    cfg_opt("--T_c", "T_c", "blob merge distance, px");
    cfg_opt("--ratio_min", "ratio_min", "minimum blob w/h ratio");
    cfg_opt("--ratio_max", "ratio_max", "maximum blob w/h ratio");
    cfg_opt("--median_radius", "median_radius", "mask median filter radius");
    cfg_opt("--close_radius", "close_radius", "mask closing radius");
    cfg_opt("--sigma_kernel", "sigma_kernel", "correlation kernel bandwidth");
    cfg_opt("--lambda", "lambda", "ridge regularizer");
    cfg_opt("--learning_rate", "learning_rate", "appearance update rate");
    cfg_opt("--output_sigma_factor", "output_sigma_factor", "regression target width factor");
    cfg_opt("--padding", "padding", "search window padding factor");
    cfg_opt("--cell", "cell", "feature cell size, px");
    cfg_opt("--T_ol", "T_ol", "scale arbitration lower bound");
    cfg_opt("--T_oh", "T_oh", "scale arbitration upper bound");
    cfg_opt("--invisible_max", "invisible_max", "frames a track may stay invisible");
    cfg_opt("--min_lifetime", "min_lifetime", "minimum track length kept, frames");
    cfg_opt("--redundancy_frames", "redundancy_frames", "frames before a redundant pair loses "
                                                        "its newest track");
    track->add_option("--preset", preset,
                      "per-video blob thresholds: sherbrooke, rouen, st-marc, rene-levesque");
    track->add_option("--config", config_file, "key=value config file");

    // --- eval ----------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "CLEAR MOT evaluation of a trajectory CSV");
    std::string eval_gt, eval_hyp, eval_json;
    double eval_threshold = 50.0;
    eval->add_option("gt", eval_gt, "ground-truth CSV")->required();
    eval->add_option("hypotheses", eval_hyp, "tracker output CSV")->required();
    eval->add_option("--match-threshold", eval_threshold, "match distance, px (default 50)");
    eval->add_option("--json", eval_json, "write a JSON report here");

    // --- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
    std::string synth_name, synth_dir;
    std::uint64_t synth_seed = 0;
    double synth_noise = 0.0;
    synth->add_option("name", synth_name, "scenario name (anything unknown lists the catalog)")
        ->required();
    synth->add_option("out", synth_dir, "output directory (frames/, masks/, gt.csv)")->required();
    synth->add_option("--seed", synth_seed, "mask noise seed");
    synth->add_option("--noise", synth_noise, "salt probability per mask pixel");

    // --- render --------------------------------------------------------
    auto* render = app.add_subcommand("render", "Overlay a trajectory CSV onto frames");
    std::string render_frames, render_csv, render_out;
    render->add_option("frames", render_frames, "frame pattern or directory")->required();
    render->add_option("csv", render_csv, "trajectory CSV")->required();
    render->add_option("out", render_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mkcf::app::kExitOk : mkcf::app::kExitUsage;
    }

    if (*track) {
        mkcf::RunConfig cfg;
        try {
            if (!preset.empty() && !mkcf::apply_preset(cfg, preset)) {
                std::cerr << "error: unknown preset '" << preset << "'\n";
                return mkcf::app::kExitUsage;
            }
            if (!config_file.empty()) mkcf::load_config_file(cfg, config_file);
            for (const auto& [opt, key] : bound)
                if (opt->count() > 0) mkcf::set_config_value(cfg, key, opt->results().back());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return mkcf::app::kExitUsage;
        }
        return mkcf::app::run_track(cfg);
    }
    if (*eval) return mkcf::app::run_eval(eval_gt, eval_hyp, eval_threshold, eval_json);
    if (*synth) return mkcf::app::run_synth(synth_name, synth_seed, synth_dir, synth_noise);
    if (*render) return mkcf::app::run_render(render_frames, render_csv, render_out);
    return mkcf::app::kExitUsage;
}
