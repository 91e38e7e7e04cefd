#pragma once

// Implementations behind the CLI subcommands. Each returns a process exit
// status: 0 success, 1 usage error, 2 data error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <json.hpp>

#include "mkcf/config.hpp"
#include "mkcf/metrics.hpp"
#include "mkcf/synth.hpp"
#include "mkcf/tracking.hpp"

namespace mkcf::app {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct FrameEntry {
    int number;
    std::string path;
};

// Expands a printf-style pattern (e.g. dir/%06d.ppm) by probing successive
// frame numbers, or lists a directory of numbered image files.
inline std::vector<FrameEntry> list_frames(const std::string& spec, int first_frame,
                                           int max_frames) {
    namespace fs = std::filesystem;
    std::vector<FrameEntry> out;
    if (spec.find('%') != std::string::npos) {
        char buf[1024];
        int start = first_frame;
        if (start < 0) {
            for (int probe : {0, 1}) {
                std::snprintf(buf, sizeof(buf), spec.c_str(), probe);
                if (fs::exists(buf)) {
                    start = probe;
                    break;
                }
            }
            if (start < 0) return out;
        }
        for (int n = start;; ++n) {
            if (max_frames >= 0 && static_cast<int>(out.size()) >= max_frames) break;
            std::snprintf(buf, sizeof(buf), spec.c_str(), n);
            if (!fs::exists(buf)) break;
            out.push_back({n, buf});
        }
        return out;
    }

    if (!fs::is_directory(spec)) return out;
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(spec)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".jpg" || ext == ".bmp")
            files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    for (size_t i = 0; i < files.size(); ++i) {
        if (max_frames >= 0 && static_cast<int>(out.size()) >= max_frames) break;
        const std::string stem = fs::path(files[i]).stem().string();
        const bool numeric = !stem.empty() &&
                             stem.find_first_not_of("0123456789") == std::string::npos;
        out.push_back({numeric ? std::stoi(stem) : static_cast<int>(i), files[i]});
    }
    return out;
}

// Mask file for one frame: a %-pattern gets the frame number; a directory is
// probed for a file sharing the frame's stem.
inline std::string mask_path_for(const std::string& spec, const FrameEntry& frame) {
    namespace fs = std::filesystem;
    if (spec.find('%') != std::string::npos) {
        char buf[1024];
        std::snprintf(buf, sizeof(buf), spec.c_str(), frame.number);
        return buf;
    }
    const std::string stem = fs::path(frame.path).stem().string();
    for (const char* ext : {".png", ".pgm", ".ppm", ".jpg", ".bmp"}) {
        const fs::path p = fs::path(spec) / (stem + ext);
        if (fs::exists(p)) return p.string();
    }
    return (fs::path(spec) / (stem + ".png")).string();  // reported missing by the caller
}

namespace detail {

inline cv::Scalar id_color(int id) {
    static const cv::Scalar palette[] = {
        {60, 60, 220},  {60, 180, 75},  {200, 130, 0},  {0, 200, 200},
        {180, 30, 145}, {40, 100, 245}, {190, 190, 70}, {128, 0, 128},
        {0, 140, 255},  {150, 75, 0},   {75, 180, 220}, {30, 160, 30},
    };
    return palette[static_cast<size_t>(id) % (sizeof(palette) / sizeof(palette[0]))];
}

inline void draw_record(cv::Mat3b& img, const TrajectoryRecord& r) {
    const cv::Scalar color = id_color(r.id);
    const cv::Rect rect = r.box.to_rect();
    if (r.state == "occluded") {
        cv::rectangle(img, rect, color, 2);
        cv::rectangle(img, cv::Rect(rect.x - 3, rect.y - 3, rect.width + 6, rect.height + 6),
                      color, 1);
    } else if (r.state == "invisible") {  // interpolated span
        cv::rectangle(img, rect, color, 1);
    } else {
        cv::rectangle(img, rect, color, 2);
    }
    cv::putText(img, "#" + std::to_string(r.id), {rect.x, std::max(12, rect.y - 4)},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, color, 1);
}

}  // namespace detail

inline int run_track(const RunConfig& cfg, std::ostream& out = std::cout) {
    using clock = std::chrono::steady_clock;
    try {
        validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (cfg.frames.empty()) {
        std::cerr << "error: no frame pattern given\n";
        return kExitUsage;
    }

    try {
        const auto frames = list_frames(cfg.frames, cfg.first_frame, cfg.max_frames);
        if (frames.empty()) {
            std::cerr << "error: no frames matched '" << cfg.frames << "'\n";
            return kExitData;
        }

        if (!cfg.colornames.empty() && !std::ifstream(cfg.colornames).good())
            out << "color-names table '" << cfg.colornames
                << "' not found; using one-hot fallback\n";
        const ColorNamesTable table = ColorNamesTable::load_or_fallback(cfg.colornames);

        TrackManager manager(cfg.params, table);
        BackgroundModel fallback(cfg.fallback_threshold);
        const auto start = clock::now();

        cv::Size dims;
        for (const auto& fe : frames) {
            const cv::Mat3b img = cv::imread(fe.path, cv::IMREAD_COLOR);
            if (img.empty()) {
                std::cerr << "error: cannot read frame " << fe.path << "\n";
                return kExitData;
            }
            if (dims.empty()) dims = img.size();
            if (img.size() != dims) {
                std::cerr << "error: frame " << fe.number << " changed dimensions\n";
                return kExitData;
            }

            cv::Mat1b mask;
            if (!cfg.masks.empty()) {
                const std::string mp = mask_path_for(cfg.masks, fe);
                const cv::Mat m = cv::imread(mp, cv::IMREAD_GRAYSCALE);
                if (m.empty()) {
                    std::cerr << "error: missing mask for frame " << fe.number << " (" << mp
                              << ")\n";
                    return kExitData;
                }
                if (m.size() != img.size()) {
                    std::cerr << "error: mask/frame dimension mismatch at frame " << fe.number
                              << "\n";
                    return kExitData;
                }
                cv::threshold(m, mask, 0, 255, cv::THRESH_BINARY);
            } else {
                mask = fallback.subtract_and_update(img);
            }
            manager.process_frame(fe.number, img, mask);
        }
        manager.finish();
        const double seconds = std::chrono::duration<double>(clock::now() - start).count();

        std::vector<TrajectoryRecord> rows;
        for (const auto& rec : manager.trajectory_records())
            rows.push_back({rec.frame, rec.id, rec.box, "", to_string(rec.state)});
        save_trajectory_csv(cfg.output, rows, /*with_class=*/false, /*with_state=*/true);

        int created = 0, finalized = 0, discarded = 0, deleted = 0;
        for (const auto& e : manager.events()) {
            switch (e.kind) {
                case LifecycleEvent::Kind::Created: ++created; break;
                case LifecycleEvent::Kind::Finalized: ++finalized; break;
                case LifecycleEvent::Kind::Discarded: ++discarded; break;
                case LifecycleEvent::Kind::DeletedRedundant: ++deleted; break;
                case LifecycleEvent::Kind::Reassigned: break;
            }
        }
        const auto& st = manager.stage_times();
        char line[256];
        std::snprintf(line, sizeof(line),
                      "frames %zu  tracks created %d  finalized %d  discarded %d  redundant %d\n",
                      frames.size(), created, finalized, discarded, deleted);
        out << line;
        std::snprintf(line, sizeof(line), "wall %.3f s  (%.1f fps)\n", seconds,
                      frames.size() / std::max(seconds, 1e-9));
        out << line;
        std::snprintf(line, sizeof(line),
                      "stages: foreground %.3f s  kcf %.3f s  association %.3f s\n",
                      st.foreground, st.kcf, st.association);
        out << line;
        out << "trajectories written to " << cfg.output << "\n";

        if (!cfg.render_dir.empty()) {
            std::map<int, std::vector<TrajectoryRecord>> by_frame;
            for (const auto& r : rows) by_frame[r.frame].push_back(r);
            std::filesystem::create_directories(cfg.render_dir);
            char name[32];
            for (const auto& fe : frames) {
                cv::Mat3b img = cv::imread(fe.path, cv::IMREAD_COLOR);
                if (auto it = by_frame.find(fe.number); it != by_frame.end())
                    for (const auto& r : it->second) detail::draw_record(img, r);
                std::snprintf(name, sizeof(name), "%06d.png", fe.number);
                cv::imwrite((std::filesystem::path(cfg.render_dir) / name).string(), img);
            }
            out << "annotated frames written to " << cfg.render_dir << "\n";
        }

        if (!cfg.gt.empty()) {
            const TrajectorySet gt = load_trajectory_csv(cfg.gt);
            const TrajectorySet hyp = load_trajectory_csv(cfg.output);
            const MotScore s = evaluate(gt, hyp, cfg.match_threshold);
            if (s.has_ground_truth())
                std::snprintf(line, sizeof(line), "MOTA %.3f  MOTP %.2f px\n", s.mota(), s.motp());
            else
                std::snprintf(line, sizeof(line), "MOTA n/a (no ground truth)\n");
            out << line;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

inline int run_eval(const std::string& gt_path, const std::string& hyp_path, double threshold,
                    const std::string& json_path, std::ostream& out = std::cout) {
    try {
        const TrajectorySet gt = load_trajectory_csv(gt_path);
        const TrajectorySet hyp = load_trajectory_csv(hyp_path);
        const auto scores = evaluate_per_class(gt, hyp, threshold);

        char line[256];
        std::snprintf(line, sizeof(line), "%-14s %8s %9s %8s %8s %9s %8s %8s\n", "class", "MOTA",
                      "MOTP(px)", "misses", "falsepos", "switches", "matches", "gt");
        out << line;
        nlohmann::json j;
        j["threshold"] = threshold;
        for (const auto& [cls, s] : scores) {
            if (s.has_ground_truth())
                std::snprintf(line, sizeof(line), "%-14s %8.3f %9.2f %8lld %8lld %9lld %8lld %8lld\n",
                              cls.c_str(), s.mota(), s.motp(), s.misses, s.false_positives,
                              s.id_switches, s.matches, s.total_gt);
            else
                std::snprintf(line, sizeof(line), "%-14s %8s %9.2f %8lld %8lld %9lld %8lld %8lld\n",
                              cls.c_str(), "n/a", s.motp(), s.misses, s.false_positives,
                              s.id_switches, s.matches, s.total_gt);
            out << line;

            nlohmann::json& row = j["classes"][cls];
            if (s.has_ground_truth())
                row["mota"] = s.mota();
            else
                row["mota"] = nullptr;  // no ground truth
            row["motp"] = s.motp();
            row["misses"] = s.misses;
            row["false_positives"] = s.false_positives;
            row["id_switches"] = s.id_switches;
            row["matches"] = s.matches;
            row["total_gt"] = s.total_gt;
        }
        if (!json_path.empty()) {
            std::ofstream jf(json_path);
            if (!jf) throw std::runtime_error("cannot write " + json_path);
            jf << j.dump(2) << "\n";
            out << "report written to " << json_path << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

inline int run_synth(const std::string& name, std::uint64_t seed, const std::string& out_dir,
                     double noise = 0.0, std::ostream& out = std::cout) {
    auto scenario = synth::find_scenario(name);
    if (!scenario) {
        std::cerr << "error: unknown scenario '" << name << "'. Available:\n";
        for (const auto& s : synth::builtin_scenarios())
            std::cerr << "  " << s.name << "  (" << s.width << "x" << s.height << ", "
                      << s.frames << " frames, " << s.actors.size() << " actors)\n";
        return kExitUsage;
    }
    try {
        scenario->seed = seed;
        if (noise > 0.0) scenario->mask_noise = noise;
        synth::write_scenario(*scenario, out_dir);
        out << "scenario '" << name << "' written to " << out_dir << " (" << scenario->frames
            << " frames)\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

inline int run_render(const std::string& frames_spec, const std::string& csv_path,
                      const std::string& out_dir, std::ostream& out = std::cout) {
    try {
        const TrajectorySet set = load_trajectory_csv(csv_path);
        std::map<int, std::vector<TrajectoryRecord>> by_frame;
        for (const auto& r : set.records) by_frame[r.frame].push_back(r);

        const auto frames = list_frames(frames_spec, -1, -1);
        if (frames.empty()) {
            std::cerr << "error: no frames matched '" << frames_spec << "'\n";
            return kExitData;
        }
        std::filesystem::create_directories(out_dir);
        char name[32];
        for (const auto& fe : frames) {
            cv::Mat3b img = cv::imread(fe.path, cv::IMREAD_COLOR);
            if (img.empty()) {
                std::cerr << "error: cannot read frame " << fe.path << "\n";
                return kExitData;
            }
            if (auto it = by_frame.find(fe.number); it != by_frame.end())
                for (const auto& r : it->second) detail::draw_record(img, r);
            std::snprintf(name, sizeof(name), "%06d.png", fe.number);
            cv::imwrite((std::filesystem::path(out_dir) / name).string(), img);
        }
        out << frames.size() << " annotated frames written to " << out_dir << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace mkcf::app
