#pragma once

// Deterministic synthetic scenarios: flat background, colored rectangles,
// exact silhouette masks and ground truth. Covers the tracker's hard cases —
// occlusion crossings, mask fragmentation, stop-and-go, scene exit, drift
// after a split, redundant trackers collapsing onto one object.
//
// An actor's `visible` schedule removes it from image, mask and ground truth
// (a real disappearance); `mask_dropout` removes it from the mask only,
// emulating a background subtractor losing a still-present object.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "mkcf/box.hpp"
#include "mkcf/metrics.hpp"

namespace mkcf::synth {

struct MotionKey {
    int frame;
    double cx, cy;
};

using FrameSpan = std::pair<int, int>;  // inclusive

struct Actor {
    int id = 0;
    std::string cls;
    cv::Vec3b color{255, 255, 255};  // BGR
    int w = 10, h = 10;
    std::vector<MotionKey> path;         // piecewise-linear center positions
    std::vector<FrameSpan> visible;      // empty: always visible
    std::vector<FrameSpan> mask_dropout; // mask-only absence
};

struct FragmentationEvent {
    int actor_id = 0;
    int from = 0, to = 0;                // inclusive frame range
    int parts = 2;
    int gap = 4;                         // erased stripe width, pixels
    std::vector<double> fractions;       // slab width weights; empty: equal
};

struct Scenario {
    std::string name;
    int width = 320, height = 240, frames = 60;
    std::vector<Actor> actors;
    std::vector<FragmentationEvent> frag;
    std::uint64_t seed = 0;
    double mask_noise = 0.0;             // salt probability per background pixel
    cv::Vec3b background{44, 40, 40};
};

inline cv::Vec3b rgb(int r, int g, int b) {
    return {static_cast<uchar>(b), static_cast<uchar>(g), static_cast<uchar>(r)};
}

inline Actor make_actor(int id, std::string cls, cv::Vec3b color, int w, int h,
                        std::vector<MotionKey> path) {
    Actor a;
    a.id = id;
    a.cls = std::move(cls);
    a.color = color;
    a.w = w;
    a.h = h;
    a.path = std::move(path);
    return a;
}

inline bool in_spans(const std::vector<FrameSpan>& spans, int t, bool empty_means = true) {
    if (spans.empty()) return empty_means;
    for (const auto& [a, b] : spans)
        if (t >= a && t <= b) return true;
    return false;
}

inline PointF actor_center(const Actor& a, int t) {
    if (a.path.empty()) throw std::invalid_argument("actor has no path");
    if (t <= a.path.front().frame) return {a.path.front().cx, a.path.front().cy};
    if (t >= a.path.back().frame) return {a.path.back().cx, a.path.back().cy};
    for (size_t i = 0; i + 1 < a.path.size(); ++i) {
        const auto &k0 = a.path[i], &k1 = a.path[i + 1];
        if (t < k0.frame || t > k1.frame) continue;
        const double u = double(t - k0.frame) / (k1.frame - k0.frame);
        return {k0.cx + (k1.cx - k0.cx) * u, k0.cy + (k1.cy - k0.cy) * u};
    }
    return {a.path.back().cx, a.path.back().cy};
}

// Unclipped actor rectangle at frame t (regardless of visibility).
inline cv::Rect actor_rect(const Actor& a, int t) {
    const PointF c = actor_center(a, t);
    return {static_cast<int>(std::lround(c.x - a.w / 2.0)),
            static_cast<int>(std::lround(c.y - a.h / 2.0)), a.w, a.h};
}

// Tight bounds of the actor's silhouette: clipped to the frame, empty when
// hidden or fully outside.
inline std::optional<Box> actor_box(const Scenario& s, const Actor& a, int t) {
    if (!in_spans(a.visible, t)) return std::nullopt;
    const cv::Rect r = actor_rect(a, t) & cv::Rect(0, 0, s.width, s.height);
    if (r.empty()) return std::nullopt;
    return Box::from_rect(r);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Slab column spans of a fragmented silhouette, relative to the rect.
inline std::vector<std::pair<int, int>> slab_spans(int width, const FragmentationEvent& e) {
    std::vector<double> w(e.fractions);
    if (w.empty()) w.assign(e.parts, 1.0);
    if (static_cast<int>(w.size()) != e.parts)
        throw std::invalid_argument("fragmentation fractions do not match parts");
    double total = 0.0;
    for (double f : w) total += f;
    const int content = width - e.gap * (e.parts - 1);
    std::vector<std::pair<int, int>> spans;
    double acc = 0.0;
    int x = 0;
    for (int i = 0; i < e.parts; ++i) {
        acc += w[i];
        const int slab_end = i + 1 == e.parts
                                 ? content
                                 : static_cast<int>(std::lround(content * acc / total));
        const int slab_w = slab_end - (x - e.gap * i);
        spans.emplace_back(x, x + slab_w);  // [begin, end)
        x += slab_w + e.gap;
    }
    return spans;
}

}  // namespace detail

struct RenderedFrame {
    cv::Mat3b image;
    cv::Mat1b mask;
};

inline RenderedFrame render_frame(const Scenario& s, int t) {
    RenderedFrame out;
    out.image = cv::Mat3b(s.height, s.width, s.background);
    out.mask = cv::Mat1b::zeros(s.height, s.width);
    const cv::Rect frame_rect(0, 0, s.width, s.height);

    for (const auto& a : s.actors) {
        if (!in_spans(a.visible, t)) continue;
        const cv::Rect full = actor_rect(a, t);
        const cv::Rect vis = full & frame_rect;
        if (vis.empty()) continue;
        out.image(vis).setTo(a.color);

        if (in_spans(a.mask_dropout, t, /*empty_means=*/false)) continue;
        const FragmentationEvent* ev = nullptr;
        for (const auto& e : s.frag)
            if (e.actor_id == a.id && t >= e.from && t <= e.to) ev = &e;
        if (!ev) {
            out.mask(vis).setTo(255);
        } else {
            for (const auto& [b, e] : detail::slab_spans(full.width, *ev)) {
                const cv::Rect slab = cv::Rect(full.x + b, full.y, e - b, full.height) & frame_rect;
                if (!slab.empty()) out.mask(slab).setTo(255);
            }
        }
    }

    if (s.mask_noise > 0.0) {
        std::uint64_t state = s.seed ^ (0x9e3779b97f4a7c15ULL * (t + 1));
        const double p = std::min(s.mask_noise, 0.999);
        const auto cutoff = static_cast<std::uint64_t>(
            p * static_cast<double>(std::numeric_limits<std::uint64_t>::max()));
        for (int i = 0; i < s.height; ++i)
            for (int j = 0; j < s.width; ++j)
                if (detail::splitmix64(state) < cutoff) out.mask(i, j) = 255;
    }
    return out;
}

inline TrajectorySet ground_truth(const Scenario& s) {
    TrajectorySet gt;
    for (int t = 0; t < s.frames; ++t)
        for (const auto& a : s.actors)
            if (auto b = actor_box(s, a, t))
                gt.records.push_back({t, a.id, *b, a.cls, ""});
    return gt;
}

// Writes frames/%06d.ppm, masks/%06d.pgm and gt.csv under `dir`.
inline void write_scenario(const Scenario& s, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "frames");
    fs::create_directories(fs::path(dir) / "masks");
    char name[32];
    for (int t = 0; t < s.frames; ++t) {
        const RenderedFrame rf = render_frame(s, t);
        std::snprintf(name, sizeof(name), "%06d.ppm", t);
        cv::imwrite((fs::path(dir) / "frames" / name).string(), rf.image);
        std::snprintf(name, sizeof(name), "%06d.pgm", t);
        cv::imwrite((fs::path(dir) / "masks" / name).string(), rf.mask);
    }
    save_trajectory_csv((fs::path(dir) / "gt.csv").string(), ground_truth(s).records,
                        /*with_class=*/true);
}

// --- catalog ---------------------------------------------------------------

inline std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> list;

    {
        Scenario s;
        s.name = "single";
        s.frames = 60;
        s.actors = {make_actor(1, "car", rgb(220, 60, 50), 40, 30, {{0, 40, 120}, {59, 276, 120}})};
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "crossing";
        s.frames = 80;
        s.actors = {
            make_actor(1, "car", rgb(220, 50, 40), 36, 28, {{0, 40, 120}, {79, 280, 120}}),
            make_actor(2, "pedestrian", rgb(40, 80, 220), 36, 28, {{0, 280, 96}, {79, 40, 96}}),
        };
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "fragmentation";
        s.frames = 60;
        s.actors = {
            make_actor(1, "car", rgb(40, 180, 60), 48, 32, {{0, 50, 120}, {59, 268, 120}})};
        s.frag = {{1, 18, 24, 2, 6, {}},
                  {1, 36, 42, 2, 6, {0.75, 0.25}}};
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "stop-and-exit";
        s.frames = 70;
        s.actors = {make_actor(1, "car", rgb(240, 150, 40), 40, 30,
                               {{0, 40, 120}, {25, 200, 120}, {35, 200, 120}, {55, 340, 120}})};
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "drift-split";
        s.frames = 80;
        s.actors = {
            make_actor(1, "car", rgb(150, 150, 150), 36, 28, {{0, 40, 110}, {79, 280, 110}}),
            make_actor(2, "car", rgb(150, 150, 150), 36, 28, {{0, 280, 120}, {79, 40, 120}}),
        };
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "platoon";
        s.frames = 60;
        s.actors = {
            make_actor(1, "car", rgb(180, 170, 90), 40, 28, {{0, 60, 100}, {59, 178, 100}}),
            make_actor(2, "car", rgb(90, 170, 180), 40, 28,
                       {{0, 60, 158}, {14, 88, 158}, {25, 110, 132}, {59, 178, 132}}),
        };
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "redundant";
        s.frames = 60;
        s.actors = {
            make_actor(1, "car", rgb(200, 200, 70), 30, 40, {{0, 100, 120}}),
            make_actor(2, "car", rgb(200, 200, 70), 30, 40,
                       {{0, 150, 120}, {14, 150, 120}, {24, 100, 120}}),
        };
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "vanish";
        s.frames = 60;
        Actor a = make_actor(1, "car", rgb(150, 60, 200), 40, 30, {{0, 40, 120}, {59, 276, 120}});
        a.visible = {{0, 24}, {34, 59}};
        s.actors = {a};
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "flicker";
        s.frames = 30;
        Actor a = make_actor(1, "car", rgb(70, 200, 200), 30, 24, {{0, 160, 120}});
        a.visible = {{10, 14}};
        s.actors = {a};
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "gap";
        s.frames = 50;
        Actor a = make_actor(1, "car", rgb(230, 220, 60), 40, 30, {{0, 40, 120}, {49, 236, 120}});
        a.mask_dropout = {{20, 22}};
        s.actors = {a};
        list.push_back(s);
    }
    {
        Scenario s;
        s.name = "throughput";
        s.width = 800;
        s.height = 600;
        s.frames = 100;
        const cv::Vec3b colors[5] = {rgb(220, 60, 50), rgb(50, 90, 220), rgb(60, 200, 80),
                                     rgb(230, 200, 60), rgb(200, 70, 200)};
        for (int i = 0; i < 5; ++i) {
            const double x0 = 60.0 + 30.0 * i;
            const double y = 90.0 + 100.0 * i;
            s.actors.push_back(
                make_actor(i + 1, "car", colors[i], 50, 40, {{0, x0, y}, {99, x0 + 2.0 * 99, y}}));
        }
        list.push_back(s);
    }
    return list;
}

inline std::optional<Scenario> find_scenario(const std::string& name) {
    for (auto& s : builtin_scenarios())
        if (s.name == name) return s;
    return std::nullopt;
}

}  // namespace mkcf::synth
