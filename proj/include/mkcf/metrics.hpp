#pragma once

// CLEAR MOT evaluation (MOTA / MOTP) over ground-truth and hypothesis
// trajectories, plus the shared CSV trajectory format. Matching is centroid
// distance under a threshold with sticky carryover of the previous frame's
// correspondences and optimal assignment of the remainder.

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkcf/box.hpp"

namespace mkcf {

struct TrajectoryRecord {
    int frame = 0;
    int id = 0;
    Box box;
    std::string cls;    // optional class tag (ground truth)
    std::string state;  // optional tracker state (hypotheses); ignored by evaluation
};

struct TrajectorySet {
    std::vector<TrajectoryRecord> records;

    void validate() const {
        std::set<std::pair<int, int>> seen;
        for (const auto& r : records) {
            if (r.frame < 0) throw std::invalid_argument("trajectory: negative frame number");
            if (!seen.insert({r.frame, r.id}).second)
                throw std::invalid_argument("trajectory: duplicate (frame,id) " +
                                            std::to_string(r.frame) + "," + std::to_string(r.id));
        }
    }
};

// --- CSV format: header `frame,id,x,y,w,h[,class][,state]` ---------------

inline TrajectorySet load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory file " + path);

    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) out.push_back(field);
        if (!line.empty() && line.back() == ',') out.push_back("");
        return out;
    };

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    std::map<std::string, int> col;
    for (size_t i = 0; i < header.size(); ++i) col[header[i]] = static_cast<int>(i);
    for (const char* required : {"frame", "id", "x", "y", "w", "h"})
        if (!col.count(required))
            throw std::runtime_error(path + ": header misses column '" + required + "'");

    TrajectorySet set;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        auto get = [&](const char* name) -> const std::string& {
            const int i = col.at(name);
            if (i >= static_cast<int>(fields.size()))
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": short row");
            return fields[i];
        };
        try {
            TrajectoryRecord r;
            r.frame = std::stoi(get("frame"));
            r.id = std::stoi(get("id"));
            r.box = Box(std::stoi(get("x")), std::stoi(get("y")), std::stoi(get("w")),
                        std::stoi(get("h")));
            if (col.count("class") && col.at("class") < static_cast<int>(fields.size()))
                r.cls = fields[col.at("class")];
            if (col.count("state") && col.at("state") < static_cast<int>(fields.size()))
                r.state = fields[col.at("state")];
            set.records.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed row (" + e.what() + ")");
        }
    }
    set.validate();
    return set;
}

inline void save_trajectory_csv(const std::string& path, const std::vector<TrajectoryRecord>& records,
                                bool with_class = false, bool with_state = false) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory file " + path);
    out << "frame,id,x,y,w,h";
    if (with_class) out << ",class";
    if (with_state) out << ",state";
    out << "\n";
    for (const auto& r : records) {
        out << r.frame << ',' << r.id << ',' << r.box.x << ',' << r.box.y << ',' << r.box.w << ','
            << r.box.h;
        if (with_class) out << ',' << r.cls;
        if (with_state) out << ',' << r.state;
        out << "\n";
    }
}

// --- scores ----------------------------------------------------------------

struct MotScore {
    long long misses = 0;
    long long false_positives = 0;
    long long id_switches = 0;
    long long matches = 0;
    long long total_gt = 0;
    double distance_sum = 0.0;

    bool has_ground_truth() const { return total_gt > 0; }

    // 1 - (misses + fp + switches) / total_gt; may be negative, never clamped.
    double mota() const {
        if (!has_ground_truth())
            throw std::logic_error("mota undefined without ground truth");
        return 1.0 - static_cast<double>(misses + false_positives + id_switches) /
                         static_cast<double>(total_gt);
    }
    double motp() const { return matches > 0 ? distance_sum / matches : 0.0; }
};

namespace detail {

// Min-cost assignment (shortest augmenting path with potentials, O(n^3)).
// cost is rows x cols, implicitly padded square; returns per-row column or -1.
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int rows = static_cast<int>(cost.size());
    const int cols = rows ? static_cast<int>(cost.front().size()) : 0;
    const int n = std::max(rows, cols);
    if (n == 0) return {};
    constexpr double kPad = 1e9;
    auto at = [&](int r, int c) { return r < rows && c < cols ? cost[r][c] : kPad; };

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match_col(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match_col[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match_col[j0];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            const int j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(rows, -1);
    for (int j = 1; j <= n; ++j) {
        const int i = match_col[j];
        if (i >= 1 && i <= rows && j <= cols) row_to_col[i - 1] = j - 1;
    }
    return row_to_col;
}

struct EvaluateDetail {
    MotScore score;
    // (frame, hyp id) -> class of the matched ground-truth record
    std::map<std::pair<int, int>, std::string> hyp_match_class;
};

inline EvaluateDetail evaluate_detail(const TrajectorySet& gt, const TrajectorySet& hyp,
                                      double match_threshold) {
    gt.validate();
    hyp.validate();
    std::map<int, std::map<int, const TrajectoryRecord*>> gt_by_frame, hyp_by_frame;
    for (const auto& r : gt.records) gt_by_frame[r.frame][r.id] = &r;
    for (const auto& r : hyp.records) hyp_by_frame[r.frame][r.id] = &r;
    std::set<int> frames;
    for (const auto& [f, _] : gt_by_frame) frames.insert(f);
    for (const auto& [f, _] : hyp_by_frame) frames.insert(f);

    EvaluateDetail out;
    MotScore& s = out.score;
    std::map<int, int> active;      // gt id -> hyp id carried from previous frame
    std::map<int, int> last_match;  // persistent across gaps, for switch counting

    static const std::map<int, const TrajectoryRecord*> kNone;
    for (int f : frames) {
        const auto gi_f = gt_by_frame.find(f);
        const auto hi_f = hyp_by_frame.find(f);
        const auto& gts = gi_f != gt_by_frame.end() ? gi_f->second : kNone;
        const auto& hyps = hi_f != hyp_by_frame.end() ? hi_f->second : kNone;
        s.total_gt += static_cast<long long>(gts.size());

        std::map<int, int> current;
        std::set<int> used_hyp;

        auto record_match = [&](int g, int h, double d) {
            current[g] = h;
            used_hyp.insert(h);
            ++s.matches;
            s.distance_sum += d;
            auto lm = last_match.find(g);
            if (lm != last_match.end() && lm->second != h) ++s.id_switches;
            last_match[g] = h;
            out.hyp_match_class[{f, h}] = gts.at(g)->cls;
        };

        // Sticky carryover: keep last frame's pairs while both exist and stay
        // within the threshold.
        for (const auto& [g, h] : active) {
            auto gi = gts.find(g);
            auto hi = hyps.find(h);
            if (gi == gts.end() || hi == hyps.end()) continue;
            const double d = centroid_distance(gi->second->box, hi->second->box);
            if (d <= match_threshold) record_match(g, h, d);
        }

        // Optimal assignment for the rest.
        std::vector<int> free_gt, free_hyp;
        for (const auto& [g, rec] : gts)
            if (!current.count(g)) free_gt.push_back(g);
        for (const auto& [h, rec] : hyps)
            if (!used_hyp.count(h)) free_hyp.push_back(h);
        if (!free_gt.empty() && !free_hyp.empty()) {
            constexpr double kInfeasible = 1e9;
            std::vector<std::vector<double>> cost(free_gt.size(),
                                                  std::vector<double>(free_hyp.size()));
            for (size_t i = 0; i < free_gt.size(); ++i)
                for (size_t j = 0; j < free_hyp.size(); ++j) {
                    const double d = centroid_distance(gts.at(free_gt[i])->box,
                                                       hyps.at(free_hyp[j])->box);
                    cost[i][j] = d <= match_threshold ? d : kInfeasible;
                }
            const auto asg = min_cost_assignment(cost);
            for (size_t i = 0; i < free_gt.size(); ++i) {
                if (asg[i] < 0 || cost[i][asg[i]] >= kInfeasible) continue;
                record_match(free_gt[i], free_hyp[asg[i]], cost[i][asg[i]]);
            }
        }

        s.misses += static_cast<long long>(gts.size() - current.size());
        s.false_positives += static_cast<long long>(hyps.size() - used_hyp.size());
        active = std::move(current);
    }
    return out;
}

}  // namespace detail

inline MotScore evaluate(const TrajectorySet& gt, const TrajectorySet& hyp,
                         double match_threshold) {
    return detail::evaluate_detail(gt, hyp, match_threshold).score;
}

// Per-class scores plus an "all" row. Ground truth is split by class tag
// (empty tags group under "other" when any tag exists); hypothesis records
// that the all-classes run matched to a *different* class are left out of
// a class's evaluation so disjoint classes score independently.
inline std::map<std::string, MotScore> evaluate_per_class(const TrajectorySet& gt,
                                                          const TrajectorySet& hyp,
                                                          double match_threshold) {
    const auto full = detail::evaluate_detail(gt, hyp, match_threshold);

    bool any_tag = false;
    for (const auto& r : gt.records) any_tag |= !r.cls.empty();
    auto class_of = [&](const TrajectoryRecord& r) {
        return r.cls.empty() ? std::string("other") : r.cls;
    };

    std::map<std::string, MotScore> out;
    out["all"] = full.score;
    if (!any_tag) return out;

    std::set<std::string> classes;
    for (const auto& r : gt.records) classes.insert(class_of(r));
    for (const auto& cls : classes) {
        TrajectorySet gt_c, hyp_c;
        for (const auto& r : gt.records)
            if (class_of(r) == cls) gt_c.records.push_back(r);
        for (const auto& r : hyp.records) {
            auto it = full.hyp_match_class.find({r.frame, r.id});
            const bool other_class = it != full.hyp_match_class.end() &&
                                     (it->second.empty() ? std::string("other") : it->second) != cls;
            if (!other_class) hyp_c.records.push_back(r);
        }
        out[cls] = evaluate(gt_c, hyp_c, match_threshold);
    }
    return out;
}

}  // namespace mkcf
