#pragma once

// Multi-object manager. Per frame: condition the mask into candidate regions,
// step every live correlation filter, classify each region/output pair into
// one of four states by overlap, then arbitrate per state:
//   tracked   - one output on one region; trust the filter box only when the
//               region shrank into the [T_ol, T_oh] fragmentation band,
//               otherwise re-seat the filter on the region box
//   occluded  - several outputs share a region; each keeps its own box, the
//               members form a group, and persistently redundant pairs lose
//               their newest member
//   new       - an unclaimed region either repairs a drifted group member or
//               starts a fresh track
//   invisible - an output without any region ages toward removal
// Finalized trajectories drop the invisible tail and interpolate interior
// gaps; short-lived tracks are discarded outright.

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "mkcf/box.hpp"
#include "mkcf/color_names.hpp"
#include "mkcf/foreground.hpp"
#include "mkcf/kcf.hpp"

namespace mkcf {

enum class TrackState { Tracked, Occluded, NewObject, Invisible };

inline const char* to_string(TrackState s) {
    switch (s) {
        case TrackState::Tracked: return "tracked";
        case TrackState::Occluded: return "occluded";
        case TrackState::NewObject: return "new";
        case TrackState::Invisible: return "invisible";
    }
    return "?";
}

inline std::optional<TrackState> state_from_string(const std::string& s) {
    if (s == "tracked") return TrackState::Tracked;
    if (s == "occluded") return TrackState::Occluded;
    if (s == "new") return TrackState::NewObject;
    if (s == "invisible") return TrackState::Invisible;
    return std::nullopt;
}

struct TrackerOutput {
    int track_id = 0;
    Box box;
    kcf::Response response;
};

struct ManagerParams {
    double T_ol = 1.4;          // lower bound of the trusted-filter area ratio
    double T_oh = 1.8;          // upper bound (lets exiting objects shrink)
    int invisible_max = 8;      // consecutive invisible frames before removal
    int min_lifetime = 6;       // shorter tracks are discarded
    int redundancy_frames = 8;  // consecutive frames before Eq.-style deletion
    BlobParams blob;
    kcf::KcfParams kcf;
};

struct Track {
    int id = 0;
    int birth_frame = 0;
    int group = -1;           // -1: not in any occlusion group
    int invisible_count = 0;
    std::map<int, Box> boxes;
    std::map<int, TrackState> states;
    kcf::KcfModel model;

    int lifetime() const { return static_cast<int>(boxes.size()); }
    const Box& last_box() const { return boxes.rbegin()->second; }
};

enum class BoxSource { KcfOutput, Candidate };

// Scale arbitration for an isolated track: the filter box wins only when its
// area exceeds the region's by a factor inside [T_ol, T_oh] (inclusive),
// which is the signature of a fragmentation shrink.
inline BoxSource arbitrate_scale(long long output_area, long long cor_area,
                                 const ManagerParams& p) {
    const double rho = static_cast<double>(output_area) / static_cast<double>(cor_area);
    return (rho >= p.T_ol && rho <= p.T_oh) ? BoxSource::KcfOutput : BoxSource::Candidate;
}

struct Association {
    std::vector<int> assigned_cor;                 // per output: region index or -1
    std::vector<std::vector<int>> outputs_of_cor;  // per region: output indices
    std::vector<TrackState> cor_state;             // Tracked / Occluded / NewObject
};

// Overlap-based association. Every output goes to its maximum-overlap region
// (ties to the lower region index); outputs overlapping nothing stay
// unassigned and are the invisible set.
inline Association classify(const std::vector<CandidateRegion>& cors,
                            const std::vector<TrackerOutput>& outputs) {
    Association a;
    a.assigned_cor.assign(outputs.size(), -1);
    a.outputs_of_cor.assign(cors.size(), {});
    for (size_t o = 0; o < outputs.size(); ++o) {
        double best = 0.0;
        int best_c = -1;
        for (size_t c = 0; c < cors.size(); ++c) {
            const double ov = overlap(outputs[o].box, cors[c].box);
            if (ov > best) {
                best = ov;
                best_c = static_cast<int>(c);
            }
        }
        if (best_c >= 0) {
            a.assigned_cor[o] = best_c;
            a.outputs_of_cor[best_c].push_back(static_cast<int>(o));
        }
    }
    a.cor_state.resize(cors.size());
    for (size_t c = 0; c < cors.size(); ++c)
        a.cor_state[c] = a.outputs_of_cor[c].empty()      ? TrackState::NewObject
                         : a.outputs_of_cor[c].size() == 1 ? TrackState::Tracked
                                                           : TrackState::Occluded;
    return a;
}

// Drift repair donor: scan regions claimed by two or more outputs whose
// tracks share a group and return the group member matching its region least.
inline std::optional<int> find_drift_donor(const Association& a,
                                           const std::vector<CandidateRegion>& cors,
                                           const std::vector<TrackerOutput>& outputs,
                                           const std::map<int, int>& group_of) {
    for (size_t c = 0; c < cors.size(); ++c) {
        const auto& outs = a.outputs_of_cor[c];
        if (outs.size() < 2) continue;
        std::map<int, std::vector<int>> by_group;
        for (int o : outs) {
            auto it = group_of.find(outputs[o].track_id);
            if (it != group_of.end() && it->second >= 0) by_group[it->second].push_back(o);
        }
        for (const auto& [group, members] : by_group) {
            (void)group;
            if (members.size() < 2) continue;
            int worst = members.front();
            double worst_ov = overlap(outputs[worst].box, cors[c].box);
            for (int o : members) {
                const double ov = overlap(outputs[o].box, cors[c].box);
                if (ov < worst_ov) {
                    worst_ov = ov;
                    worst = o;
                }
            }
            return worst;
        }
    }
    return std::nullopt;
}

// Fill interior frame gaps by componentwise linear interpolation between the
// nearest recorded boxes. Never extrapolates.
inline Track interpolate_gaps(Track t) {
    if (t.boxes.size() < 2) return t;
    std::map<int, Box> filled = t.boxes;
    auto it = t.boxes.begin();
    for (auto prev = it++; it != t.boxes.end(); prev = it++) {
        const int f0 = prev->first, f1 = it->first;
        if (f1 - f0 <= 1) continue;
        const Box &b0 = prev->second, &b1 = it->second;
        for (int f = f0 + 1; f < f1; ++f) {
            const double a = static_cast<double>(f - f0) / (f1 - f0);
            auto lerp = [a](int u, int v) {
                return static_cast<int>(std::llround(u + (v - u) * a));
            };
            filled.emplace(f, Box(lerp(b0.x, b1.x), lerp(b0.y, b1.y), lerp(b0.w, b1.w),
                                  lerp(b0.h, b1.h)));
        }
    }
    t.boxes = std::move(filled);
    return t;
}

struct FrameRecord {
    int frame = 0;
    int id = 0;
    Box box;
    TrackState state = TrackState::Tracked;
};

struct LifecycleEvent {
    enum class Kind { Created, Reassigned, Finalized, Discarded, DeletedRedundant };
    Kind kind;
    int frame;
    int track_id;
};

class TrackManager {
public:
    // Wall time spent per pipeline stage, for the throughput report.
    struct StageTimes {
        double foreground = 0.0;
        double kcf = 0.0;
        double association = 0.0;
    };

    TrackManager(ManagerParams params, ColorNamesTable table)
        : params_(std::move(params)), table_(std::move(table)) {}

    // Advances one frame; frames must arrive in strictly increasing order.
    // Returns the records of every track holding a box on this frame.
    std::vector<FrameRecord> process_frame(int frame_no, const cv::Mat3b& frame,
                                           const cv::Mat1b& mask) {
        using clock = std::chrono::steady_clock;
        if (frame.size() != mask.size())
            throw std::invalid_argument("process_frame: frame and mask dimensions differ");
        if (started_ && frame_no <= last_frame_)
            throw std::invalid_argument("process_frame: frame numbers must increase");
        started_ = true;
        last_frame_ = frame_no;

        auto t0 = clock::now();
        const std::vector<CandidateRegion> cors = candidate_regions(mask, params_.blob);
        auto t1 = clock::now();
        stage_times_.foreground += std::chrono::duration<double>(t1 - t0).count();

        // Step every live filter on the new frame.
        std::vector<TrackerOutput> outputs;
        std::vector<kcf::KcfModel> stepped;
        std::vector<int> output_track;  // output index -> index into live_
        for (size_t t = 0; t < live_.size(); ++t) {
            auto r = kcf::step(live_[t].model, frame, live_[t].last_box(), table_);
            if (!r) continue;  // window left the frame; handled as invisible
            outputs.push_back({live_[t].id, r->box, std::move(r->response)});
            stepped.push_back(std::move(r->model));
            output_track.push_back(static_cast<int>(t));
        }
        auto t2 = clock::now();
        stage_times_.kcf += std::chrono::duration<double>(t2 - t1).count();

        Association assoc = classify(cors, outputs);

        std::map<int, int> group_of;
        for (const auto& t : live_)
            if (t.group >= 0) group_of[t.id] = t.group;

        std::set<int> remove_ids;
        std::vector<Track> created;
        std::vector<char> cor_done(cors.size(), 0);

        // New-object regions first: try to repair a drifted group member,
        // otherwise start a track. Repairing mutates the association, so the
        // donor's old region may fall back to the tracked case below.
        for (size_t c = 0; c < cors.size(); ++c) {
            if (assoc.cor_state[c] != TrackState::NewObject) continue;
            if (auto donor = find_drift_donor(assoc, cors, outputs, group_of)) {
                const int o = *donor;
                auto& src = assoc.outputs_of_cor[assoc.assigned_cor[o]];
                src.erase(std::find(src.begin(), src.end(), o));
                if (src.size() == 1)
                    assoc.cor_state[assoc.assigned_cor[o]] = TrackState::Tracked;
                assoc.assigned_cor[o] = static_cast<int>(c);
                assoc.outputs_of_cor[c] = {o};

                Track& tr = live_[output_track[o]];
                tr.model = kcf::init_model(frame, cors[c].box, table_, params_.kcf);
                tr.boxes[frame_no] = cors[c].box;
                tr.states[frame_no] = TrackState::Tracked;
                tr.invisible_count = 0;
                events_.push_back({LifecycleEvent::Kind::Reassigned, frame_no, tr.id});
            } else {
                Track nt;
                nt.id = next_id_++;
                nt.birth_frame = frame_no;
                nt.model = kcf::init_model(frame, cors[c].box, table_, params_.kcf);
                nt.boxes[frame_no] = cors[c].box;
                nt.states[frame_no] = TrackState::NewObject;
                events_.push_back({LifecycleEvent::Kind::Created, frame_no, nt.id});
                created.push_back(std::move(nt));
            }
            cor_done[c] = 1;
        }

        // Isolated tracks: scale arbitration between filter and region box.
        for (size_t c = 0; c < cors.size(); ++c) {
            if (cor_done[c] || assoc.cor_state[c] != TrackState::Tracked) continue;
            const int o = assoc.outputs_of_cor[c].front();
            Track& tr = live_[output_track[o]];
            if (arbitrate_scale(outputs[o].box.area(), cors[c].box.area(), params_) ==
                BoxSource::KcfOutput) {
                tr.model = std::move(stepped[o]);
                tr.boxes[frame_no] = outputs[o].box;
            } else {
                tr.model = kcf::init_model(frame, cors[c].box, table_, params_.kcf);
                tr.boxes[frame_no] = cors[c].box;
            }
            tr.states[frame_no] = TrackState::Tracked;
            tr.invisible_count = 0;
            tr.group = -1;  // tracked alone for one frame leaves the group
        }

        // Occluded regions: straight-through boxes, group bookkeeping, and
        // deletion of persistently redundant pairs.
        std::set<std::pair<int, int>> pairs_seen;
        for (size_t c = 0; c < cors.size(); ++c) {
            if (cor_done[c] || assoc.cor_state[c] != TrackState::Occluded) continue;
            const auto& members = assoc.outputs_of_cor[c];

            for (int o : members) {
                Track& tr = live_[output_track[o]];
                tr.model = std::move(stepped[o]);
                tr.boxes[frame_no] = outputs[o].box;
                tr.states[frame_no] = TrackState::Occluded;
                tr.invisible_count = 0;
            }

            std::set<int> groups;
            for (int o : members) {
                const int g = live_[output_track[o]].group;
                if (g >= 0) groups.insert(g);
            }
            int target = groups.empty() ? next_group_++ : *groups.begin();
            if (groups.size() > 1)
                for (auto& t : live_)
                    if (t.group >= 0 && groups.count(t.group)) t.group = target;
            for (int o : members) live_[output_track[o]].group = target;

            for (size_t i = 0; i < members.size(); ++i) {
                for (size_t j = i + 1; j < members.size(); ++j) {
                    Track& ti = live_[output_track[members[i]]];
                    Track& tj = live_[output_track[members[j]]];
                    if (remove_ids.count(ti.id) || remove_ids.count(tj.id)) continue;
                    const auto key = std::minmax(ti.id, tj.id);
                    pairs_seen.insert(key);
                    const long long sum =
                        outputs[members[i]].box.area() + outputs[members[j]].box.area();
                    if (sum > cors[c].box.area()) {
                        if (++redundancy_[key] >= params_.redundancy_frames) {
                            // Delete the most recent of the two (ties: larger
                            // id); the survivor is re-seated on the region.
                            Track* victim = &tj;
                            if (ti.birth_frame != tj.birth_frame)
                                victim = ti.birth_frame > tj.birth_frame ? &ti : &tj;
                            else
                                victim = ti.id > tj.id ? &ti : &tj;
                            Track& survivor = victim == &ti ? tj : ti;
                            survivor.boxes[frame_no] = cors[c].box;
                            survivor.model =
                                kcf::init_model(frame, cors[c].box, table_, params_.kcf);
                            events_.push_back(
                                {LifecycleEvent::Kind::DeletedRedundant, frame_no, victim->id});
                            remove_ids.insert(victim->id);
                        }
                    } else {
                        redundancy_[key] = 0;
                    }
                }
            }
        }

        // Redundancy counters only accumulate over consecutive shared frames.
        for (auto it = redundancy_.begin(); it != redundancy_.end();)
            it = pairs_seen.count(it->first) ? std::next(it) : redundancy_.erase(it);

        // Tracks without a box this frame are invisible; age them out.
        for (auto& tr : live_) {
            if (remove_ids.count(tr.id) || tr.boxes.count(frame_no)) continue;
            tr.states[frame_no] = TrackState::Invisible;
            if (++tr.invisible_count > params_.invisible_max) {
                const int id = tr.id;
                retire(std::move(tr), frame_no);
                remove_ids.insert(id);
            }
        }

        if (!remove_ids.empty()) {
            std::erase_if(live_, [&](const Track& t) { return remove_ids.count(t.id) > 0; });
            std::erase_if(redundancy_, [&](const auto& kv) {
                return remove_ids.count(kv.first.first) || remove_ids.count(kv.first.second);
            });
        }
        for (auto& nt : created) live_.push_back(std::move(nt));

        std::vector<FrameRecord> records;
        for (const auto& t : live_) {
            auto it = t.boxes.find(frame_no);
            if (it != t.boxes.end())
                records.push_back({frame_no, t.id, it->second, t.states.at(frame_no)});
        }
        stage_times_.association +=
            std::chrono::duration<double>(clock::now() - t2).count();
        return records;
    }

    // End of input: flush remaining tracks through the lifetime gate.
    void finish() {
        for (auto& tr : live_) retire(std::move(tr), last_frame_);
        live_.clear();
        redundancy_.clear();
    }

    const std::vector<Track>& finished() const { return finished_; }
    const std::vector<Track>& live() const { return live_; }
    const std::vector<LifecycleEvent>& events() const { return events_; }
    const StageTimes& stage_times() const { return stage_times_; }

    // Finalized trajectories as flat records, sorted by (frame, id).
    std::vector<FrameRecord> trajectory_records() const {
        std::vector<FrameRecord> out;
        for (const auto& t : finished_)
            for (const auto& [f, b] : t.boxes)
                out.push_back({f, t.id, b, t.states.at(f)});
        std::sort(out.begin(), out.end(), [](const FrameRecord& a, const FrameRecord& b) {
            return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
        });
        return out;
    }

private:
    void retire(Track tr, int frame_no) {
        if (tr.lifetime() < params_.min_lifetime) {
            events_.push_back({LifecycleEvent::Kind::Discarded, frame_no, tr.id});
            return;
        }
        events_.push_back({LifecycleEvent::Kind::Finalized, frame_no, tr.id});
        finished_.push_back(interpolate_gaps(std::move(tr)));
    }

    ManagerParams params_;
    ColorNamesTable table_;
    StageTimes stage_times_;
    std::vector<Track> live_;      // ascending id order
    std::vector<Track> finished_;
    std::vector<LifecycleEvent> events_;
    std::map<std::pair<int, int>, int> redundancy_;
    int next_id_ = 1;
    int next_group_ = 1;
    int last_frame_ = 0;
    bool started_ = false;
};

}  // namespace mkcf
