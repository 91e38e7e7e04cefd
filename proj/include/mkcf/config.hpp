#pragma once

// Run configuration shared by the CLI and tests. Config files are flat
// key=value text; keys use the same names as the parameter structs. Value
// precedence: built-in defaults < preset < config file < command-line flags.

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkcf/tracking.hpp"

namespace mkcf {

struct RunConfig {
    std::string frames;       // printf-style pattern (%06d) or a directory
    std::string masks;        // optional; fallback subtractor when empty
    std::string output = "tracks.csv";
    std::string colornames = "data/colornames.csv";
    std::string gt;           // optional: evaluate right after tracking
    std::string render_dir;   // optional: write annotated frames
    double match_threshold = 50.0;
    int first_frame = -1;     // -1: probe 0 then 1
    int max_frames = -1;      // -1: until files run out
    double fallback_threshold = 25.0;
    ManagerParams params;
};

struct Preset {
    const char* name;
    int T_r;
    double T_c;
};

// Per-video blob thresholds for the standard urban sequences.
inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> table = {
        {"sherbrooke", 23, 44.0},
        {"rouen", 41, 63.0},
        {"st-marc", 35, 55.0},
        {"rene-levesque", 20, 24.0},
    };
    return table;
}

inline bool apply_preset(RunConfig& c, const std::string& name) {
    for (const auto& p : presets())
        if (name == p.name) {
            c.params.blob.T_r = p.T_r;
            c.params.blob.T_c = p.T_c;
            return true;
        }
    return false;
}

inline bool set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };

    if (key == "frames") c.frames = value;
    else if (key == "masks") c.masks = value;
    else if (key == "output") c.output = value;
    else if (key == "colornames") c.colornames = value;
    else if (key == "gt") c.gt = value;
    else if (key == "render_dir") c.render_dir = value;
    else if (key == "match_threshold") c.match_threshold = as_double();
    else if (key == "first_frame") c.first_frame = as_int();
    else if (key == "max_frames") c.max_frames = as_int();
    else if (key == "fallback_threshold") c.fallback_threshold = as_double();
    else if (key == "T_r") c.params.blob.T_r = as_int();
    else if (key == "T_c") c.params.blob.T_c = as_double();
    else if (key == "ratio_min") c.params.blob.ratio_min = as_double();
    else if (key == "ratio_max") c.params.blob.ratio_max = as_double();
    else if (key == "median_radius") c.params.blob.median_radius = as_int();
    else if (key == "close_radius") c.params.blob.close_radius = as_int();
    else if (key == "sigma_kernel") c.params.kcf.sigma_kernel = as_double();
    else if (key == "lambda") c.params.kcf.lambda = as_double();
    else if (key == "learning_rate") c.params.kcf.learning_rate = as_double();
    else if (key == "output_sigma_factor") c.params.kcf.output_sigma_factor = as_double();
    else if (key == "padding") c.params.kcf.padding = as_double();
    else if (key == "cell") c.params.kcf.cell = as_int();
    else if (key == "T_ol") c.params.T_ol = as_double();
    else if (key == "T_oh") c.params.T_oh = as_double();
    else if (key == "invisible_max") c.params.invisible_max = as_int();
    else if (key == "min_lifetime") c.params.min_lifetime = as_int();
    else if (key == "redundancy_frames") c.params.redundancy_frames = as_int();
    else return false;
    return true;
}

inline void load_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            if (a == std::string::npos) return std::string();
            return s.substr(a, s.find_last_not_of(" \t") - a + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        try {
            if (!set_config_value(c, key, value))
                throw std::runtime_error("unknown key '" + key + "'");
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

// Range checks shared by the CLI and config-file path.
inline void validate(const RunConfig& c) {
    const auto& p = c.params;
    if (!(p.T_ol > 1.0 && p.T_ol < p.T_oh))
        throw std::invalid_argument("require 1 < T_ol < T_oh");
    if (p.invisible_max < 1 || p.min_lifetime < 1 || p.redundancy_frames < 1)
        throw std::invalid_argument("invisible_max, min_lifetime, redundancy_frames must be >= 1");
    if (p.blob.T_r < 0 || p.blob.T_c < 0.0)
        throw std::invalid_argument("T_r and T_c must be >= 0");
    if (!(p.blob.ratio_min > 0.0 && p.blob.ratio_min < p.blob.ratio_max))
        throw std::invalid_argument("require 0 < ratio_min < ratio_max");
    if (p.kcf.sigma_kernel <= 0.0 || p.kcf.lambda < 0.0 || p.kcf.output_sigma_factor <= 0.0 ||
        p.kcf.padding < 0.0 || p.kcf.cell < 1)
        throw std::invalid_argument("bad correlation filter parameters");
    if (p.kcf.learning_rate < 0.0 || p.kcf.learning_rate > 1.0)
        throw std::invalid_argument("learning_rate must be in [0, 1]");
}

}  // namespace mkcf
