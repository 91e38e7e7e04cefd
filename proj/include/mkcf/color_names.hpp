#pragma once

// RGB -> color-name probability table. 16 bins per channel (4096 rows), ten
// linguistic colors per row. The shipped CSV is produced by soft_reference();
// one_hot_fallback() gives a dependency-free table when no file is present.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mkcf {

class ColorNamesTable {
public:
    static constexpr int kBins = 16;
    static constexpr int kRows = kBins * kBins * kBins;
    static constexpr int kColors = 10;

    struct Reference {
        const char* name;
        int r, g, b;
    };

    static const std::array<Reference, kColors>& references() {
        static const std::array<Reference, kColors> refs = {{
            {"black", 0, 0, 0},
            {"blue", 0, 0, 255},
            {"brown", 139, 69, 19},
            {"gray", 128, 128, 128},
            {"green", 0, 128, 0},
            {"orange", 255, 165, 0},
            {"pink", 255, 192, 203},
            {"purple", 128, 0, 128},
            {"red", 255, 0, 0},
            {"yellow", 255, 255, 0},
        }};
        return refs;
    }

    // Row index for an 8-bit RGB triple: row-major (r, g, b) bin order.
    static int bin_index(int r, int g, int b) {
        return ((r >> 4) * kBins + (g >> 4)) * kBins + (b >> 4);
    }

    const std::array<double, kColors>& row(int r, int g, int b) const {
        return rows_[bin_index(r, g, b)];
    }
    const std::array<double, kColors>& row_at(int index) const { return rows_[index]; }

    // Each bin gets a one-hot vector for the nearest reference color
    // (squared RGB distance from the bin center, ties to the lowest index).
    static ColorNamesTable one_hot_fallback() {
        ColorNamesTable t;
        for (int r = 0; r < kBins; ++r)
            for (int g = 0; g < kBins; ++g)
                for (int b = 0; b < kBins; ++b) {
                    const double cr = r * 16 + 8, cg = g * 16 + 8, cb = b * 16 + 8;
                    int best = 0;
                    double best_d = dist2(cr, cg, cb, references()[0]);
                    for (int c = 1; c < kColors; ++c) {
                        const double d = dist2(cr, cg, cb, references()[c]);
                        if (d < best_d) {
                            best_d = d;
                            best = c;
                        }
                    }
                    auto& row = t.rows_[(r * kBins + g) * kBins + b];
                    row.fill(0.0);
                    row[best] = 1.0;
                }
        return t;
    }

    // Smooth table: p(color | bin) proportional to a Gaussian similarity to
    // the reference colors. Builder for the CSV shipped under data/.
    static ColorNamesTable soft_reference(double sigma = 60.0) {
        ColorNamesTable t;
        const double inv = 1.0 / (2.0 * sigma * sigma);
        for (int r = 0; r < kBins; ++r)
            for (int g = 0; g < kBins; ++g)
                for (int b = 0; b < kBins; ++b) {
                    const double cr = r * 16 + 8, cg = g * 16 + 8, cb = b * 16 + 8;
                    auto& row = t.rows_[(r * kBins + g) * kBins + b];
                    double sum = 0.0;
                    for (int c = 0; c < kColors; ++c) {
                        row[c] = std::exp(-dist2(cr, cg, cb, references()[c]) * inv);
                        sum += row[c];
                    }
                    for (auto& v : row) v /= sum;
                }
        return t;
    }

    // CSV layout: one row per bin in row-major (r, g, b) bin order, ten
    // comma-separated probabilities per row.
    static ColorNamesTable load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("color names: cannot open " + path);
        ColorNamesTable t;
        std::string line;
        int row = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (row >= kRows)
                throw std::runtime_error("color names: too many rows in " + path);
            std::istringstream ss(line);
            std::string field;
            auto& out = t.rows_[row];
            double sum = 0.0;
            for (int c = 0; c < kColors; ++c) {
                if (!std::getline(ss, field, ','))
                    throw std::runtime_error("color names: short row " + std::to_string(row + 1));
                out[c] = std::stod(field);
                if (out[c] < 0.0)
                    throw std::runtime_error("color names: negative probability, row " +
                                             std::to_string(row + 1));
                sum += out[c];
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw std::runtime_error("color names: row " + std::to_string(row + 1) +
                                         " does not sum to 1");
            ++row;
        }
        if (row != kRows)
            throw std::runtime_error("color names: expected " + std::to_string(kRows) +
                                     " rows, got " + std::to_string(row));
        return t;
    }

    // Loads `path` when it exists, otherwise the one-hot fallback.
    static ColorNamesTable load_or_fallback(const std::string& path) {
        if (!path.empty()) {
            std::ifstream probe(path);
            if (probe.good()) return load_csv(path);
        }
        return one_hot_fallback();
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("color names: cannot write " + path);
        char buf[32];
        for (const auto& row : rows_) {
            for (int c = 0; c < kColors; ++c) {
                std::snprintf(buf, sizeof(buf), "%.8f", row[c]);
                out << buf << (c + 1 < kColors ? "," : "\n");
            }
        }
    }

    friend bool operator==(const ColorNamesTable&, const ColorNamesTable&) = default;

private:
    static double dist2(double r, double g, double b, const Reference& ref) {
        const double dr = r - ref.r, dg = g - ref.g, db = b - ref.b;
        return dr * dr + dg * dg + db * db;
    }

    std::vector<std::array<double, kColors>> rows_{kRows};
};

}  // namespace mkcf
