#pragma once

// Appearance features for the correlation filter: one mean-centered grayscale
// channel plus ten color-name probability channels, cell-pooled and cosine
// windowed. Everything is double precision.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "mkcf/box.hpp"
#include "mkcf/color_names.hpp"

namespace mkcf {

// Requested patch lies entirely outside the frame; the caller should treat
// the tracker as lost.
struct PatchOutOfFrame : std::runtime_error {
    PatchOutOfFrame() : std::runtime_error("patch window is entirely outside the frame") {}
};

struct FeaturePatch {
    std::vector<cv::Mat1d> channels;

    int rows() const { return channels.empty() ? 0 : channels.front().rows; }
    int cols() const { return channels.empty() ? 0 : channels.front().cols; }
    int num_channels() const { return static_cast<int>(channels.size()); }

    bool same_shape(const FeaturePatch& o) const {
        return num_channels() == o.num_channels() && rows() == o.rows() && cols() == o.cols();
    }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& ch : channels) s += ch.dot(ch);
        return s;
    }

    FeaturePatch clone() const {
        FeaturePatch out;
        out.channels.reserve(channels.size());
        for (const auto& ch : channels) out.channels.push_back(ch.clone());
        return out;
    }
};

// Outer product of 1-D Hann windows; zero on the border rows/columns. An
// axis of length 1 does not window the other axis (a 1-wide patch keeps its
// 1-D window); the single point itself is a window endpoint.
inline cv::Mat1d hann2d(int w, int h) {
    if (w < 1 || h < 1) throw std::invalid_argument("hann2d: size must be >= 1");
    if (w == 1 && h == 1) return cv::Mat1d::zeros(1, 1);
    auto hann1d = [](int n) {
        cv::Mat1d v(1, n);
        for (int i = 0; i < n; ++i)
            v(0, i) = n == 1 ? 1.0 : 0.5 - 0.5 * std::cos(2.0 * CV_PI * i / (n - 1));
        return v;
    };
    const cv::Mat1d wx = hann1d(w);
    const cv::Mat1d wy = hann1d(h);
    cv::Mat1d out(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) out(i, j) = wy(0, i) * wx(0, j);
    return out;
}

// Sub-image of `box` inflated by (1 + padding) about its center. Pixels
// outside the frame are filled by edge replication. Throws PatchOutOfFrame
// when the window has no intersection with the frame.
inline cv::Mat3b extract_patch(const cv::Mat3b& frame, const Box& box, double padding) {
    if (padding < 0.0) throw std::invalid_argument("extract_patch: padding must be >= 0");
    const int pw = std::max(1, static_cast<int>(std::lround(box.w * (1.0 + padding))));
    const int ph = std::max(1, static_cast<int>(std::lround(box.h * (1.0 + padding))));
    const PointF c = box.centroid();
    const int px = static_cast<int>(std::lround(c.x - pw / 2.0));
    const int py = static_cast<int>(std::lround(c.y - ph / 2.0));

    const cv::Rect want(px, py, pw, ph);
    const cv::Rect have = want & cv::Rect(0, 0, frame.cols, frame.rows);
    if (have.empty()) throw PatchOutOfFrame();

    cv::Mat3b out;
    cv::copyMakeBorder(frame(have), out, have.y - want.y, want.br().y - have.br().y,
                       have.x - want.x, want.br().x - have.br().x, cv::BORDER_REPLICATE);
    return out;
}

// 11-channel feature tensor: channel 0 is grayscale scaled to [-0.5, 0.5],
// channels 1..10 are color-name probabilities. Each channel is average-pooled
// over cell x cell blocks and multiplied by the Hann window. Patch dimensions
// that do not divide by `cell` are bilinearly resized to the nearest multiple.
inline FeaturePatch featurize(const cv::Mat3b& patch, const ColorNamesTable& table, int cell = 1) {
    if (cell < 1) throw std::invalid_argument("featurize: cell must be >= 1");
    if (patch.empty()) throw std::invalid_argument("featurize: empty patch");

    cv::Mat3b src = patch;
    const int rw = std::max(cell, static_cast<int>(std::lround(patch.cols / double(cell))) * cell);
    const int rh = std::max(cell, static_cast<int>(std::lround(patch.rows / double(cell))) * cell);
    if (rw != patch.cols || rh != patch.rows)
        cv::resize(patch, src, cv::Size(rw, rh), 0, 0, cv::INTER_LINEAR);

    const int cw = src.cols / cell;
    const int ch = src.rows / cell;
    constexpr int kChannels = 1 + ColorNamesTable::kColors;

    FeaturePatch f;
    f.channels.assign(kChannels, cv::Mat1d());
    for (auto& m : f.channels) m = cv::Mat1d::zeros(ch, cw);

    const double inv_cell2 = 1.0 / (cell * cell);
    for (int i = 0; i < src.rows; ++i) {
        const cv::Vec3b* px = src.ptr<cv::Vec3b>(i);
        const int ci = i / cell;
        for (int j = 0; j < src.cols; ++j) {
            const int cj = j / cell;
            const int b = px[j][0], g = px[j][1], r = px[j][2];
            f.channels[0](ci, cj) +=
                ((0.299 * r + 0.587 * g + 0.114 * b) / 255.0 - 0.5) * inv_cell2;
            const auto& cn = table.row(r, g, b);
            for (int c = 0; c < ColorNamesTable::kColors; ++c)
                f.channels[1 + c](ci, cj) += cn[c] * inv_cell2;
        }
    }

    const cv::Mat1d window = hann2d(cw, ch);
    for (auto& m : f.channels) m = m.mul(window);
    return f;
}

}  // namespace mkcf
