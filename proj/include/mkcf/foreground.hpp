#pragma once

// Foreground mask conditioning and blob analysis: morphology, 8-connected
// component extraction, then size/ratio filtering and proximity merging into
// the candidate object regions handed to the tracker.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "mkcf/box.hpp"

namespace mkcf {

struct BlobParams {
    int T_r = 25;             // minimum region area, foreground pixels
    double T_c = 30.0;        // centroid distance below which regions merge
    double ratio_min = 0.15;  // acceptable w/h ratio bounds
    double ratio_max = 8.0;
    int median_radius = 1;
    int close_radius = 2;
};

struct CandidateRegion {
    Box box;              // tight bounding box of the component
    long long area_px;    // foreground pixel count
    PointF centroid;      // pixel-mean of the component
};

// Median filter, morphological closing, then hole filling (background
// components not reaching the frame border become foreground).
inline cv::Mat1b clean(const cv::Mat1b& mask, const BlobParams& p) {
    cv::Mat1b m = mask.clone();
    if (p.median_radius > 0) cv::medianBlur(m, m, 2 * p.median_radius + 1);
    if (p.close_radius > 0) {
        const int k = 2 * p.close_radius + 1;
        cv::morphologyEx(m, m, cv::MORPH_CLOSE,
                         cv::getStructuringElement(cv::MORPH_RECT, cv::Size(k, k)));
    }

    // Flood the border-connected background on a padded copy; what is left
    // unfilled is interior holes.
    cv::Mat1b padded;
    cv::copyMakeBorder(m, padded, 1, 1, 1, 1, cv::BORDER_CONSTANT, 0);
    cv::Mat1b flooded = padded.clone();
    cv::floodFill(flooded, cv::Point(0, 0), 255);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j)
            if (flooded(i + 1, j + 1) == 0) m(i, j) = 255;
    return m;
}

// 8-connected components of a cleaned mask, ordered row-major by each
// component's first pixel.
inline std::vector<CandidateRegion> components(const cv::Mat1b& mask) {
    cv::Mat1i labels;
    cv::Mat stats, centroids;
    const int n = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8, CV_32S);

    std::vector<int> order;  // label ids in first-pixel scan order
    std::vector<char> seen(n, 0);
    seen[0] = 1;  // background
    for (int i = 0; i < labels.rows; ++i) {
        const int* row = labels.ptr<int>(i);
        for (int j = 0; j < labels.cols; ++j)
            if (!seen[row[j]]) {
                seen[row[j]] = 1;
                order.push_back(row[j]);
            }
    }

    std::vector<CandidateRegion> out;
    out.reserve(order.size());
    for (int label : order) {
        CandidateRegion r;
        r.box = Box(stats.at<int>(label, cv::CC_STAT_LEFT), stats.at<int>(label, cv::CC_STAT_TOP),
                    stats.at<int>(label, cv::CC_STAT_WIDTH),
                    stats.at<int>(label, cv::CC_STAT_HEIGHT));
        r.area_px = stats.at<int>(label, cv::CC_STAT_AREA);
        r.centroid = {centroids.at<double>(label, 0), centroids.at<double>(label, 1)};
        out.push_back(r);
    }
    return out;
}

// Drops undersized and implausibly-shaped regions, then merges surviving
// regions whose centroids are closer than T_c, closest pair first. Merged
// regions are exempt from re-filtering.
inline std::vector<CandidateRegion> refine(std::vector<CandidateRegion> regions,
                                           const BlobParams& p) {
    std::vector<CandidateRegion> kept;
    kept.reserve(regions.size());
    for (const auto& r : regions) {
        if (r.area_px < p.T_r) continue;
        const double ratio = double(r.box.w) / r.box.h;
        if (ratio < p.ratio_min || ratio > p.ratio_max) continue;
        kept.push_back(r);
    }

    while (kept.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::pair<size_t, size_t> pair{0, 0};
        for (size_t i = 0; i + 1 < kept.size(); ++i)
            for (size_t j = i + 1; j < kept.size(); ++j) {
                const double d = distance(kept[i].centroid, kept[j].centroid);
                if (d < best) {
                    best = d;
                    pair = {i, j};
                }
            }
        if (!(best < p.T_c)) break;  // strict: exactly T_c apart stays separate

        auto& a = kept[pair.first];
        const auto& b = kept[pair.second];
        const double total = double(a.area_px + b.area_px);
        a.centroid = {(a.centroid.x * a.area_px + b.centroid.x * b.area_px) / total,
                      (a.centroid.y * a.area_px + b.centroid.y * b.area_px) / total};
        a.box = union_box(a.box, b.box);
        a.area_px += b.area_px;
        kept.erase(kept.begin() + pair.second);
    }
    return kept;
}

inline std::vector<CandidateRegion> candidate_regions(const cv::Mat1b& mask,
                                                      const BlobParams& p) {
    return refine(components(clean(mask, p)), p);
}

// Running-average fallback subtractor for when no mask files are supplied.
class BackgroundModel {
public:
    explicit BackgroundModel(double threshold = 25.0, double rate = 0.01)
        : threshold_(threshold), rate_(rate) {}

    cv::Mat1b subtract_and_update(const cv::Mat3b& frame) {
        cv::Mat1b gray;
        cv::cvtColor(frame, gray, cv::COLOR_BGR2GRAY);
        cv::Mat1f grayf;
        gray.convertTo(grayf, CV_32F);

        if (average_.empty()) {
            average_ = grayf.clone();
            return cv::Mat1b::zeros(frame.rows, frame.cols);
        }
        if (average_.size() != grayf.size())
            throw std::invalid_argument("fallback subtractor: frame size changed");

        cv::Mat1b mask(frame.rows, frame.cols);
        for (int i = 0; i < frame.rows; ++i)
            for (int j = 0; j < frame.cols; ++j)
                mask(i, j) = std::abs(grayf(i, j) - average_(i, j)) > threshold_ ? 255 : 0;
        average_ = (1.0 - rate_) * average_ + rate_ * grayf;
        return mask;
    }

private:
    double threshold_;
    double rate_;
    cv::Mat1f average_;
};

}  // namespace mkcf
