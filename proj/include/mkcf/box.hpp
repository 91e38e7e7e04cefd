#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>

namespace mkcf {

struct PointF {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const PointF& a, const PointF& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Axis-aligned rectangle on the integer pixel grid. Width and height are
// strictly positive; degenerate boxes are rejected at construction.
struct Box {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;

    Box() = default;
    Box(int x_, int y_, int w_, int h_) : x(x_), y(y_), w(w_), h(h_) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("Box: width and height must be positive");
    }

    long long area() const { return static_cast<long long>(w) * h; }
    PointF centroid() const { return {x + w / 2.0, y + h / 2.0}; }
    int right() const { return x + w; }   // exclusive
    int bottom() const { return y + h; }  // exclusive

    Box translated(int dx, int dy) const { return Box(x + dx, y + dy, w, h); }

    cv::Rect to_rect() const { return {x, y, w, h}; }
    static Box from_rect(const cv::Rect& r) { return Box(r.x, r.y, r.width, r.height); }

    friend bool operator==(const Box&, const Box&) = default;
};

// Intersection-over-union of two boxes; 0 when disjoint, 1 when identical.
inline double overlap(const Box& a, const Box& b) {
    const long long iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const long long ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= 0 || ih <= 0) return 0.0;
    const long long inter = iw * ih;
    return static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
}

inline double centroid_distance(const Box& a, const Box& b) {
    return distance(a.centroid(), b.centroid());
}

// Smallest box covering both operands.
inline Box union_box(const Box& a, const Box& b) {
    const int x0 = std::min(a.x, b.x);
    const int y0 = std::min(a.y, b.y);
    return Box(x0, y0, std::max(a.right(), b.right()) - x0,
               std::max(a.bottom(), b.bottom()) - y0);
}

}  // namespace mkcf
