#pragma once

// Thin double-precision wrappers around cv::dft. Spectra are CV_64FC2 mats of
// the same spatial size as the input; no packing tricks, so elementwise
// complex arithmetic stays straightforward.

#include <stdexcept>

#include <opencv2/core.hpp>

namespace mkcf::fourier {

using Spectrum = cv::Mat;  // CV_64FC2

inline Spectrum fft2(const cv::Mat1d& m) {
    Spectrum out;
    cv::dft(m, out, cv::DFT_COMPLEX_OUTPUT);
    return out;
}

// Full complex inverse transform (scaled by 1/N).
inline Spectrum ifft2(const Spectrum& s) {
    Spectrum out;
    cv::idft(s, out, cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);
    return out;
}

inline cv::Mat1d real_part(const Spectrum& s) {
    cv::Mat planes[2];
    cv::split(s, planes);
    return planes[0];
}

inline double max_abs_imag(const Spectrum& s) {
    cv::Mat planes[2];
    cv::split(s, planes);
    double lo, hi;
    cv::minMaxLoc(planes[1], &lo, &hi);
    return std::max(std::abs(lo), std::abs(hi));
}

// Elementwise a .* b.
inline Spectrum mul(const Spectrum& a, const Spectrum& b) {
    Spectrum out;
    cv::mulSpectrums(a, b, out, 0, false);
    return out;
}

// Elementwise conj(a) .* b.
inline Spectrum mul_conj_a(const Spectrum& a, const Spectrum& b) {
    Spectrum out;
    cv::mulSpectrums(b, a, out, 0, true);  // b .* conj(a)
    return out;
}

// Elementwise num / (den + offset). The denominator magnitude is bounded
// below by `floor_mag` so degenerate spectra cannot divide by zero.
inline Spectrum divide_guarded(const Spectrum& num, const Spectrum& den, double offset,
                               double floor_mag = 1e-12) {
    if (num.size() != den.size())
        throw std::invalid_argument("divide_guarded: size mismatch");
    Spectrum out(num.size(), CV_64FC2);
    for (int i = 0; i < num.rows; ++i) {
        const auto* n = num.ptr<cv::Vec2d>(i);
        const auto* d = den.ptr<cv::Vec2d>(i);
        auto* o = out.ptr<cv::Vec2d>(i);
        for (int j = 0; j < num.cols; ++j) {
            double dr = d[j][0] + offset;
            double di = d[j][1];
            double mag2 = dr * dr + di * di;
            if (mag2 < floor_mag * floor_mag) {
                dr = floor_mag;
                di = 0.0;
                mag2 = floor_mag * floor_mag;
            }
            o[j][0] = (n[j][0] * dr + n[j][1] * di) / mag2;
            o[j][1] = (n[j][1] * dr - n[j][0] * di) / mag2;
        }
    }
    return out;
}

}  // namespace mkcf::fourier
