#pragma once

// Single-object kernelized correlation filter. The model is a Fourier-domain
// kernel ridge regression over all cyclic shifts of a windowed feature patch:
//
//   k^xz = exp(-(|x|^2 + |z|^2 - 2 F^-1(sum_c conj(x_c^) .* z_c^)) / (sigma^2 N))
//   a^   = y^ / (k^xx^ + lambda)
//   r    = F^-1(k^xz^ .* a^)
//
// Zero shift lives at map index (0,0); argmax positions past half the window
// wrap to negative offsets. The filter never adapts scale: rescaling an
// object requires training a fresh model.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <opencv2/core.hpp>

#include "mkcf/box.hpp"
#include "mkcf/features.hpp"
#include "mkcf/fourier.hpp"

namespace mkcf::kcf {

struct KcfParams {
    double sigma_kernel = 0.5;
    double lambda = 1e-4;
    double learning_rate = 0.02;
    double output_sigma_factor = 0.1;
    double padding = 1.0;
    int cell = 1;
};

struct Response {
    cv::Mat1d map;
    double peak_value = 0.0;
    PointF peak_offset;  // pixels relative to the window center
};

struct KcfModel {
    cv::Mat alphaf;                            // CV_64FC2 dual coefficients
    FeaturePatch tmpl;                         // learned appearance (cell domain)
    std::vector<fourier::Spectrum> tmpl_fft;   // cached per-channel spectra of tmpl
    cv::Mat yf;                                // regression target spectrum
    cv::Size window_size;                      // pixels, fixed for the model lifetime
    cv::Size target_size;                      // pixels
    KcfParams params;
};

// Centered 2-D Gaussian stored with its peak wrapped to index (0,0), so it
// matches the response map's shift convention. Peak value is exactly 1.
inline cv::Mat1d regression_target(int w, int h, double sigma_cells) {
    cv::Mat1d y(h, w);
    const double inv = -0.5 / (sigma_cells * sigma_cells);
    for (int i = 0; i < h; ++i) {
        const double di = i > h / 2 ? i - h : i;
        for (int j = 0; j < w; ++j) {
            const double dj = j > w / 2 ? j - w : j;
            y(i, j) = std::exp(inv * (di * di + dj * dj));
        }
    }
    return y;
}

inline std::vector<fourier::Spectrum> channel_spectra(const FeaturePatch& p) {
    std::vector<fourier::Spectrum> out;
    out.reserve(p.channels.size());
    for (const auto& ch : p.channels) out.push_back(fourier::fft2(ch));
    return out;
}

namespace detail {

inline cv::Mat1d correlation_from_spectra(const std::vector<fourier::Spectrum>& xf,
                                          double x_norm2,
                                          const std::vector<fourier::Spectrum>& zf,
                                          double z_norm2, int rows, int cols, double sigma) {
    fourier::Spectrum acc = cv::Mat::zeros(rows, cols, CV_64FC2);
    for (size_t c = 0; c < xf.size(); ++c) acc += fourier::mul_conj_a(xf[c], zf[c]);
    cv::Mat1d corr = fourier::real_part(fourier::ifft2(acc));

    const double n = static_cast<double>(rows) * cols * static_cast<double>(xf.size());
    const double scale = -1.0 / (sigma * sigma * n);
    cv::Mat1d k(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double d = x_norm2 + z_norm2 - 2.0 * corr(i, j);
            k(i, j) = std::exp(scale * std::max(0.0, d));
        }
    return k;
}

}  // namespace detail

// Gaussian kernel values between x and every cyclic shift of z, computed with
// FFTs. All entries lie in (0, 1]; the zero-shift entry sits at (0,0).
inline cv::Mat1d gaussian_correlation(const FeaturePatch& x, const FeaturePatch& z,
                                      double sigma) {
    if (!x.same_shape(z))
        throw std::invalid_argument("gaussian_correlation: shape mismatch");
    return detail::correlation_from_spectra(channel_spectra(x), x.squared_norm(),
                                            channel_spectra(z), z.squared_norm(), x.rows(),
                                            x.cols(), sigma);
}

// Closed-form ridge regression on one windowed patch.
inline KcfModel train(const FeaturePatch& patch, const KcfParams& params, cv::Size target_size,
                      cv::Size window_size) {
    KcfModel m;
    m.params = params;
    m.target_size = target_size;
    m.window_size = window_size;
    m.tmpl = patch.clone();
    m.tmpl_fft = channel_spectra(patch);

    const double sigma_cells =
        params.output_sigma_factor * std::sqrt(double(target_size.area())) / params.cell;
    m.yf = fourier::fft2(regression_target(patch.cols(), patch.rows(), sigma_cells));

    const cv::Mat1d k = detail::correlation_from_spectra(
        m.tmpl_fft, patch.squared_norm(), m.tmpl_fft, patch.squared_norm(), patch.rows(),
        patch.cols(), params.sigma_kernel);
    m.alphaf = fourier::divide_guarded(m.yf, fourier::fft2(k), params.lambda);
    return m;
}

// Correlation response of the model on a feature patch of identical shape.
inline Response detect(const KcfModel& model, const FeaturePatch& patch) {
    if (!model.tmpl.same_shape(patch))
        throw std::invalid_argument("detect: patch shape differs from model template");

    const cv::Mat1d k = detail::correlation_from_spectra(
        model.tmpl_fft, model.tmpl.squared_norm(), channel_spectra(patch),
        patch.squared_norm(), patch.rows(), patch.cols(), model.params.sigma_kernel);

    const fourier::Spectrum full = fourier::ifft2(fourier::mul(fourier::fft2(k), model.alphaf));
    if (fourier::max_abs_imag(full) >= 1e-6)
        throw std::runtime_error("detect: response has non-negligible imaginary part");

    Response r;
    r.map = fourier::real_part(full);
    cv::Point loc;
    cv::minMaxLoc(r.map, nullptr, &r.peak_value, nullptr, &loc);
    const int dx = loc.x > r.map.cols / 2 ? loc.x - r.map.cols : loc.x;
    const int dy = loc.y > r.map.rows / 2 ? loc.y - r.map.rows : loc.y;
    r.peak_offset = {double(dx * model.params.cell), double(dy * model.params.cell)};
    return r;
}

// Online appearance update: template and dual coefficients are linearly
// interpolated toward a model trained on the new patch alone.
inline KcfModel update(const KcfModel& model, const FeaturePatch& patch) {
    if (!model.tmpl.same_shape(patch))
        throw std::invalid_argument("update: patch shape differs from model template");
    const double lr = model.params.learning_rate;
    KcfModel fresh = train(patch, model.params, model.target_size, model.window_size);
    if (lr >= 1.0) return fresh;
    if (lr <= 0.0) return model;

    KcfModel out = fresh;
    for (int c = 0; c < out.tmpl.num_channels(); ++c) {
        out.tmpl.channels[c] = (1.0 - lr) * model.tmpl.channels[c] + lr * fresh.tmpl.channels[c];
        out.tmpl_fft[c] = (1.0 - lr) * model.tmpl_fft[c] + lr * fresh.tmpl_fft[c];
    }
    out.alphaf = (1.0 - lr) * model.alphaf + lr * fresh.alphaf;
    return out;
}

// Trains a model on `box` as it appears in `frame`.
inline KcfModel init_model(const cv::Mat3b& frame, const Box& box, const ColorNamesTable& table,
                           const KcfParams& params) {
    const cv::Mat3b patch = extract_patch(frame, box, params.padding);
    const FeaturePatch f = featurize(patch, table, params.cell);
    return train(f, params, cv::Size(box.w, box.h), cv::Size(patch.cols, patch.rows));
}

struct StepResult {
    Box box;            // object location in the new frame
    Response response;
    KcfModel model;     // model updated at the new location
};

// One tracking step: locate the object near prev_box in the new frame and
// update the appearance model there. Returns nothing when the search window
// (or the updated location) has left the frame entirely.
inline std::optional<StepResult> step(const KcfModel& model, const cv::Mat3b& frame,
                                      const Box& prev_box, const ColorNamesTable& table) {
    cv::Mat3b window;
    try {
        window = extract_patch(frame, prev_box, model.params.padding);
    } catch (const PatchOutOfFrame&) {
        return std::nullopt;
    }

    double sx = 1.0, sy = 1.0;
    if (window.cols != model.window_size.width || window.rows != model.window_size.height) {
        sx = double(window.cols) / model.window_size.width;
        sy = double(window.rows) / model.window_size.height;
        cv::resize(window, window, model.window_size, 0, 0, cv::INTER_LINEAR);
    }

    StepResult out;
    out.response = detect(model, featurize(window, table, model.params.cell));
    const int dx = static_cast<int>(std::lround(out.response.peak_offset.x * sx));
    const int dy = static_cast<int>(std::lround(out.response.peak_offset.y * sy));
    out.box = prev_box.translated(dx, dy);

    try {
        cv::Mat3b at_new = extract_patch(frame, out.box, model.params.padding);
        if (at_new.cols != model.window_size.width || at_new.rows != model.window_size.height)
            cv::resize(at_new, at_new, model.window_size, 0, 0, cv::INTER_LINEAR);
        out.model = update(model, featurize(at_new, table, model.params.cell));
    } catch (const PatchOutOfFrame&) {
        return std::nullopt;
    }
    return out;
}

}  // namespace mkcf::kcf
