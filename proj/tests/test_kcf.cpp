#include <catch2/catch_amalgamated.hpp>

#include "mkcf/kcf.hpp"
#include "mkcf/synth.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

namespace kcf = mkcf::kcf;
using mkcf::Box;
using mkcf::FeaturePatch;

namespace {
const mkcf::ColorNamesTable& table() {
    static const mkcf::ColorNamesTable t = mkcf::ColorNamesTable::one_hot_fallback();
    return t;
}

FeaturePatch shifted(const FeaturePatch& p, int dy, int dx) {
    FeaturePatch out;
    for (const auto& ch : p.channels) {
        cv::Mat1d m(ch.rows, ch.cols);
        for (int i = 0; i < ch.rows; ++i)
            for (int j = 0; j < ch.cols; ++j)
                // content moves by (+dy, +dx)
                m(i, j) = ch((i - dy + ch.rows) % ch.rows, (j - dx + ch.cols) % ch.cols);
        out.channels.push_back(m);
    }
    return out;
}
}  // namespace

TEST_CASE("gaussian_correlation matches the spatial cyclic-shift oracle") {
    auto g = testutil::rng(23);
    const struct {
        int w, h, c;
    } shapes[] = {{4, 4, 1}, {5, 6, 3}, {8, 8, 2}, {7, 3, 11}};
    for (const auto& s : shapes) {
        const FeaturePatch x = testutil::random_patch(g, s.w, s.h, s.c);
        const FeaturePatch z = testutil::random_patch(g, s.w, s.h, s.c);
        const cv::Mat1d fast = kcf::gaussian_correlation(x, z, 0.5);
        const cv::Mat1d slow = oracle::spatial_correlation(x, z, 0.5);
        REQUIRE(cv::norm(fast - slow, cv::NORM_INF) < 1e-10);
        for (int i = 0; i < fast.rows; ++i)
            for (int j = 0; j < fast.cols; ++j) {
                CHECK(fast(i, j) > 0.0);
                CHECK(fast(i, j) <= 1.0 + 1e-12);
            }
    }
}

TEST_CASE("gaussian_correlation of a patch with itself is 1 at zero shift") {
    auto g = testutil::rng(29);
    const FeaturePatch x = testutil::random_patch(g, 6, 5, 2);
    const cv::Mat1d k = kcf::gaussian_correlation(x, x, 0.4);
    CHECK_THAT(k(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("gaussian_correlation shift equivariance") {
    auto g = testutil::rng(31);
    const FeaturePatch x = testutil::random_patch(g, 8, 6, 2);
    const FeaturePatch z = shifted(x, 0, 1);
    const cv::Mat1d kxx = kcf::gaussian_correlation(x, x, 0.5);
    const cv::Mat1d kxz = kcf::gaussian_correlation(x, z, 0.5);
    for (int i = 0; i < kxx.rows; ++i)
        for (int j = 0; j < kxx.cols; ++j)
            CHECK_THAT(kxz(i, j),
                       Catch::Matchers::WithinAbs(kxx(i, (j - 1 + kxx.cols) % kxx.cols), 1e-10));
}

TEST_CASE("gaussian_correlation rejects shape mismatches") {
    auto g = testutil::rng(37);
    const FeaturePatch a = testutil::random_patch(g, 4, 4, 1);
    const FeaturePatch b = testutil::random_patch(g, 5, 4, 1);
    CHECK_THROWS_AS(kcf::gaussian_correlation(a, b, 0.5), std::invalid_argument);
}

TEST_CASE("training with lambda=0 interpolates the training sample") {
    auto g = testutil::rng(41);
    kcf::KcfParams p;
    p.lambda = 0.0;
    const FeaturePatch x = testutil::random_patch(g, 8, 8, 3);
    const kcf::KcfModel m = kcf::train(x, p, {4, 4}, {8, 8});
    const kcf::Response r = kcf::detect(m, x);
    CHECK(r.peak_offset.x == 0.0);
    CHECK(r.peak_offset.y == 0.0);
    CHECK_THAT(r.peak_value, Catch::Matchers::WithinAbs(1.0, 1e-8));  // max of the target
}

TEST_CASE("train+detect matches dense circulant kernel ridge regression") {
    auto g = testutil::rng(43);
    kcf::KcfParams p;
    p.lambda = 1e-4;
    const FeaturePatch x = testutil::random_patch(g, 8, 8, 1);

    const kcf::KcfModel m = kcf::train(x, p, {4, 4}, {8, 8});
    const double sigma_cells = p.output_sigma_factor * std::sqrt(16.0) / p.cell;
    const cv::Mat1d y = kcf::regression_target(8, 8, sigma_cells);

    // on the training patch itself
    const cv::Mat1d dense_xx = oracle::dense_ridge_response(x, x, y, p.sigma_kernel, p.lambda);
    REQUIRE(cv::norm(kcf::detect(m, x).map - dense_xx, cv::NORM_INF) < 1e-6);

    // on an unrelated probe (exposes any shift-convention error)
    const FeaturePatch z = testutil::random_patch(g, 8, 8, 1);
    const cv::Mat1d dense_xz = oracle::dense_ridge_response(x, z, y, p.sigma_kernel, p.lambda);
    REQUIRE(cv::norm(kcf::detect(m, z).map - dense_xz, cv::NORM_INF) < 1e-6);
}

TEST_CASE("training is deterministic") {
    auto g = testutil::rng(47);
    const FeaturePatch x = testutil::random_patch(g, 6, 6, 2);
    kcf::KcfParams p;
    const kcf::KcfModel a = kcf::train(x, p, {3, 3}, {6, 6});
    const kcf::KcfModel b = kcf::train(x, p, {3, 3}, {6, 6});
    CHECK(cv::norm(a.alphaf, b.alphaf, cv::NORM_INF) == 0.0);
}

TEST_CASE("detect finds the peak at the template's translation") {
    auto g = testutil::rng(53);
    kcf::KcfParams p;
    const FeaturePatch x = testutil::random_patch(g, 12, 10, 2);
    const kcf::KcfModel m = kcf::train(x, p, {6, 5}, {12, 10});

    const kcf::Response at_zero = kcf::detect(m, x);
    CHECK(at_zero.peak_offset.x == 0.0);
    CHECK(at_zero.peak_offset.y == 0.0);

    const kcf::Response moved = kcf::detect(m, shifted(x, 0, 3));
    CHECK(moved.peak_offset.x == 3.0);
    CHECK(moved.peak_offset.y == 0.0);

    const kcf::Response back = kcf::detect(m, shifted(x, -2, 0));
    CHECK(back.peak_offset.y == -2.0);
}

TEST_CASE("detect response peaks at zero shift for any lambda >= 0") {
    auto g = testutil::rng(59);
    for (double lambda : {0.0, 1e-6, 1e-4, 1e-2, 1.0}) {
        kcf::KcfParams p;
        p.lambda = lambda;
        const FeaturePatch x = testutil::random_patch(g, 7, 9, 2);
        const kcf::KcfModel m = kcf::train(x, p, {4, 4}, {7, 9});
        const kcf::Response r = kcf::detect(m, x);
        CHECK(r.peak_offset.x == 0.0);
        CHECK(r.peak_offset.y == 0.0);
    }
}

TEST_CASE("noise patches respond well below the training peak") {
    auto g = testutil::rng(61);
    kcf::KcfParams p;
    const FeaturePatch x = testutil::random_patch(g, 10, 10, 3);
    const kcf::KcfModel m = kcf::train(x, p, {5, 5}, {10, 10});
    const double trained = kcf::detect(m, x).peak_value;
    const FeaturePatch noise = testutil::random_patch(g, 10, 10, 3);
    CHECK(kcf::detect(m, noise).peak_value < 0.5 * trained);
}

TEST_CASE("update with rate 0 and 1 are identity and replacement") {
    auto g = testutil::rng(67);
    const FeaturePatch a = testutil::random_patch(g, 6, 6, 2);
    const FeaturePatch b = testutil::random_patch(g, 6, 6, 2);

    kcf::KcfParams p;
    p.learning_rate = 0.0;
    kcf::KcfModel m0 = kcf::train(a, p, {3, 3}, {6, 6});
    const kcf::KcfModel same = kcf::update(m0, b);
    CHECK(cv::norm(same.alphaf, m0.alphaf, cv::NORM_INF) == 0.0);

    p.learning_rate = 1.0;
    kcf::KcfModel m1 = kcf::train(a, p, {3, 3}, {6, 6});
    const kcf::KcfModel swapped = kcf::update(m1, b);
    const kcf::KcfModel fresh = kcf::train(b, p, {3, 3}, {6, 6});
    CHECK(cv::norm(swapped.alphaf, fresh.alphaf, cv::NORM_INF) == 0.0);
}

TEST_CASE("repeated updates converge monotonically toward the new appearance") {
    auto g = testutil::rng(71);
    const FeaturePatch a = testutil::random_patch(g, 6, 6, 2);
    const FeaturePatch b = testutil::random_patch(g, 6, 6, 2);
    kcf::KcfParams p;
    p.learning_rate = 0.02;
    kcf::KcfModel m = kcf::train(a, p, {3, 3}, {6, 6});

    auto dist_to_b = [&](const kcf::KcfModel& model) {
        double s = 0.0;
        for (int c = 0; c < model.tmpl.num_channels(); ++c)
            s += cv::norm(model.tmpl.channels[c] - b.channels[c], cv::NORM_L2SQR);
        return s;
    };
    double prev = dist_to_b(m);
    for (int i = 0; i < 50; ++i) {
        m = kcf::update(m, b);
        const double cur = dist_to_b(m);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("update rejects shape mismatches") {
    auto g = testutil::rng(73);
    const FeaturePatch a = testutil::random_patch(g, 6, 6, 2);
    const FeaturePatch b = testutil::random_patch(g, 8, 6, 2);
    kcf::KcfParams p;
    kcf::KcfModel m = kcf::train(a, p, {3, 3}, {6, 6});
    CHECK_THROWS_AS(kcf::update(m, b), std::invalid_argument);
    CHECK_THROWS_AS(kcf::detect(m, b), std::invalid_argument);
}

// --- step() on rendered frames ---------------------------------------------

TEST_CASE("step holds a stationary target within one pixel") {
    mkcf::synth::Scenario s;
    s.name = "static";
    s.frames = 11;
    s.actors = {mkcf::synth::make_actor(1, "car", mkcf::synth::rgb(200, 60, 50), 40, 30,
                                        {{0, 160, 120}})};

    kcf::KcfParams p;
    const Box start(140, 105, 40, 30);
    auto frame0 = mkcf::synth::render_frame(s, 0);
    kcf::KcfModel m = kcf::init_model(frame0.image, start, table(), p);
    Box box = start;
    for (int t = 1; t <= 10; ++t) {
        auto r = kcf::step(m, mkcf::synth::render_frame(s, t).image, box, table());
        REQUIRE(r.has_value());
        CHECK(std::abs(r->box.x - start.x) <= 1);
        CHECK(std::abs(r->box.y - start.y) <= 1);
        box = r->box;
        m = std::move(r->model);
    }
}

TEST_CASE("step follows constant motion of 2 px/frame") {
    mkcf::synth::Scenario s;
    s.name = "move";
    s.frames = 30;
    s.actors = {mkcf::synth::make_actor(1, "car", mkcf::synth::rgb(60, 200, 80), 40, 30,
                                        {{0, 60, 120}, {29, 118, 120}})};

    kcf::KcfParams p;
    auto frame0 = mkcf::synth::render_frame(s, 0);
    Box box(40, 105, 40, 30);
    kcf::KcfModel m = kcf::init_model(frame0.image, box, table(), p);
    for (int t = 1; t < 30; ++t) {
        auto r = kcf::step(m, mkcf::synth::render_frame(s, t).image, box, table());
        REQUIRE(r.has_value());
        const int dx = r->box.x - box.x;
        const int dy = r->box.y - box.y;
        CHECK(std::abs(dx - 2) <= 1);
        CHECK(std::abs(dy) <= 1);
        box = r->box;
        m = std::move(r->model);
    }
}

TEST_CASE("step on the initialization frame returns the initial box") {
    mkcf::synth::Scenario s;
    s.name = "same";
    s.frames = 2;
    s.actors = {mkcf::synth::make_actor(1, "car", mkcf::synth::rgb(230, 200, 60), 36, 26,
                                        {{0, 100, 100}})};
    auto f0 = mkcf::synth::render_frame(s, 0);
    const Box box(82, 87, 36, 26);
    kcf::KcfParams p;
    kcf::KcfModel m = kcf::init_model(f0.image, box, table(), p);
    auto r = kcf::step(m, f0.image, box, table());
    REQUIRE(r.has_value());
    CHECK(r->box == box);
}

TEST_CASE("step fails once the window leaves the frame") {
    mkcf::synth::Scenario s;
    s.name = "gone";
    s.frames = 2;
    s.actors = {mkcf::synth::make_actor(1, "car", mkcf::synth::rgb(230, 200, 60), 30, 30,
                                        {{0, 50, 50}})};
    auto f0 = mkcf::synth::render_frame(s, 0);
    kcf::KcfParams p;
    kcf::KcfModel m = kcf::init_model(f0.image, Box(35, 35, 30, 30), table(), p);
    CHECK_FALSE(kcf::step(m, f0.image, Box(5000, 5000, 30, 30), table()).has_value());
}
