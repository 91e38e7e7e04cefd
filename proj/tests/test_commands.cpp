#include <cstdlib>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "mkcf/commands.hpp"
#include "mkcf/config.hpp"
#include "support/test_util.hpp"

namespace app = mkcf::app;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MKCF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}
}  // namespace

TEST_CASE("synth then track: single scenario yields one id over all frames") {
    testutil::TempDir tmp("cmd_single");
    std::ostringstream log;
    REQUIRE(app::run_synth("single", 0, tmp.str("data"), 0.0, log) == app::kExitOk);

    mkcf::RunConfig cfg;
    cfg.frames = tmp.str("data/frames/%06d.ppm");
    cfg.masks = tmp.str("data/masks/%06d.pgm");
    cfg.output = tmp.str("tracks.csv");
    cfg.colornames = "";  // one-hot fallback
    cfg.gt = tmp.str("data/gt.csv");
    cfg.render_dir = tmp.str("overlay");
    cfg.params.blob.T_r = 100;
    REQUIRE(app::run_track(cfg, log) == app::kExitOk);

    const auto hyp = mkcf::load_trajectory_csv(tmp.str("tracks.csv"));
    REQUIRE_FALSE(hyp.records.empty());
    for (const auto& r : hyp.records) CHECK(r.id == 1);
    // covers every frame (possibly minus the invisible tail after the end)
    CHECK(hyp.records.size() >= 55);
    CHECK(log.str().find("MOTA") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.str("overlay/000010.png")));
}

TEST_CASE("track output is byte-identical across runs") {
    testutil::TempDir tmp("cmd_det");
    std::ostringstream log;
    REQUIRE(app::run_synth("crossing", 0, tmp.str("data"), 0.0, log) == app::kExitOk);

    mkcf::RunConfig cfg;
    cfg.frames = tmp.str("data/frames/%06d.ppm");
    cfg.masks = tmp.str("data/masks/%06d.pgm");
    cfg.colornames = "";
    cfg.params.blob.T_r = 100;
    cfg.output = tmp.str("a.csv");
    REQUIRE(app::run_track(cfg, log) == app::kExitOk);
    cfg.output = tmp.str("b.csv");
    REQUIRE(app::run_track(cfg, log) == app::kExitOk);
    CHECK(slurp(tmp.str("a.csv")) == slurp(tmp.str("b.csv")));
}

TEST_CASE("an empty mask sequence succeeds with an empty trajectory body") {
    testutil::TempDir tmp("cmd_empty");
    std::filesystem::create_directories(tmp.str("frames"));
    std::filesystem::create_directories(tmp.str("masks"));
    char name[32];
    for (int t = 0; t < 5; ++t) {
        std::snprintf(name, sizeof(name), "frames/%06d.ppm", t);
        cv::imwrite(tmp.str(name), cv::Mat3b(60, 80, cv::Vec3b(30, 30, 30)));
        std::snprintf(name, sizeof(name), "masks/%06d.pgm", t);
        cv::imwrite(tmp.str(name), cv::Mat1b::zeros(60, 80));
    }
    mkcf::RunConfig cfg;
    cfg.frames = tmp.str("frames/%06d.ppm");
    cfg.masks = tmp.str("masks/%06d.pgm");
    cfg.output = tmp.str("tracks.csv");
    cfg.colornames = "";
    std::ostringstream log;
    CHECK(app::run_track(cfg, log) == app::kExitOk);
    CHECK(slurp(tmp.str("tracks.csv")) == "frame,id,x,y,w,h,state\n");
}

TEST_CASE("a missing mask is a data error naming the frame") {
    testutil::TempDir tmp("cmd_missing_mask");
    std::ostringstream log;
    REQUIRE(app::run_synth("single", 0, tmp.str("data"), 0.0, log) == app::kExitOk);
    std::filesystem::remove(tmp.str("data/masks/000003.pgm"));

    mkcf::RunConfig cfg;
    cfg.frames = tmp.str("data/frames/%06d.ppm");
    cfg.masks = tmp.str("data/masks/%06d.pgm");
    cfg.output = tmp.str("tracks.csv");
    cfg.colornames = "";
    CHECK(app::run_track(cfg, log) == app::kExitData);
}

TEST_CASE("zero matched frames is a data error") {
    mkcf::RunConfig cfg;
    cfg.frames = "/nonexistent/%06d.ppm";
    cfg.colornames = "";
    std::ostringstream log;
    CHECK(app::run_track(cfg, log) == app::kExitData);
}

TEST_CASE("eval: identical files score perfectly and emit JSON") {
    testutil::TempDir tmp("cmd_eval");
    std::vector<mkcf::TrajectoryRecord> rows;
    for (int f = 0; f < 10; ++f) rows.push_back({f, 1, mkcf::Box(4 * f, 0, 10, 10), "car", ""});
    mkcf::save_trajectory_csv(tmp.str("gt.csv"), rows, true);
    std::ostringstream log;
    REQUIRE(app::run_eval(tmp.str("gt.csv"), tmp.str("gt.csv"), 50.0, tmp.str("report.json"),
                          log) == app::kExitOk);
    const std::string json = slurp(tmp.str("report.json"));
    CHECK(json.find("\"mota\": 1.0") != std::string::npos);
    CHECK(json.find("\"car\"") != std::string::npos);
    CHECK(log.str().find("all") != std::string::npos);
}

TEST_CASE("eval: malformed row is a data error") {
    testutil::TempDir tmp("cmd_eval_bad");
    {
        std::ofstream f(tmp.str("bad.csv"));
        f << "frame,id,x,y,w,h\nnot,a,number,0,0,0\n";
    }
    std::ostringstream log;
    CHECK(app::run_eval(tmp.str("bad.csv"), tmp.str("bad.csv"), 50.0, "", log) == app::kExitData);
}

TEST_CASE("render: empty CSV copies frames unmodified; boxes are drawn when present") {
    testutil::TempDir tmp("cmd_render");
    std::ostringstream log;
    REQUIRE(app::run_synth("single", 0, tmp.str("data"), 0.0, log) == app::kExitOk);
    {
        std::ofstream f(tmp.str("empty.csv"));
        f << "frame,id,x,y,w,h,state\n";
    }
    REQUIRE(app::run_render(tmp.str("data/frames/%06d.ppm"), tmp.str("empty.csv"),
                            tmp.str("out_plain"), log) == app::kExitOk);
    const cv::Mat3b original = cv::imread(tmp.str("data/frames/000000.ppm"));
    const cv::Mat3b plain = cv::imread(tmp.str("out_plain/000000.png"));
    REQUIRE(!plain.empty());
    CHECK(cv::norm(original, plain, cv::NORM_INF) == 0.0);

    {
        std::ofstream f(tmp.str("one.csv"));
        f << "frame,id,x,y,w,h,state\n0,1,20,105,40,30,tracked\n";
    }
    REQUIRE(app::run_render(tmp.str("data/frames/%06d.ppm"), tmp.str("one.csv"),
                            tmp.str("out_boxed"), log) == app::kExitOk);
    const cv::Mat3b boxed = cv::imread(tmp.str("out_boxed/000000.png"));
    CHECK(cv::norm(original, boxed, cv::NORM_INF) > 0.0);
}

TEST_CASE("render: missing frames are a data error") {
    testutil::TempDir tmp("cmd_render_missing");
    {
        std::ofstream f(tmp.str("t.csv"));
        f << "frame,id,x,y,w,h\n";
    }
    std::ostringstream log;
    CHECK(app::run_render("/nonexistent/%06d.ppm", tmp.str("t.csv"), tmp.str("out"), log) ==
          app::kExitData);
}

TEST_CASE("config precedence: defaults < preset < file < explicit value") {
    testutil::TempDir tmp("cmd_config");
    mkcf::RunConfig cfg;
    CHECK(cfg.params.blob.T_r == 25);  // default

    REQUIRE(mkcf::apply_preset(cfg, "sherbrooke"));
    CHECK(cfg.params.blob.T_r == 23);
    CHECK(cfg.params.blob.T_c == 44.0);

    {
        std::ofstream f(tmp.str("run.cfg"));
        f << "# comment\nT_r = 31\nlearning_rate=0.05\n";
    }
    mkcf::load_config_file(cfg, tmp.str("run.cfg"));
    CHECK(cfg.params.blob.T_r == 31);
    CHECK(cfg.params.blob.T_c == 44.0);  // preset value survives
    CHECK(cfg.params.kcf.learning_rate == 0.05);

    CHECK(mkcf::set_config_value(cfg, "T_r", "99"));
    CHECK(cfg.params.blob.T_r == 99);
    CHECK_FALSE(mkcf::set_config_value(cfg, "bogus_key", "1"));
    CHECK_FALSE(mkcf::apply_preset(cfg, "atlantis"));
}

TEST_CASE("config validation rejects out-of-range parameters") {
    mkcf::RunConfig cfg;
    cfg.params.T_ol = 2.0;  // must stay below T_oh
    CHECK_THROWS_AS(mkcf::validate(cfg), std::invalid_argument);
    cfg = {};
    cfg.params.kcf.learning_rate = 1.5;
    CHECK_THROWS_AS(mkcf::validate(cfg), std::invalid_argument);
}

TEST_CASE("CLI process exit codes") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 1);                      // missing subcommand
    CHECK(run_cli("track --no-such-flag") == 1);  // unknown flag
    testutil::TempDir tmp("cmd_cli");
    CHECK(run_cli("synth nonsense " + tmp.str("out")) == 1);  // unknown scenario, catalog printed
    CHECK(run_cli("synth single " + tmp.str("out")) == 0);
    CHECK(run_cli("eval /nonexistent.csv /nonexistent.csv") == 2);
}
