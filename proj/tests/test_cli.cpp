// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/cameras.hpp"
#include "splatcolor/image_io.hpp"
#include "splatcolor/metrics.hpp"
#include "splatcolor/ply.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace splatcolor;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string &args) {
    const std::string cmd = std::string(SPLATCOLOR_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE *pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        return r;
    }
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.output.append(buf, n);
    }
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

/// Small synthetic fixture shared by the CLI tests.
class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = fs::path(SPLATCOLOR_TEST_WORKDIR) / "cli";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        const RunResult r = run("synth --splats 60 --views 12 --test-views 3 --width 32 --height 32 "
                                "--sh-order 2 --seed 5 --out " + (dir_ / "fixture").string());
        ASSERT_EQ(r.exit_code, 0) << r.output;
    }

    static fs::path fixture(const std::string &name) { return dir_ / "fixture" / name; }
    static fs::path dir_;
};

fs::path CliTest::dir_;

} // namespace

TEST_F(CliTest, SynthWritesFixture) {
    for (const char *f : {"scene.ply", "scene_uncolored.ply", "cameras.json", "test_cameras.json"}) {
        EXPECT_TRUE(fs::exists(fixture(f))) << f;
    }
    EXPECT_EQ(read_camera_manifest(fixture("cameras.json")).size(), 12u);
    EXPECT_EQ(read_camera_manifest(fixture("test_cameras.json")).size(), 3u);
}

TEST_F(CliTest, ColorizeRenderMetrics) {
    const fs::path out = dir_ / "colorized.ply";
    RunResult r = run("colorize --scene " + fixture("scene_uncolored.ply").string() + " --cameras " +
                      fixture("cameras.json").string() + " --targets " + fixture("targets").string() +
                      " --sh-order 2 --refine 5 --out " + out.string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("PSNR"), std::string::npos) << r.output;
    EXPECT_TRUE(fs::exists(out.string() + ".report.json"));
    EXPECT_EQ(read_ply(out).sh_order, 2);

    const fs::path renders = dir_ / "renders";
    r = run("--threads 2 render --scene " + out.string() + " --cameras " + fixture("test_cameras.json").string() +
            " --format fimg --out " + renders.string());
    ASSERT_EQ(r.exit_code, 0) << r.output;

    r = run("metrics --rendered " + renders.string() + " --reference " + fixture("test_targets").string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("mean"), std::string::npos) << r.output;

    const auto entries = read_camera_manifest(fixture("test_cameras.json"));
    const auto targets = load_view_images(entries, fixture("test_targets"));
    for (std::size_t j = 0; j < entries.size(); ++j) {
        const ChannelImage img = read_image(renders / (entries[j].id + ".fimg"));
        EXPECT_GT(compare_images(img, targets[j]).psnr, 25.0) << entries[j].id;
    }
}

TEST_F(CliTest, MissingTargetNamesView) {
    const fs::path targets = dir_ / "partial_targets";
    fs::remove_all(targets);
    fs::copy(fixture("targets"), targets);
    const auto entries = read_camera_manifest(fixture("cameras.json"));
    fs::remove(targets / entries[4].image);
    const RunResult r = run("colorize --scene " + fixture("scene_uncolored.ply").string() + " --cameras " +
                            fixture("cameras.json").string() + " --targets " + targets.string() +
                            " --out " + (dir_ / "never.ply").string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find(entries[4].id), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "never.ply"));
}

TEST_F(CliTest, SegmentAndBaseline) {
    const fs::path masks = dir_ / "masks";
    fs::create_directories(masks);
    const auto entries = read_camera_manifest(fixture("cameras.json"));
    for (const auto &e : entries) {
        write_image(ChannelImage(e.view.width, e.view.height, 1, 1.0), masks / e.image);
    }
    RunResult r = run("segment --scene " + fixture("scene.ply").string() + " --cameras " +
                      fixture("cameras.json").string() + " --masks " + masks.string() + " --out " +
                      (dir_ / "segmented.ply").string() + " --mask-values " + (dir_ / "values.csv").string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_GT(read_ply(dir_ / "segmented.ply").size(), 0u);
    EXPECT_TRUE(fs::exists(dir_ / "values.csv"));

    const fs::path trace = dir_ / "trace.csv";
    r = run("baseline --scene " + fixture("scene_uncolored.ply").string() + " --cameras " +
            fixture("cameras.json").string() + " --targets " + fixture("targets").string() +
            " --test-cameras " + fixture("test_cameras.json").string() + " --test-targets " +
            fixture("test_targets").string() + " --method adagrad --steps 4 --sh-order 2 --trace " + trace.string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    std::ifstream in(trace);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "step,seconds,train_L2,test_L2");
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run("--help").exit_code, 0);
    EXPECT_EQ(run("colorize --bogus").exit_code, 1);
    EXPECT_EQ(run("baseline --scene " + fixture("scene.ply").string() + " --cameras " +
                  fixture("cameras.json").string() + " --targets " + fixture("targets").string() +
                  " --method sgd --trace " + (dir_ / "t.csv").string())
                  .exit_code,
              1);
}
