// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/baseline.hpp"
#include "splatcolor/cameras.hpp"
#include "splatcolor/errors.hpp"
#include "splatcolor/image_io.hpp"
#include "splatcolor/metrics.hpp"
#include "splatcolor/parallel.hpp"
#include "splatcolor/ply.hpp"
#include "splatcolor/solver.hpp"
#include "splatcolor/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace splatcolor;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

std::string format_psnr(double psnr) {
    if (std::isinf(psnr)) {
        return "inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", psnr);
    return buf;
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw InputError("cannot open " + path.string() + " for writing");
    }
    out << text;
}

GaussianScene load_scene(const fs::path &path) {
    GaussianScene scene = read_ply(path);
    normalize_rotations(scene);
    return scene;
}

/// Lambdas given per band (L+1 values) or per coefficient ((L+1)^2 values).
std::vector<double> expand_lambdas(const std::vector<double> &given, int order) {
    if (given.empty()) {
        return default_lambda_schedule(order);
    }
    if (static_cast<int>(given.size()) == sh_coeff_count(order)) {
        return given;
    }
    if (static_cast<int>(given.size()) == order + 1) {
        std::vector<double> out;
        for (int l = 0; l <= order; ++l) {
            out.insert(out.end(), 2 * l + 1, given[l]);
        }
        return out;
    }
    throw InputError("--lambda takes " + std::to_string(order + 1) + " per-band or " +
                     std::to_string(sh_coeff_count(order)) + " per-coefficient values");
}

struct ColorizeArgs {
    std::string scene, cameras, targets, out, report;
    int sh_order = 3;
    int refine = 5;
    std::vector<double> lambdas;
    double min_visibility = 1e-6;
};

int run_colorize(const ColorizeArgs &a) {
    GaussianScene scene = load_scene(a.scene);
    const auto entries = read_camera_manifest(a.cameras);
    const auto targets = load_view_images(entries, a.targets);
    const auto views = views_of(entries);
    if (targets.empty()) {
        throw InputError("camera manifest lists no views");
    }
    const int channels = targets.front().channels;
    for (std::size_t j = 0; j < targets.size(); ++j) {
        if (targets[j].channels != channels) {
            throw InputError("view '" + entries[j].id + "': channel count differs from the first view");
        }
    }
    if (scene.sh_order != a.sh_order || scene.channels != channels) {
        scene = with_color_layout(scene, a.sh_order, channels);
    }

    SolveConfig config = SolveConfig::for_order(a.sh_order, a.refine);
    config.lambdas = expand_lambdas(a.lambdas, a.sh_order);
    config.min_total_visibility = a.min_visibility;
    Colorization state = colorize_and_refine(scene, views, targets, config);

    write_ply(scene, a.out);
    const fs::path report_path = a.report.empty() ? fs::path(a.out + ".report.json") : fs::path(a.report);
    write_text(report_path, report_to_json(state.report) + "\n");

    const auto &r = state.report;
    const auto mean = mean_metrics(r.view_metrics);
    std::cout << "colorized " << r.solved << "/" << r.gaussians << " Gaussians (" << r.skipped.size()
              << " skipped, " << r.failed.size() << " failed) over " << views.size() << " views\n";
    std::cout << "time: project " << r.timings.project << " s, accumulate " << r.timings.accumulate
              << " s, assemble " << r.timings.assemble << " s, solve " << r.timings.solve
              << " s, refine " << r.timings.refine << " s\n";
    std::cout << "mean L1 " << mean.l1 << "  L2 " << mean.l2 << "  PSNR " << format_psnr(mean.psnr) << "\n";
    return r.failed.empty() ? 0 : kExitNumerical;
}

int run_render(const std::string &scene_path, const std::string &cameras, const std::string &out_dir,
               bool clamp, const std::string &format) {
    if (format != "png" && format != "fimg") {
        throw InputError("--format must be png or fimg");
    }
    const GaussianScene scene = load_scene(scene_path);
    const auto entries = read_camera_manifest(cameras);
    fs::create_directories(out_dir);
    for (const auto &e : entries) {
        const ChannelImage image = render(scene, e.view, RasterConfig{});
        const fs::path path = fs::path(out_dir) / (e.id + "." + format);
        write_image(image, path, clamp);
    }
    std::cout << "rendered " << entries.size() << " views to " << out_dir << "\n";
    return 0;
}

int run_segment(const std::string &scene_path, const std::string &cameras, const std::string &masks_dir,
                double threshold, const std::string &out, const std::string &values_path) {
    const GaussianScene scene = load_scene(scene_path);
    const auto entries = read_camera_manifest(cameras);
    const auto masks = load_view_images(entries, masks_dir);
    for (std::size_t j = 0; j < masks.size(); ++j) {
        if (masks[j].channels != 1) {
            throw InputError("view '" + entries[j].id + "': masks must be single-channel");
        }
    }
    const auto views = views_of(entries);
    const SegmentResult result = segment(scene, views, masks, threshold);
    write_ply(result.scene, out);
    if (!values_path.empty()) {
        std::string csv = "gaussian,mask_value,retained\n";
        std::vector<bool> kept(scene.size(), false);
        for (const int i : result.retained) {
            kept[i] = true;
        }
        for (std::size_t i = 0; i < scene.size(); ++i) {
            csv += std::to_string(i) + "," +
                   (std::isnan(result.mask_values[i]) ? std::string("") : std::to_string(result.mask_values[i])) +
                   "," + (kept[i] ? "1" : "0") + "\n";
        }
        write_text(values_path, csv);
    }
    std::cout << "retained " << result.retained.size() << "/" << scene.size() << " Gaussians at threshold "
              << threshold << "\n";
    return 0;
}

struct BaselineArgs {
    std::string scene, cameras, targets, test_cameras, test_targets, trace, out;
    std::string method = "adam";
    std::optional<double> lr;
    int steps = 100;
    int sh_order = 3;
    int eval_interval = 1;
};

int run_baseline(const BaselineArgs &a) {
    GaussianScene scene = load_scene(a.scene);
    const auto entries = read_camera_manifest(a.cameras);
    const auto targets = load_view_images(entries, a.targets);
    if (targets.empty()) {
        throw InputError("camera manifest lists no views");
    }
    if (scene.sh_order != a.sh_order || scene.channels != targets.front().channels) {
        scene = with_color_layout(scene, a.sh_order, targets.front().channels);
    }
    std::vector<CameraEntry> test_entries;
    std::vector<ChannelImage> test_images;
    if (!a.test_cameras.empty()) {
        test_entries = read_camera_manifest(a.test_cameras);
        test_images = load_view_images(test_entries, a.test_targets.empty() ? a.targets : a.test_targets);
    }
    OptimizerConfig opt = OptimizerConfig::defaults(parse_optimizer_method(a.method));
    if (a.lr) {
        opt.learning_rate = *a.lr;
    }
    opt.max_steps = a.steps;
    opt.eval_interval = a.eval_interval;
    const auto views = views_of(entries);
    const auto test_views = views_of(test_entries);
    const auto trace = optimize(scene, views, targets, opt, RasterConfig{}, test_views, test_images);
    write_text(a.trace, trace_to_csv(trace));
    if (!a.out.empty()) {
        write_ply(scene, a.out);
    }
    const auto &last = trace.back();
    std::cout << to_string(opt.method) << ": " << last.step << " steps in " << last.seconds
              << " s, train L2 " << last.train_l2;
    if (last.test_l2) {
        std::cout << ", test L2 " << *last.test_l2;
    }
    std::cout << "\n";
    return 0;
}

int run_metrics(const std::string &rendered, const std::string &reference) {
    std::vector<fs::path> names;
    for (const auto &entry : fs::directory_iterator(reference)) {
        const auto ext = entry.path().extension().string();
        if (entry.is_regular_file() && (ext == ".png" || ext == ".fimg")) {
            names.push_back(entry.path().filename());
        }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) {
        throw InputError("no .png or .fimg images in " + reference);
    }
    std::vector<ImageMetrics> all;
    std::cout << "image L1 L2 PSNR\n";
    for (const auto &name : names) {
        const fs::path candidate = fs::path(rendered) / name;
        if (!fs::exists(candidate)) {
            throw InputError("rendered image " + candidate.string() + " is missing");
        }
        const auto m = compare_images(read_image(candidate), read_image(fs::path(reference) / name));
        all.push_back(m);
        std::cout << name.string() << " " << m.l1 << " " << m.l2 << " " << format_psnr(m.psnr) << "\n";
    }
    const auto mean = mean_metrics(all);
    std::cout << "mean " << mean.l1 << " " << mean.l2 << " " << format_psnr(mean.psnr) << "\n";
    return 0;
}

struct SynthArgs {
    SynthConfig config;
    std::string out;
};

int run_synth(const SynthArgs &a) {
    const SynthFixture f = make_synthetic_fixture(a.config);
    const fs::path dir(a.out);
    fs::create_directories(dir / "targets");
    fs::create_directories(dir / "test_targets");
    write_ply(f.scene, dir / "scene.ply");
    write_ply(with_color_layout(f.scene, f.scene.sh_order, f.scene.channels), dir / "scene_uncolored.ply");
    write_camera_manifest(f.train, dir / "cameras.json");
    write_camera_manifest(f.test, dir / "test_cameras.json");
    for (std::size_t j = 0; j < f.train.size(); ++j) {
        write_image(f.train_targets[j], dir / "targets" / f.train[j].image);
    }
    for (std::size_t j = 0; j < f.test.size(); ++j) {
        write_image(f.test_targets[j], dir / "test_targets" / f.test[j].image);
    }
    std::cout << "wrote " << f.scene.size() << " splats, " << f.train.size() << " training and "
              << f.test.size() << " held-out views to " << a.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Instant least-squares colorization of Gaussian splat scenes"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    ColorizeArgs colorize_args;
    auto *colorize_cmd = app.add_subcommand("colorize", "Solve SH coefficients from posed target images");
    colorize_cmd->add_option("--scene", colorize_args.scene, "Input splat PLY")->required()->check(CLI::ExistingFile);
    colorize_cmd->add_option("--cameras", colorize_args.cameras, "Camera manifest (JSON)")->required()->check(CLI::ExistingFile);
    colorize_cmd->add_option("--targets", colorize_args.targets, "Directory of target images")->required()->check(CLI::ExistingDirectory);
    colorize_cmd->add_option("--sh-order", colorize_args.sh_order, "SH order L")->check(CLI::Range(0, 3))->capture_default_str();
    colorize_cmd->add_option("--refine", colorize_args.refine, "Refinement steps")->check(CLI::NonNegativeNumber)->capture_default_str();
    colorize_cmd->add_option("--lambda", colorize_args.lambdas, "Regularization per band or per coefficient")->delimiter(',');
    colorize_cmd->add_option("--min-visibility", colorize_args.min_visibility, "Total visibility below which Gaussians are skipped")->capture_default_str();
    colorize_cmd->add_option("--out", colorize_args.out, "Output PLY")->required();
    colorize_cmd->add_option("--report", colorize_args.report, "Report JSON (default: <out>.report.json)");

    std::string render_scene, render_cameras, render_out, render_format = "fimg";
    bool render_clamp = false;
    auto *render_cmd = app.add_subcommand("render", "Render every view of a manifest");
    render_cmd->add_option("--scene", render_scene)->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--cameras", render_cameras)->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--out", render_out, "Output directory")->required();
    render_cmd->add_option("--format", render_format, "png or fimg")->capture_default_str();
    render_cmd->add_flag("--clamp", render_clamp, "Clip values to [0, 1] for display");

    std::string seg_scene, seg_cameras, seg_masks, seg_out, seg_values;
    double seg_threshold = kDefaultSegmentThreshold;
    auto *segment_cmd = app.add_subcommand("segment", "Lift 2D masks and keep the masked Gaussians");
    segment_cmd->add_option("--scene", seg_scene)->required()->check(CLI::ExistingFile);
    segment_cmd->add_option("--cameras", seg_cameras)->required()->check(CLI::ExistingFile);
    segment_cmd->add_option("--masks", seg_masks, "Directory of single-channel masks")->required()->check(CLI::ExistingDirectory);
    segment_cmd->add_option("--threshold", seg_threshold)->capture_default_str();
    segment_cmd->add_option("--out", seg_out, "Filtered PLY")->required();
    segment_cmd->add_option("--mask-values", seg_values, "Optional CSV of per-Gaussian mask values");

    BaselineArgs base_args;
    auto *baseline_cmd = app.add_subcommand("baseline", "Gradient-descent colorization for comparison");
    baseline_cmd->add_option("--scene", base_args.scene)->required()->check(CLI::ExistingFile);
    baseline_cmd->add_option("--cameras", base_args.cameras)->required()->check(CLI::ExistingFile);
    baseline_cmd->add_option("--targets", base_args.targets)->required()->check(CLI::ExistingDirectory);
    baseline_cmd->add_option("--test-cameras", base_args.test_cameras)->check(CLI::ExistingFile);
    baseline_cmd->add_option("--test-targets", base_args.test_targets)->check(CLI::ExistingDirectory);
    baseline_cmd->add_option("--method", base_args.method, "adam, adamw, rmsprop or adagrad")->capture_default_str();
    baseline_cmd->add_option("--lr", base_args.lr, "Learning rate (default per method)");
    baseline_cmd->add_option("--steps", base_args.steps)->check(CLI::NonNegativeNumber)->capture_default_str();
    baseline_cmd->add_option("--sh-order", base_args.sh_order)->check(CLI::Range(0, 3))->capture_default_str();
    baseline_cmd->add_option("--eval-interval", base_args.eval_interval)->check(CLI::NonNegativeNumber)->capture_default_str();
    baseline_cmd->add_option("--trace", base_args.trace, "Loss trace CSV")->required();
    baseline_cmd->add_option("--out", base_args.out, "Optional output PLY");

    std::string metrics_rendered, metrics_reference;
    auto *metrics_cmd = app.add_subcommand("metrics", "L1, L2 and PSNR between two image directories");
    metrics_cmd->add_option("--rendered", metrics_rendered)->required()->check(CLI::ExistingDirectory);
    metrics_cmd->add_option("--reference", metrics_reference)->required()->check(CLI::ExistingDirectory);

    SynthArgs synth_args;
    auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic round-trip fixture");
    synth_cmd->add_option("--splats", synth_args.config.splats)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--views", synth_args.config.train_views)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--test-views", synth_args.config.test_views)->check(CLI::NonNegativeNumber)->capture_default_str();
    synth_cmd->add_option("--width", synth_args.config.width)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--height", synth_args.config.height)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--sh-order", synth_args.config.sh_order)->check(CLI::Range(0, 3))->capture_default_str();
    synth_cmd->add_option("--channels", synth_args.config.channels)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.config.seed)->capture_default_str();
    synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }
    set_thread_count(threads);

    try {
        if (*colorize_cmd) {
            return run_colorize(colorize_args);
        }
        if (*render_cmd) {
            return run_render(render_scene, render_cameras, render_out, render_clamp, render_format);
        }
        if (*segment_cmd) {
            return run_segment(seg_scene, seg_cameras, seg_masks, seg_threshold, seg_out, seg_values);
        }
        if (*baseline_cmd) {
            return run_baseline(base_args);
        }
        if (*metrics_cmd) {
            return run_metrics(metrics_rendered, metrics_reference);
        }
        if (*synth_cmd) {
            return run_synth(synth_args);
        }
    } catch (const NumericalError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
