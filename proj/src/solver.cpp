// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/solver.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/parallel.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace splatcolor {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_inputs(const GaussianScene &scene, std::span<const CameraView> views,
                  std::span<const ChannelImage> targets, const SolveConfig &config) {
    config.validate();
    if (views.empty()) {
        throw InputError("colorize: no views");
    }
    if (targets.size() != views.size()) {
        std::ostringstream msg;
        msg << "colorize: " << targets.size() << " targets for " << views.size() << " views";
        throw InputError(msg.str());
    }
    if (scene.sh_order != config.sh_order) {
        std::ostringstream msg;
        msg << "colorize: scene has SH order " << scene.sh_order << ", config asks for "
            << config.sh_order;
        throw InputError(msg.str());
    }
    for (std::size_t j = 0; j < views.size(); ++j) {
        const std::string what = "target " + std::to_string(j);
        check_image_matches(targets[j], views[j], what);
        if (targets[j].channels != scene.channels) {
            std::ostringstream msg;
            msg << what << ": " << targets[j].channels << " channels, scene has " << scene.channels;
            throw InputError(msg.str());
        }
    }
}

double mean_squared(const ChannelImage &a) {
    double s = 0.0;
    for (const double v : a.data) {
        s += v * v;
    }
    return s / static_cast<double>(a.data.size());
}

void fill_view_metrics(const GaussianScene &scene, std::span<const ChannelImage> targets,
                       Colorization &state) {
    state.report.view_metrics.clear();
    for (std::size_t j = 0; j < state.plans.size(); ++j) {
        state.report.view_metrics.push_back(compare_images(render(state.plans[j], scene), targets[j]));
    }
}

} // namespace

std::vector<double> default_lambda_schedule(int sh_order) {
    std::vector<double> out;
    double lambda = 1e-5;
    for (int l = 0; l <= sh_order; ++l) {
        out.insert(out.end(), 2 * l + 1, lambda);
        lambda *= 10.0;
    }
    return out;
}

SolveConfig SolveConfig::for_order(int sh_order, int n_refine) {
    SolveConfig c;
    c.sh_order = sh_order;
    c.lambdas = default_lambda_schedule(sh_order);
    c.n_refine = n_refine;
    return c;
}

void SolveConfig::validate() const {
    if (sh_order < 0 || sh_order > kMaxShOrder) {
        throw InputError("SolveConfig: sh_order must be in [0, 3]");
    }
    if (static_cast<int>(lambdas.size()) != sh_coeff_count(sh_order)) {
        std::ostringstream msg;
        msg << "SolveConfig: " << lambdas.size() << " lambdas for " << sh_coeff_count(sh_order)
            << " SH coefficients";
        throw InputError(msg.str());
    }
    for (int l = 0; l <= sh_order; ++l) {
        for (int m = l * l; m < (l + 1) * (l + 1); ++m) {
            if (!(lambdas[m] >= 0.0) || !std::isfinite(lambdas[m])) {
                throw InputError("SolveConfig: lambdas must be finite and non-negative");
            }
            if (lambdas[m] != lambdas[l * l]) {
                throw InputError("SolveConfig: lambdas must be constant within each SH band");
            }
        }
    }
    if (n_refine < 0) {
        throw InputError("SolveConfig: n_refine must be non-negative");
    }
    if (!(min_total_visibility >= 0.0) || !(visibility_epsilon >= 0.0)) {
        throw InputError("SolveConfig: visibility thresholds must be non-negative");
    }
    raster.validate();
}

std::optional<CholeskyFactor> CholeskyFactor::compute(const ShMatrix &a) {
    const Eigen::Index n = a.rows();
    if (n != a.cols() || n == 0) {
        return std::nullopt;
    }
    double max_diag = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        max_diag = std::max(max_diag, std::abs(a(i, i)));
    }
    const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;

    CholeskyFactor f;
    f.lower_ = ShMatrix::Zero(n, n);
    ShMatrix &l = f.lower_;
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) {
            d -= l(j, k) * l(j, k);
        }
        if (!(d > tol)) {
            return std::nullopt;
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / ljj;
        }
    }
    return f;
}

void CholeskyFactor::solve_in_place(Eigen::Ref<Eigen::MatrixXd> b) const {
    const Eigen::Index n = lower_.rows();
    if (b.rows() != n) {
        throw InputError("CholeskyFactor: right-hand side has the wrong row count");
    }
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        // L z = b
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = b(i, c);
            for (Eigen::Index k = 0; k < i; ++k) {
                s -= lower_(i, k) * b(k, c);
            }
            b(i, c) = s / lower_(i, i);
        }
        // L^T x = z
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            double s = b(i, c);
            for (Eigen::Index k = i + 1; k < n; ++k) {
                s -= lower_(k, i) * b(k, c);
            }
            b(i, c) = s / lower_(i, i);
        }
    }
}

std::vector<GaussianSystem> assemble(std::span<const ViewAccumulators> views, const SolveConfig &config) {
    config.validate();
    if (views.empty()) {
        throw InputError("assemble: no views");
    }
    const std::size_t n = views.front().size();
    const int channels = views.front().channels;
    const int m = sh_coeff_count(config.sh_order);
    for (std::size_t j = 0; j < views.size(); ++j) {
        const auto &v = views[j];
        if (v.size() != n || v.channels != channels || v.basis_size != m ||
            v.weighted_target.size() != n * channels || v.basis_rows.size() != n * m) {
            std::ostringstream msg;
            msg << "assemble: accumulators of view " << j << " are inconsistent with view 0 or SH order "
                << config.sh_order;
            throw InputError(msg.str());
        }
    }

    std::vector<GaussianSystem> systems(n);
    parallel_for(0, static_cast<std::int64_t>(n), [&](std::int64_t gi) {
        const auto i = static_cast<std::size_t>(gi);
        GaussianSystem &sys = systems[i];
        sys.gram = ShMatrix::Zero(m, m);
        sys.rhs = Eigen::MatrixXd::Zero(m, channels);
        for (const auto &view : views) {
            const double v = view.visibility[i];
            if (!(v > config.visibility_epsilon)) {
                continue;
            }
            const auto y = view.basis_row(i);
            const auto t = view.target_row(i);
            for (int a = 0; a < m; ++a) {
                for (int b = a; b < m; ++b) {
                    sys.gram(a, b) += v * (y[a] * y[b]);
                }
                for (int k = 0; k < channels; ++k) {
                    sys.rhs(a, k) += t[k] * y[a];
                }
            }
            sys.total_visibility += v;
            ++sys.visible_views;
        }
        for (int a = 0; a < m; ++a) {
            sys.gram(a, a) += sys.total_visibility * config.lambdas[a];
            for (int b = a + 1; b < m; ++b) {
                sys.gram(b, a) = sys.gram(a, b);
            }
        }
        if (sys.total_visibility > config.min_total_visibility) {
            sys.factor = CholeskyFactor::compute(sys.gram);
        }
    });
    return systems;
}

Eigen::MatrixXd solve(const GaussianSystem &system) {
    if (!system.factor) {
        throw NumericalError("solve: system has no Cholesky factor");
    }
    Eigen::MatrixXd x = system.rhs;
    system.factor->solve_in_place(x);
    return x;
}

Colorization colorize(GaussianScene &scene, std::span<const CameraView> views,
                      std::span<const ChannelImage> targets, const SolveConfig &config) {
    check_inputs(scene, views, targets, config);
    Colorization state;
    SolveReport &report = state.report;
    report.gaussians = scene.size();

    auto start = Clock::now();
    state.plans.reserve(views.size());
    for (const auto &view : views) {
        state.plans.emplace_back(scene, view, config.raster);
    }
    report.timings.project = seconds_since(start);

    start = Clock::now();
    state.accumulators.reserve(views.size());
    for (std::size_t j = 0; j < views.size(); ++j) {
        state.accumulators.push_back(accumulate_view(state.plans[j], targets[j]));
    }
    report.timings.accumulate = seconds_since(start);

    start = Clock::now();
    state.systems = assemble(state.accumulators, config);
    report.timings.assemble = seconds_since(start);

    start = Clock::now();
    const int m = scene.coeffs_per_channel();
    parallel_for(0, static_cast<std::int64_t>(scene.size()), [&](std::int64_t gi) {
        const GaussianSystem &sys = state.systems[gi];
        if (!sys.factor) {
            return;
        }
        Eigen::MatrixXd c = sys.rhs;
        sys.factor->solve_in_place(c);
        for (int k = 0; k < scene.channels; ++k) {
            auto dst = scene.coeffs(static_cast<std::size_t>(gi), k);
            for (int a = 0; a < m; ++a) {
                dst[a] = c(a, k);
            }
        }
    });
    report.timings.solve = seconds_since(start);

    for (std::size_t i = 0; i < scene.size(); ++i) {
        const GaussianSystem &sys = state.systems[i];
        if (sys.factor) {
            ++report.solved;
        } else if (sys.total_visibility > config.min_total_visibility) {
            report.failed.push_back(static_cast<int>(i));
        } else {
            report.skipped.push_back(static_cast<int>(i));
        }
    }
    if (report.solved == 0 && report.failed.empty()) {
        throw NumericalError("colorize: no Gaussian is visible in any view");
    }
    if (config.report_residuals) {
        fill_view_metrics(scene, targets, state);
    }
    return state;
}

std::vector<double> refine_step(GaussianScene &scene, std::span<const ChannelImage> targets,
                                Colorization &state, const SolveConfig &config) {
    if (state.systems.size() != scene.size() || state.plans.size() != targets.size() ||
        state.accumulators.size() != targets.size()) {
        throw InputError("refine: colorization state does not match the scene or targets");
    }
    const std::size_t views = state.plans.size();
    const int channels = scene.channels;
    const int m = scene.coeffs_per_channel();

    std::vector<double> residual_l2(views);
    std::vector<std::vector<double>> residual_sums(views);
    for (std::size_t j = 0; j < views; ++j) {
        ChannelImage residual = render(state.plans[j], scene);
        const ChannelImage &target = targets[j];
        if (!residual.same_shape(target)) {
            throw InputError("refine: target " + std::to_string(j) + " does not match its view");
        }
        for (std::size_t p = 0; p < residual.data.size(); ++p) {
            residual.data[p] = target.data[p] - residual.data[p];
        }
        residual_l2[j] = mean_squared(residual);
        residual_sums[j] = blend_sums(state.plans[j], residual).weighted;
    }

    parallel_for(0, static_cast<std::int64_t>(scene.size()), [&](std::int64_t gi) {
        const auto i = static_cast<std::size_t>(gi);
        const GaussianSystem &sys = state.systems[i];
        if (!sys.factor) {
            return;
        }
        Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, channels);
        for (std::size_t j = 0; j < views; ++j) {
            const auto &acc = state.accumulators[j];
            if (!(acc.visibility[i] > config.visibility_epsilon)) {
                continue;
            }
            const auto y = acc.basis_row(i);
            const double *t = residual_sums[j].data() + i * channels;
            for (int a = 0; a < m; ++a) {
                for (int k = 0; k < channels; ++k) {
                    r(a, k) += t[k] * y[a];
                }
            }
        }
        for (int k = 0; k < channels; ++k) {
            const auto c = scene.coeffs(i, k);
            for (int a = 0; a < m; ++a) {
                r(a, k) -= sys.total_visibility * config.lambdas[a] * c[a];
            }
        }
        sys.factor->solve_in_place(r);
        for (int k = 0; k < channels; ++k) {
            auto c = scene.coeffs(i, k);
            for (int a = 0; a < m; ++a) {
                c[a] += r(a, k);
            }
        }
    });
    return residual_l2;
}

void refine(GaussianScene &scene, std::span<const ChannelImage> targets, Colorization &state,
            const SolveConfig &config) {
    config.validate();
    if (state.systems.empty()) {
        throw InputError("refine: missing factorization; run colorize first");
    }
    const auto start = Clock::now();
    auto &trace = state.report.refine_trace;
    for (int step = 0; step < config.n_refine; ++step) {
        trace.push_back(refine_step(scene, targets, state, config));
    }
    if (config.n_refine > 0) {
        fill_view_metrics(scene, targets, state);
        std::vector<double> last;
        for (const auto &vm : state.report.view_metrics) {
            last.push_back(vm.l2);
        }
        trace.push_back(std::move(last));
    }
    state.report.timings.refine += seconds_since(start);
}

Colorization colorize_and_refine(GaussianScene &scene, std::span<const CameraView> views,
                                 std::span<const ChannelImage> targets, const SolveConfig &config) {
    Colorization state = colorize(scene, views, targets, config);
    refine(scene, targets, state, config);
    return state;
}

SegmentResult segment(const GaussianScene &scene, std::span<const CameraView> views,
                      std::span<const ChannelImage> masks, double threshold, const SolveConfig &config) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw InputError("segment: threshold must lie in [0, 1]");
    }
    for (std::size_t j = 0; j < masks.size(); ++j) {
        if (masks[j].channels != 1) {
            throw InputError("segment: mask " + std::to_string(j) + " must have one channel");
        }
    }
    SolveConfig cfg = config;
    cfg.sh_order = 0;
    cfg.lambdas.resize(1);
    cfg.n_refine = 0;
    cfg.report_residuals = false;

    GaussianScene mask_scene = with_color_layout(scene, 0, 1);
    Colorization state = colorize(mask_scene, views, masks, cfg);

    SegmentResult out;
    out.mask_values.assign(scene.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (!state.systems[i].factor) {
            continue;
        }
        // Order 0: the rendered mask value is c * Y_0 from every direction.
        out.mask_values[i] = mask_scene.sh_coeffs[i] * kShC0;
        if (out.mask_values[i] >= threshold) {
            out.retained.push_back(static_cast<int>(i));
        }
    }
    out.scene = select(scene, out.retained);
    out.report = std::move(state.report);
    return out;
}

std::string report_to_json(const SolveReport &report) {
    using nlohmann::json;
    auto number = [](double v) -> json {
        if (std::isfinite(v)) {
            return v;
        }
        return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    };
    json j;
    j["gaussians"] = report.gaussians;
    j["solved"] = report.solved;
    j["skipped"] = report.skipped;
    j["failed"] = report.failed;
    j["timings_seconds"] = {{"project", report.timings.project},
                            {"accumulate", report.timings.accumulate},
                            {"assemble", report.timings.assemble},
                            {"solve", report.timings.solve},
                            {"refine", report.timings.refine}};
    json views = json::array();
    for (std::size_t v = 0; v < report.view_metrics.size(); ++v) {
        const auto &m = report.view_metrics[v];
        views.push_back({{"view", v}, {"l1", m.l1}, {"l2", m.l2}, {"psnr", number(m.psnr)}});
    }
    j["views"] = views;
    if (!report.view_metrics.empty()) {
        const auto mean = mean_metrics(report.view_metrics);
        j["mean"] = {{"l1", mean.l1}, {"l2", mean.l2}, {"psnr", number(mean.psnr)}};
    }
    j["refine_trace"] = report.refine_trace;
    return j.dump(2);
}

} // namespace splatcolor
