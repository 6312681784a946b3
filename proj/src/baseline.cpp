// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/baseline.hpp"

#include "splatcolor/adjoint.hpp"
#include "splatcolor/errors.hpp"
#include "splatcolor/metrics.hpp"
#include "splatcolor/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace splatcolor {

OptimizerMethod parse_optimizer_method(std::string_view raw) {
    std::string name(raw);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (name == "adam") {
        return OptimizerMethod::Adam;
    }
    if (name == "adamw") {
        return OptimizerMethod::AdamW;
    }
    if (name == "rmsprop") {
        return OptimizerMethod::RMSprop;
    }
    if (name == "adagrad") {
        return OptimizerMethod::Adagrad;
    }
    throw InputError("unknown optimizer method '" + std::string(raw) + "'");
}

std::string_view to_string(OptimizerMethod method) {
    switch (method) {
    case OptimizerMethod::Adam:
        return "adam";
    case OptimizerMethod::AdamW:
        return "adamw";
    case OptimizerMethod::RMSprop:
        return "rmsprop";
    case OptimizerMethod::Adagrad:
        return "adagrad";
    }
    return "unknown";
}

OptimizerConfig OptimizerConfig::defaults(OptimizerMethod method) {
    OptimizerConfig c;
    c.method = method;
    switch (method) {
    case OptimizerMethod::Adam:
        break;
    case OptimizerMethod::AdamW:
        c.weight_decay = 0.01;
        break;
    case OptimizerMethod::RMSprop:
        break;
    case OptimizerMethod::Adagrad:
        c.learning_rate = 0.1;
        c.eps = 1e-10;
        break;
    }
    return c;
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        throw InputError("OptimizerConfig: learning_rate must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && alpha >= 0.0 && alpha < 1.0)) {
        throw InputError("OptimizerConfig: moment decay rates must lie in [0, 1)");
    }
    if (!(eps > 0.0) || !(weight_decay >= 0.0)) {
        throw InputError("OptimizerConfig: eps must be positive and weight_decay non-negative");
    }
    if (max_steps < 0 || eval_interval < 0) {
        throw InputError("OptimizerConfig: step counts must be non-negative");
    }
}

Optimizer::Optimizer(const OptimizerConfig &config, std::size_t parameters) : config_(config) {
    config_.validate();
    if (config_.method == OptimizerMethod::Adam || config_.method == OptimizerMethod::AdamW) {
        m_.assign(parameters, 0.0);
    }
    v_.assign(parameters, 0.0);
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != v_.size() || grad.size() != v_.size()) {
        throw InputError("Optimizer::step: parameter and gradient sizes do not match");
    }
    ++step_;
    const double lr = config_.learning_rate;
    const double eps = config_.eps;
    const auto n = static_cast<std::int64_t>(params.size());
    switch (config_.method) {
    case OptimizerMethod::Adam:
    case OptimizerMethod::AdamW: {
        const double b1 = config_.beta1;
        const double b2 = config_.beta2;
        const double bc1 = 1.0 - std::pow(b1, step_);
        const double bc2 = 1.0 - std::pow(b2, step_);
        const bool decoupled = config_.method == OptimizerMethod::AdamW;
        const double wd = config_.weight_decay;
        parallel_for(0, n, [&](std::int64_t i) {
            double g = grad[i];
            if (decoupled) {
                params[i] *= 1.0 - lr * wd;
            } else {
                g += wd * params[i];
            }
            m_[i] = b1 * m_[i] + (1.0 - b1) * g;
            v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
            params[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps);
        });
        break;
    }
    case OptimizerMethod::RMSprop: {
        const double a = config_.alpha;
        const double wd = config_.weight_decay;
        parallel_for(0, n, [&](std::int64_t i) {
            const double g = grad[i] + wd * params[i];
            v_[i] = a * v_[i] + (1.0 - a) * g * g;
            params[i] -= lr * g / (std::sqrt(v_[i]) + eps);
        });
        break;
    }
    case OptimizerMethod::Adagrad: {
        const double wd = config_.weight_decay;
        parallel_for(0, n, [&](std::int64_t i) {
            const double g = grad[i] + wd * params[i];
            v_[i] += g * g;
            params[i] -= lr * g / (std::sqrt(v_[i]) + eps);
        });
        break;
    }
    }
}

namespace {

double mean_test_l2(const GaussianScene &scene, std::span<const RasterPlan> plans,
                    std::span<const ChannelImage> targets) {
    double total = 0.0;
    for (std::size_t j = 0; j < plans.size(); ++j) {
        total += compare_images(render(plans[j], scene), targets[j]).l2;
    }
    return total / static_cast<double>(plans.size());
}

} // namespace

std::vector<TraceRow> optimize(GaussianScene &scene, std::span<const CameraView> views,
                               std::span<const ChannelImage> targets, const OptimizerConfig &opt,
                               const RasterConfig &raster, std::span<const CameraView> test_views,
                               std::span<const ChannelImage> test_targets) {
    using Clock = std::chrono::steady_clock;
    opt.validate();
    if (views.empty()) {
        throw InputError("optimize: no views");
    }
    if (targets.size() != views.size() || test_targets.size() != test_views.size()) {
        throw InputError("optimize: view and target counts differ");
    }
    for (std::size_t j = 0; j < views.size(); ++j) {
        check_image_matches(targets[j], views[j], "target " + std::to_string(j));
        if (targets[j].channels != scene.channels) {
            throw InputError("optimize: target " + std::to_string(j) + " channel count differs from scene");
        }
    }
    for (std::size_t j = 0; j < test_views.size(); ++j) {
        check_image_matches(test_targets[j], test_views[j], "test target " + std::to_string(j));
    }

    auto clock_start = Clock::now();
    double elapsed = 0.0;
    std::vector<RasterPlan> plans;
    for (const auto &v : views) {
        plans.emplace_back(scene, v, raster);
    }
    elapsed += std::chrono::duration<double>(Clock::now() - clock_start).count();

    std::vector<RasterPlan> test_plans;
    for (const auto &v : test_views) {
        test_plans.emplace_back(scene, v, raster);
    }

    std::size_t pixels = 0;
    for (const auto &t : targets) {
        pixels += t.data.size();
    }
    const double inv_count = 1.0 / static_cast<double>(pixels);

    Optimizer optimizer(opt, scene.sh_coeffs.size());
    std::vector<double> grad(scene.sh_coeffs.size());
    std::vector<TraceRow> trace;
    for (int step = 0;; ++step) {
        clock_start = Clock::now();
        double train = 0.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        const bool last = step == opt.max_steps || elapsed >= opt.time_budget;
        for (std::size_t j = 0; j < plans.size(); ++j) {
            ChannelImage residual = render(plans[j], scene);
            for (std::size_t p = 0; p < residual.data.size(); ++p) {
                residual.data[p] -= targets[j].data[p];
                train += residual.data[p] * residual.data[p];
            }
            if (!last) {
                const auto g = gradient_pass(plans[j], residual);
                for (std::size_t c = 0; c < g.size(); ++c) {
                    grad[c] += g[c] * inv_count;
                }
            }
        }
        elapsed += std::chrono::duration<double>(Clock::now() - clock_start).count();

        TraceRow row;
        row.step = step;
        row.seconds = elapsed;
        row.train_l2 = train * inv_count;
        if (!test_plans.empty() && opt.eval_interval > 0 && (step % opt.eval_interval == 0 || last)) {
            row.test_l2 = mean_test_l2(scene, test_plans, test_targets);
        }
        trace.push_back(row);
        if (last) {
            break;
        }

        clock_start = Clock::now();
        optimizer.step(scene.sh_coeffs, grad);
        elapsed += std::chrono::duration<double>(Clock::now() - clock_start).count();
    }
    return trace;
}

std::string trace_to_csv(std::span<const TraceRow> trace) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "step,seconds,train_L2,test_L2\n";
    for (const auto &row : trace) {
        out << row.step << ',' << row.seconds << ',' << row.train_l2 << ',';
        if (row.test_l2) {
            out << *row.test_l2;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace splatcolor
