// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/rasterizer.hpp"
#include "splatcolor/scene.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace splatcolor {

enum class OptimizerMethod { Adam, AdamW, RMSprop, Adagrad };

/// Throws InputError for names other than adam, adamw, rmsprop, adagrad.
OptimizerMethod parse_optimizer_method(std::string_view name);
std::string_view to_string(OptimizerMethod method);

struct OptimizerConfig {
    OptimizerMethod method = OptimizerMethod::Adam;
    double learning_rate = 0.0025;
    double beta1 = 0.9;
    double beta2 = 0.999;
    /// Smoothing constant of RMSprop's squared-gradient average.
    double alpha = 0.99;
    double eps = 1e-8;
    double weight_decay = 0.0;
    int max_steps = 100;
    double time_budget = std::numeric_limits<double>::infinity();
    /// Held-out loss is evaluated every eval_interval steps (0 disables it).
    int eval_interval = 1;

    /// Published defaults; learning rates 0.0025 except Adagrad at 0.1.
    static OptimizerConfig defaults(OptimizerMethod method);
    void validate() const;
};

/// First-order update rules over a flat parameter vector.
class Optimizer {
public:
    Optimizer(const OptimizerConfig &config, std::size_t parameters);

    void step(std::span<double> params, std::span<const double> grad);

    int steps_taken() const { return step_; }
    /// Adam/AdamW first moment; empty for other methods.
    std::span<const double> first_moment() const { return m_; }
    /// Adam/AdamW second moment, RMSprop running average, or Adagrad sum.
    std::span<const double> second_moment() const { return v_; }

private:
    OptimizerConfig config_;
    int step_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

struct TraceRow {
    int step = 0;
    /// Optimization wall-clock up to this row; held-out evaluation excluded.
    double seconds = 0.0;
    double train_l2 = 0.0;
    std::optional<double> test_l2;
};

/// Full-batch gradient descent on the mean squared image error over all
/// training views, geometry fixed. Row s describes the coefficients after s
/// updates. Test loss uses `test_views`/`test_targets` when given.
std::vector<TraceRow> optimize(GaussianScene &scene, std::span<const CameraView> views,
                               std::span<const ChannelImage> targets, const OptimizerConfig &opt,
                               const RasterConfig &raster = {},
                               std::span<const CameraView> test_views = {},
                               std::span<const ChannelImage> test_targets = {});

/// "step,seconds,train_L2,test_L2" with an empty test column when absent.
std::string trace_to_csv(std::span<const TraceRow> trace);

} // namespace splatcolor
