// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splatcolor/adjoint.hpp"
#include "splatcolor/metrics.hpp"
#include "splatcolor/rasterizer.hpp"
#include "splatcolor/scene.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace splatcolor {

/// Square matrix over the SH coefficients of one channel; at most 16 x 16.
using ShMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 16, 16>;

/// lambda_m per SH index: 1e-5 for band 0, then x10 per band (1e-2 at band 3).
std::vector<double> default_lambda_schedule(int sh_order);

struct SolveConfig {
    int sh_order = 3;
    std::vector<double> lambdas = default_lambda_schedule(3);
    int n_refine = 5;
    /// Gaussians with total visibility at or below this keep their coefficients.
    double min_total_visibility = 1e-6;
    double visibility_epsilon = kVisibilityEpsilon;
    /// Render every view after solving to fill SolveReport::view_metrics.
    bool report_residuals = true;
    RasterConfig raster;

    /// Default schedule for the given order.
    static SolveConfig for_order(int sh_order, int n_refine);
    /// Throws InputError on negative or band-varying lambdas, or a size mismatch.
    void validate() const;
};

/// Dense Cholesky factor L (A = L L^T) of a small SPD matrix.
class CholeskyFactor {
public:
    /// nullopt if a pivot is not safely positive.
    static std::optional<CholeskyFactor> compute(const ShMatrix &a);

    /// Overwrites each column of b with A^-1 b.
    void solve_in_place(Eigen::Ref<Eigen::MatrixXd> b) const;
    const ShMatrix &lower() const { return lower_; }

private:
    ShMatrix lower_;
};

/// Regularized normal equations of one Gaussian:
/// gram = sum_j V_j y_j y_j^T + w diag(lambda), rhs(:, k) = sum_j V_j C_jk y_j.
struct GaussianSystem {
    ShMatrix gram;
    std::optional<CholeskyFactor> factor;
    Eigen::MatrixXd rhs;
    double total_visibility = 0.0;
    int visible_views = 0;
};

/// Builds every Gaussian's system from per-view accumulators and factors those
/// above min_total_visibility.
std::vector<GaussianSystem> assemble(std::span<const ViewAccumulators> views, const SolveConfig &config);

/// Coefficients (M x K) minimizing the regularized weighted least-squares
/// objective. Throws NumericalError when the system has no factorization.
Eigen::MatrixXd solve(const GaussianSystem &system);

struct StageTimings {
    double project = 0.0;
    double accumulate = 0.0;
    double assemble = 0.0;
    double solve = 0.0;
    double refine = 0.0;
};

struct SolveReport {
    std::size_t gaussians = 0;
    std::size_t solved = 0;
    /// Total visibility at or below min_total_visibility; coefficients untouched.
    std::vector<int> skipped;
    /// Regularized gram was not positive definite; coefficients untouched.
    std::vector<int> failed;
    StageTimings timings;
    /// Re-render error per view after the last stage run.
    std::vector<ImageMetrics> view_metrics;
    /// refine_trace[s][j]: mean squared residual of view j after s refinement steps.
    std::vector<std::vector<double>> refine_trace;
};

std::string report_to_json(const SolveReport &report);

/// Everything refinement reuses: raster plans, per-view accumulators and the
/// factored systems. All of it depends on geometry and poses only.
struct Colorization {
    std::vector<RasterPlan> plans;
    std::vector<ViewAccumulators> accumulators;
    std::vector<GaussianSystem> systems;
    SolveReport report;
};

/// Direct solve: accumulate every view, assemble, solve, and write the new
/// coefficients into `scene`. Throws InputError on inconsistent inputs and
/// NumericalError when no Gaussian is visible.
Colorization colorize(GaussianScene &scene, std::span<const CameraView> views,
                      std::span<const ChannelImage> targets, const SolveConfig &config);

/// One residual refinement step over all views. Returns the per-view mean
/// squared residual measured before the update.
std::vector<double> refine_step(GaussianScene &scene, std::span<const ChannelImage> targets,
                                Colorization &state, const SolveConfig &config);

/// config.n_refine refinement steps; appends the residual trace to the report
/// and refreshes its view metrics.
void refine(GaussianScene &scene, std::span<const ChannelImage> targets, Colorization &state,
            const SolveConfig &config);

/// colorize followed by refine.
Colorization colorize_and_refine(GaussianScene &scene, std::span<const CameraView> views,
                                 std::span<const ChannelImage> targets, const SolveConfig &config);

struct SegmentResult {
    GaussianScene scene;
    /// Solved mask value per input Gaussian; NaN where it was not solved.
    std::vector<double> mask_values;
    std::vector<int> retained;
    SolveReport report;
};

inline constexpr double kDefaultSegmentThreshold = 0.6;

/// Lifts single-channel masks onto the splats (order 0, no refinement) and
/// keeps the solved Gaussians whose mask value reaches `threshold`. Geometry
/// and coefficients of the kept Gaussians are copied unchanged.
SegmentResult segment(const GaussianScene &scene, std::span<const CameraView> views,
                      std::span<const ChannelImage> masks, double threshold,
                      const SolveConfig &config = SolveConfig::for_order(0, 0));

} // namespace splatcolor
