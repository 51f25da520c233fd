#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tubepi/dataset.hpp"

namespace tubepi {

// Two-bound base predictor injected into the calibration machinery; the
// same signature serves tube-trained and paired-quantile bases.
using PIFn = std::function<std::pair<double, double>(const Eigen::VectorXd&)>;
using PointFn = std::function<double(const Eigen::VectorXd&)>;

struct SplitPlan {
    double train_frac = 0.6;
    double calib_frac = 0.2;
    double test_frac = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitResult {
    Dataset train;
    Dataset calib;
    Dataset test;
};

// Shuffles rows with the plan's seed, then cuts train/calib/test.
SplitResult split_dataset(const Dataset& data, const SplitPlan& plan);

// k-th smallest score with k = ceil(t * (n + 1)); +infinity when the rank
// exceeds the sample (the conservative infinite-width case).
double conformal_quantile(const std::vector<double>& scores, double t);

// |y_i - f(x_i)| per calibration row.
std::vector<double> abs_residual_scores(const PointFn& point_fn,
                                        const Dataset& calib);

// E_i = max(lower(x_i) - y_i, y_i - upper(x_i)); negative strictly inside.
std::vector<double> cqr_scores(const PIFn& pi_fn, const Dataset& calib);

enum class ConformalRule { ABS_RESIDUAL, CQR_STYLE };

struct ConformalPredictor {
    PIFn base;
    ConformalRule rule = ConformalRule::CQR_STYLE;
    double q_hat = 0.0;
    long calib_size = 0;

    bool infinite_width() const;
    // [lower(x) - q_hat, upper(x) + q_hat]; (-inf, inf) when uncalibratable.
    std::pair<double, double> predict_set(const Eigen::VectorXd& x) const;
};

// Interval-base calibration; serves both tube-trained and paired-quantile
// bases, which differ only in how `base` was fitted.
ConformalPredictor conformalize(PIFn base, const Dataset& calib, double t);

// Point-base calibration with absolute residuals; the base interval is the
// degenerate [f(x), f(x)].
ConformalPredictor conformalize_absolute(PointFn point_fn,
                                         const Dataset& calib, double t);

} // namespace tubepi
