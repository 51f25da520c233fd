#pragma once

#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "tubepi/dense_net.hpp"
#include "tubepi/kernel_machine.hpp"
#include "tubepi/metrics.hpp"

namespace tubepi {

struct WindowSpec {
    Eigen::Index p = 8; // lag window length; horizon is fixed at one step

    void validate(Eigen::Index series_len) const;
};

// Sliding windows over a univariate series: row j holds
// series[j .. j+p-1] oldest-first (most recent lag in the last column)
// with target series[j+p]; exactly len - p rows.
Dataset windowize(const Eigen::VectorXd& series, const WindowSpec& spec);

enum class BackboneKind { KERNEL, NET };

struct ForecastBackbone {
    BackboneKind kind = BackboneKind::KERNEL;
    KernelSpec kernel;
    GDConfig gd;
    NetConfig net; // input_dim is overwritten with the window length
    AdamConfig adam;
};

struct Forecaster {
    WindowSpec spec;
    TubeParams params;
    BackboneKind kind = BackboneKind::KERNEL;
    PIKernelModel kernel_model;
    DenseNet net_model;

    // Min-max scaling learned on the training series; bounds are mapped
    // back through the stored inverse.
    bool scaled = false;
    double scale_min = 0.0;
    double scale_range = 1.0;

    // Test seam: when set, bypasses the backbone entirely.
    std::function<std::pair<double, double>(const Eigen::VectorXd&)> stub;

    // One-step-ahead bounds given at least p trailing observations.
    std::pair<double, double> predict_next(const Eigen::VectorXd& history) const;
};

Forecaster train_forecaster(const Eigen::VectorXd& series,
                            const WindowSpec& spec, const TubeParams& params,
                            const ForecastBackbone& backbone,
                            bool minmax_scale = false);

// Teacher-forced one-step evaluation: every test index beyond the first p
// observations is predicted from the true preceding values.
PIReport rolling_evaluate(const Forecaster& fc,
                          const Eigen::VectorXd& test_series);

} // namespace tubepi
