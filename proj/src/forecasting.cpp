#include "tubepi/forecasting.hpp"

#include <stdexcept>

#include "tubepi/errors.hpp"

namespace tubepi {

void WindowSpec::validate(Eigen::Index series_len) const {
    if (p < 1) {
        throw std::invalid_argument("WindowSpec: p must be >= 1");
    }
    if (series_len <= p) {
        throw DataError("WindowSpec: series shorter than lag window " +
                        std::to_string(p));
    }
}

Dataset windowize(const Eigen::VectorXd& series, const WindowSpec& spec) {
    spec.validate(series.size());
    const Eigen::Index rows = series.size() - spec.p;
    Dataset data;
    data.features.resize(rows, spec.p);
    data.targets.resize(rows);
    for (Eigen::Index j = 0; j < rows; ++j) {
        data.features.row(j) = series.segment(j, spec.p).transpose();
        data.targets[j] = series[j + spec.p];
    }
    data.meta.kind = GeneratorKind::EXTERNAL;
    return data;
}

namespace {

double apply_scale(const Forecaster& fc, double y) {
    return (y - fc.scale_min) / fc.scale_range;
}

double invert_scale(const Forecaster& fc, double z) {
    return z * fc.scale_range + fc.scale_min;
}

} // namespace

std::pair<double, double> Forecaster::predict_next(
    const Eigen::VectorXd& history) const {
    if (history.size() < spec.p) {
        throw std::invalid_argument("predict_next: history shorter than lag "
                                    "window");
    }
    Eigen::VectorXd x = history.tail(spec.p);
    if (stub) {
        return stub(x);
    }
    if (scaled) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] = apply_scale(*this, x[i]);
        }
    }
    std::pair<double, double> bounds;
    if (kind == BackboneKind::KERNEL) {
        bounds = kernel_model.predict_point(x);
    } else {
        bounds = mlp_forward(net_model, x);
    }
    if (scaled) {
        bounds.first = invert_scale(*this, bounds.first);
        bounds.second = invert_scale(*this, bounds.second);
    }
    return bounds;
}

Forecaster train_forecaster(const Eigen::VectorXd& series,
                            const WindowSpec& spec, const TubeParams& params,
                            const ForecastBackbone& backbone,
                            bool minmax_scale) {
    spec.validate(series.size());
    Forecaster fc;
    fc.spec = spec;
    fc.params = params;
    fc.kind = backbone.kind;

    Eigen::VectorXd work = series;
    if (minmax_scale) {
        fc.scaled = true;
        fc.scale_min = series.minCoeff();
        const double range = series.maxCoeff() - fc.scale_min;
        // A flat series scales to all-zeros rather than dividing by zero.
        fc.scale_range = range > 0.0 ? range : 1.0;
        for (Eigen::Index i = 0; i < work.size(); ++i) {
            work[i] = apply_scale(fc, work[i]);
        }
    }

    const Dataset windows = windowize(work, spec);
    if (backbone.kind == BackboneKind::KERNEL) {
        fc.kernel_model = train(windows, params, backbone.kernel, backbone.gd);
    } else {
        NetConfig net_cfg = backbone.net;
        net_cfg.input_dim = spec.p;
        NetLossSpec loss;
        loss.kind = NetLossKind::TUBE;
        loss.params = params;
        fc.net_model = mlp_train(windows, loss, net_cfg, backbone.adam);
    }
    return fc;
}

PIReport rolling_evaluate(const Forecaster& fc,
                          const Eigen::VectorXd& test_series) {
    fc.spec.validate(test_series.size());
    const Eigen::Index rows = test_series.size() - fc.spec.p;
    Eigen::VectorXd y(rows), lowers(rows), uppers(rows);
    for (Eigen::Index j = 0; j < rows; ++j) {
        const auto [lo, up] =
            fc.predict_next(test_series.segment(j, fc.spec.p));
        lowers[j] = lo;
        uppers[j] = up;
        y[j] = test_series[j + fc.spec.p];
    }
    return evaluate_pi(y, lowers, uppers, fc.params.r);
}

} // namespace tubepi
