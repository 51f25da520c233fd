#include "tubepi/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tubepi/rng.hpp"

namespace tubepi {

void SplitPlan::validate() const {
    if (!(train_frac > 0.0 && calib_frac > 0.0 && test_frac > 0.0)) {
        throw std::invalid_argument("SplitPlan: fractions must be positive");
    }
    if (std::abs(train_frac + calib_frac + test_frac - 1.0) > 1e-9) {
        throw std::invalid_argument("SplitPlan: fractions must sum to 1");
    }
}

SplitResult split_dataset(const Dataset& data, const SplitPlan& plan) {
    plan.validate();
    const Eigen::Index n = data.rows();
    if (n < 3) {
        throw std::invalid_argument("split_dataset: need >= 3 rows");
    }
    Rng rng(plan.seed);
    const std::vector<std::size_t> order =
        rng.permutation(static_cast<std::size_t>(n));

    const Eigen::Index n_train = static_cast<Eigen::Index>(
        std::floor(plan.train_frac * static_cast<double>(n)));
    const Eigen::Index n_calib = static_cast<Eigen::Index>(
        std::floor(plan.calib_frac * static_cast<double>(n)));
    const Eigen::Index n_test = n - n_train - n_calib;
    if (n_train < 1 || n_calib < 1 || n_test < 1) {
        throw std::invalid_argument("split_dataset: a split came up empty");
    }

    auto take = [&](Eigen::Index start, Eigen::Index count) {
        Dataset part;
        part.meta = data.meta;
        part.features.resize(count, data.dim());
        part.targets.resize(count);
        for (Eigen::Index i = 0; i < count; ++i) {
            const auto src = static_cast<Eigen::Index>(
                order[static_cast<std::size_t>(start + i)]);
            part.features.row(i) = data.features.row(src);
            part.targets[i] = data.targets[src];
        }
        return part;
    };

    SplitResult out;
    out.train = take(0, n_train);
    out.calib = take(n_train, n_calib);
    out.test = take(n_train + n_calib, n_test);
    return out;
}

double conformal_quantile(const std::vector<double>& scores, double t) {
    if (scores.empty()) {
        throw std::invalid_argument("conformal_quantile: empty scores");
    }
    if (!(t > 0.0 && t < 1.0)) {
        throw std::invalid_argument("conformal_quantile: t must be in (0, 1)");
    }
    const auto n = scores.size();
    const auto k = static_cast<std::size_t>(
        std::ceil(t * static_cast<double>(n + 1)));
    if (k > n) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<double> sorted = scores;
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
    return sorted[k - 1];
}

std::vector<double> abs_residual_scores(const PointFn& point_fn,
                                        const Dataset& calib) {
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(calib.rows()));
    for (Eigen::Index i = 0; i < calib.rows(); ++i) {
        const double f = point_fn(calib.features.row(i).transpose());
        scores.push_back(std::abs(calib.targets[i] - f));
    }
    return scores;
}

std::vector<double> cqr_scores(const PIFn& pi_fn, const Dataset& calib) {
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(calib.rows()));
    for (Eigen::Index i = 0; i < calib.rows(); ++i) {
        const auto [lo, up] = pi_fn(calib.features.row(i).transpose());
        const double y = calib.targets[i];
        scores.push_back(std::max(lo - y, y - up));
    }
    return scores;
}

bool ConformalPredictor::infinite_width() const {
    return std::isinf(q_hat);
}

std::pair<double, double> ConformalPredictor::predict_set(
    const Eigen::VectorXd& x) const {
    if (!base) {
        throw std::logic_error("predict_set: predictor not calibrated");
    }
    if (infinite_width()) {
        return {-std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};
    }
    const auto [lo, up] = base(x);
    return {lo - q_hat, up + q_hat};
}

ConformalPredictor conformalize(PIFn base, const Dataset& calib, double t) {
    if (!base) {
        throw std::invalid_argument("conformalize: empty base predictor");
    }
    ConformalPredictor cp;
    cp.rule = ConformalRule::CQR_STYLE;
    cp.calib_size = static_cast<long>(calib.rows());
    cp.q_hat = conformal_quantile(cqr_scores(base, calib), t);
    cp.base = std::move(base);
    return cp;
}

ConformalPredictor conformalize_absolute(PointFn point_fn,
                                         const Dataset& calib, double t) {
    if (!point_fn) {
        throw std::invalid_argument("conformalize_absolute: empty predictor");
    }
    ConformalPredictor cp;
    cp.rule = ConformalRule::ABS_RESIDUAL;
    cp.calib_size = static_cast<long>(calib.rows());
    cp.q_hat = conformal_quantile(abs_residual_scores(point_fn, calib), t);
    cp.base = [point_fn](const Eigen::VectorXd& x) {
        const double f = point_fn(x);
        return std::make_pair(f, f);
    };
    return cp;
}

} // namespace tubepi
