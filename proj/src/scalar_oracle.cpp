#include "tubepi/scalar_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tubepi {

void GridSpec::validate() const {
    if (!(lo < hi)) {
        throw std::invalid_argument("GridSpec: lo must be < hi");
    }
    if (steps < 1) {
        throw std::invalid_argument("GridSpec: steps must be >= 1");
    }
}

double GridSpec::value(int i) const {
    return lo + (hi - lo) * (static_cast<double>(i) / steps);
}

GridSpec default_grid(const std::vector<double>& samples, int steps) {
    if (samples.empty()) {
        throw std::invalid_argument("default_grid: no samples");
    }
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    const double range = *mx - *mn;
    const double pad = range > 0.0 ? 0.05 * range : 0.5;
    return GridSpec{*mn - pad, *mx + pad, steps};
}

double mean_tube_loss(const std::vector<double>& samples, double mu_lower,
                      double mu_upper, const TubeParams& params) {
    if (samples.empty()) {
        throw std::invalid_argument("mean_tube_loss: no samples");
    }
    double sum = 0.0;
    for (const double y : samples) {
        sum += tube_loss(y, mu_lower, mu_upper, params);
    }
    return sum / static_cast<double>(samples.size());
}

GridMinimum grid_minimize_tube(const std::vector<double>& samples,
                               const TubeParams& params,
                               const GridSpec& grid) {
    params.validate();
    grid.validate();
    if (samples.size() < 2) {
        throw std::invalid_argument("grid_minimize_tube: need >= 2 samples");
    }
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    if (grid.lo > *mn || grid.hi < *mx) {
        throw std::invalid_argument(
            "grid_minimize_tube: grid does not cover the sample range");
    }

    // Width and ridge penalties are deliberately excluded here.
    TubeParams bare = params;
    bare.delta = 0.0;
    bare.lambda = 0.0;

    GridMinimum best;
    best.loss = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid.steps; ++i) {
        const double lo_val = grid.value(i);
        for (int j = i; j <= grid.steps; ++j) {
            const double hi_val = grid.value(j);
            const double loss = mean_tube_loss(samples, lo_val, hi_val, bare);
            // Strict comparison plus ascending scan order = smallest
            // (mu_lower, mu_upper) wins ties.
            if (loss < best.loss) {
                best = {lo_val, hi_val, loss};
            }
        }
    }
    return best;
}

LemmaRatios lemma_ratios(const std::vector<double>& samples,
                         const TubeParams& params, const GridSpec& grid) {
    const GridMinimum opt = grid_minimize_tube(samples, params, grid);
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(samples.data(), m);
    const Eigen::VectorXd lowers = Eigen::VectorXd::Constant(m, opt.mu_lower);
    const Eigen::VectorXd uppers = Eigen::VectorXd::Constant(m, opt.mu_upper);

    LemmaRatios out;
    out.optimum = opt;
    out.counts = partition_counts(y, lowers, uppers, params.r);
    out.target = (1.0 - params.t) / params.t;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto& c = out.counts;
    out.ratio_12 =
        c.m2 > 0 ? static_cast<double>(c.m1) / static_cast<double>(c.m2) : nan;
    out.ratio_43 =
        c.m3 > 0 ? static_cast<double>(c.m4) / static_cast<double>(c.m3) : nan;
    const Eigen::Index inside = c.m2 + c.m3;
    out.ratio_out_in =
        inside > 0 ? static_cast<double>(c.m1 + c.m4) /
                         static_cast<double>(inside)
                   : nan;
    return out;
}

} // namespace tubepi
