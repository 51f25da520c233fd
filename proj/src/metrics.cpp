#include "tubepi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tubepi/loss.hpp"

namespace tubepi {

namespace {

void check_lengths(Eigen::Index a, Eigen::Index b, const char* who) {
    if (a != b) throw std::invalid_argument(std::string(who) + ": length mismatch");
    if (a == 0) throw std::invalid_argument(std::string(who) + ": empty input");
}

} // namespace

double empirical_quantile(const Eigen::VectorXd& values, double q) {
    if (values.size() == 0) throw std::invalid_argument("empirical_quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q outside [0, 1]");
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const std::size_t idx = static_cast<std::size_t>(std::floor(h));
    if (idx + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(idx);
    return sorted[idx] + frac * (sorted[idx + 1] - sorted[idx]);
}

double picp(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
            const Eigen::VectorXd& uppers) {
    check_lengths(y.size(), lowers.size(), "picp");
    check_lengths(y.size(), uppers.size(), "picp");
    long covered = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] >= lowers[i] && y[i] <= uppers[i]) ++covered;
    return static_cast<double>(covered) / static_cast<double>(y.size());
}

double mpiw(const Eigen::VectorXd& lowers, const Eigen::VectorXd& uppers, bool* crossed) {
    check_lengths(lowers.size(), uppers.size(), "mpiw");
    bool any_crossed = false;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < lowers.size(); ++i) {
        const double w = uppers[i] - lowers[i];
        if (w < 0.0) any_crossed = true;
        sum += w;
    }
    if (crossed) *crossed = any_crossed;
    return sum / static_cast<double>(lowers.size());
}

double smse(const Eigen::VectorXd& est_lo, const Eigen::VectorXd& est_hi,
            const Eigen::VectorXd& true_lo, const Eigen::VectorXd& true_hi) {
    check_lengths(est_lo.size(), true_lo.size(), "smse");
    check_lengths(est_hi.size(), true_hi.size(), "smse");
    check_lengths(est_lo.size(), est_hi.size(), "smse");
    const double mse_lo = (est_lo - true_lo).squaredNorm() / static_cast<double>(est_lo.size());
    const double mse_hi = (est_hi - true_hi).squaredNorm() / static_cast<double>(est_hi.size());
    return mse_lo + mse_hi;
}

PartitionCounts partition_counts(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                                 const Eigen::VectorXd& uppers, double r) {
    check_lengths(y.size(), lowers.size(), "partition_counts");
    check_lengths(y.size(), uppers.size(), "partition_counts");
    PartitionCounts pc;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        switch (classify_region(y[i], lowers[i], uppers[i], r)) {
            case Region::ABOVE:        ++pc.m1; break;
            case Region::INSIDE_UPPER: ++pc.m2; break;
            case Region::INSIDE_LOWER: ++pc.m3; break;
            case Region::BELOW:        ++pc.m4; break;
            case Region::ON_UPPER:     ++pc.k_upper; break;
            case Region::ON_RLINE:     ++pc.k_rline; break;
            case Region::ON_LOWER:     ++pc.k_lower; break;
        }
    }
    return pc;
}

std::pair<double, double> lq_uq(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                                const Eigen::VectorXd& uppers) {
    check_lengths(y.size(), lowers.size(), "lq_uq");
    check_lengths(y.size(), uppers.size(), "lq_uq");
    long below_upper = 0, below_lower = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] < uppers[i]) ++below_upper;
        if (y[i] < lowers[i]) ++below_lower;
    }
    const double n = static_cast<double>(y.size());
    return {static_cast<double>(below_upper) / n, static_cast<double>(below_lower) / n};
}

PIReport evaluate_pi(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                     const Eigen::VectorXd& uppers, double r) {
    PIReport rep;
    rep.n = static_cast<long>(y.size());
    rep.picp = picp(y, lowers, uppers);
    rep.mpiw = mpiw(lowers, uppers, &rep.crossed_bounds);
    // the region partition needs ordered bounds; skip it when any pair crossed
    if (!rep.crossed_bounds) rep.partition = partition_counts(y, lowers, uppers, r);
    std::tie(rep.lq, rep.uq) = lq_uq(y, lowers, uppers);
    return rep;
}

} // namespace tubepi
