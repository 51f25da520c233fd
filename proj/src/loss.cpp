#include "tubepi/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tubepi {

void TubeParams::validate() const {
    if (!(t > 0.0 && t < 1.0))
        throw std::invalid_argument("TubeParams: t must lie in (0,1), got " + std::to_string(t));
    if (!(r > 0.0 && r < 1.0))
        throw std::invalid_argument("TubeParams: r must lie in (0,1), got " + std::to_string(r));
    if (delta < 0.0)
        throw std::invalid_argument("TubeParams: delta must be >= 0");
    if (lambda < 0.0)
        throw std::invalid_argument("TubeParams: lambda must be >= 0");
}

namespace {

void check_ordered(double lower, double upper) {
    if (lower > upper)
        throw std::invalid_argument("interval bounds crossed: lower=" + std::to_string(lower) +
                                    " > upper=" + std::to_string(upper));
}

} // namespace

Region classify_region(double y, double lower, double upper, double r) {
    check_ordered(lower, upper);
    if (y > upper) return Region::ABOVE;
    if (y < lower) return Region::BELOW;
    if (y == upper) return Region::ON_UPPER;
    if (y == lower) return Region::ON_LOWER;
    const double rline = r * upper + (1.0 - r) * lower;
    if (y == rline) return Region::ON_RLINE;
    return y > rline ? Region::INSIDE_UPPER : Region::INSIDE_LOWER;
}

double tube_loss(double y, double lower, double upper, const TubeParams& params) {
    const double t = params.t;
    switch (classify_region(y, lower, upper, params.r)) {
        case Region::ABOVE:
            return t * (y - upper);
        case Region::BELOW:
            return t * (lower - y);
        case Region::INSIDE_UPPER:
        case Region::ON_UPPER:
        case Region::ON_RLINE:
            return (1.0 - t) * (upper - y);
        case Region::INSIDE_LOWER:
        case Region::ON_LOWER:
            return (1.0 - t) * (y - lower);
    }
    return 0.0; // unreachable
}

BoundGradient tube_loss_grad(double y, double lower, double upper, const TubeParams& params) {
    const double t = params.t;
    switch (classify_region(y, lower, upper, params.r)) {
        case Region::ABOVE:
            return {0.0, -t};
        case Region::BELOW:
            return {t, 0.0};
        case Region::INSIDE_UPPER:
        case Region::ON_UPPER:
        case Region::ON_RLINE:
            return {0.0, 1.0 - t};
        case Region::INSIDE_LOWER:
        case Region::ON_LOWER:
            return {-(1.0 - t), 0.0};
    }
    return {};
}

double pinball_loss(double u, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("pinball_loss: q must lie in (0,1)");
    return u >= 0.0 ? q * u : (q - 1.0) * u;
}

double pinball_grad(double u, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("pinball_grad: q must lie in (0,1)");
    return u >= 0.0 ? q : q - 1.0;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

QDBreakdown qd_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                    const Eigen::VectorXd& uppers, double t, double lambda_qd,
                    double soften_s) {
    const Eigen::Index m = y.size();
    if (m == 0) throw std::invalid_argument("qd_loss: empty inputs");
    if (lowers.size() != m || uppers.size() != m)
        throw std::invalid_argument("qd_loss: length mismatch");
    if (soften_s <= 0.0) throw std::invalid_argument("qd_loss: soften_s must be > 0");

    double weight_sum = 0.0, width_sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double k = sigmoid(soften_s * (y[i] - lowers[i])) *
                         sigmoid(soften_s * (uppers[i] - y[i]));
        weight_sum += k;
        width_sum += (uppers[i] - lowers[i]) * k;
    }

    QDBreakdown out;
    // all points effectively outside: captured width is undefined, use 0
    out.mpiw_capt = weight_sum < 1e-12 ? 0.0 : width_sum / weight_sum;
    out.picp_soft = weight_sum / static_cast<double>(m);
    const double shortfall = std::max(0.0, t - out.picp_soft);
    out.penalty = lambda_qd * static_cast<double>(m) / (t * (1.0 - t)) * shortfall * shortfall;
    out.total = out.mpiw_capt + out.penalty;
    return out;
}

double lube_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                 const Eigen::VectorXd& uppers, double t, double eta) {
    const Eigen::Index m = y.size();
    if (m == 0) throw std::invalid_argument("lube_loss: empty inputs");
    if (lowers.size() != m || uppers.size() != m)
        throw std::invalid_argument("lube_loss: length mismatch");
    const double range = y.maxCoeff() - y.minCoeff();
    if (range == 0.0)
        throw std::invalid_argument("lube_loss: target range is zero");

    double covered = 0.0, width_sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (y[i] >= lowers[i] && y[i] <= uppers[i]) covered += 1.0;
        width_sum += uppers[i] - lowers[i];
    }
    const double picp = covered / static_cast<double>(m);
    const double nmpiw = width_sum / static_cast<double>(m) / range;
    const double gamma = picp >= t ? 0.0 : 1.0;
    return nmpiw * (1.0 + gamma * std::exp(-eta * (picp - t)));
}

} // namespace tubepi
