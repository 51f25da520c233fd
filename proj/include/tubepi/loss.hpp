#pragma once

#include <Eigen/Dense>

namespace tubepi {

// One interval-estimation problem: target coverage t, placement r,
// width-penalty weight delta, ridge weight lambda.
struct TubeParams {
    double t = 0.9;
    double r = 0.5;
    double delta = 0.0;
    double lambda = 0.0;

    void validate() const;
};

// Position of a target value relative to the tube [lower, upper] and the
// r-line r*upper + (1-r)*lower. Boundary tags fire only on exact equality.
enum class Region {
    ABOVE,        // y > upper
    INSIDE_UPPER, // lower < y < upper, y > r-line
    INSIDE_LOWER, // lower < y < upper, y < r-line
    BELOW,        // y < lower
    ON_UPPER,
    ON_LOWER,
    ON_RLINE,
};

struct BoundGradient {
    double d_lower = 0.0;
    double d_upper = 0.0;
};

Region classify_region(double y, double lower, double upper, double r);

// Four-branch piecewise-linear interval loss. Exact boundary hits cost 0 on
// the bounds; the r-line resolves to the upper inside branch (the loss is
// discontinuous there for r != 0.5, so the tie-break matters).
double tube_loss(double y, double lower, double upper, const TubeParams& params);

// Subgradients w.r.t. (lower, upper). On-bound points take the inside-branch
// subgradient; any choice is valid for a subgradient method.
BoundGradient tube_loss_grad(double y, double lower, double upper, const TubeParams& params);

// Pinball (quantile) loss of a residual u = y - f(x); subgradient q at u = 0.
double pinball_loss(double u, double q);
double pinball_grad(double u, double q);

// Softened QD loss over a batch: captured mean width plus a squared coverage
// penalty, with interval membership relaxed to a product of two sigmoids of
// sharpness s.
struct QDBreakdown {
    double mpiw_capt = 0.0;
    double picp_soft = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

QDBreakdown qd_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                    const Eigen::VectorXd& uppers, double t, double lambda_qd,
                    double soften_s);

// Coverage-penalized normalized width. Diagnostic only: the exponential
// penalty is not differentiated anywhere in this codebase.
double lube_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                 const Eigen::VectorXd& uppers, double t, double eta);

// Numerically stable logistic; shared by qd_loss and its backprop.
double sigmoid(double z);

} // namespace tubepi
