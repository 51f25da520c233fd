#pragma once

#include <optional>

#include <Eigen/Dense>

namespace tubepi {

struct PartitionCounts {
    long m1 = 0; // above the tube
    long m2 = 0; // inside, above the r-line
    long m3 = 0; // inside, below the r-line
    long m4 = 0; // below the tube
    long k_upper = 0; // exactly on the upper bound
    long k_rline = 0; // exactly on the r-line
    long k_lower = 0; // exactly on the lower bound

    long total() const { return m1 + m2 + m3 + m4 + k_upper + k_rline + k_lower; }
};

// Interval-quality summary of one evaluation pass.
struct PIReport {
    double picp = 0.0;
    double mpiw = 0.0;
    bool crossed_bounds = false;      // any upper < lower seen by mpiw
    std::optional<double> smse;       // only when true bounds are known
    PartitionCounts partition;
    double lq = 0.0;                  // fraction strictly below the upper bound
    double uq = 0.0;                  // fraction strictly below the lower bound
    long n = 0;
    double train_seconds = 0.0;       // filled by callers that timed training
};

// Linear-interpolation empirical quantile of an unsorted sample (the
// convention where q spans the order statistics with h = (n-1) q).
double empirical_quantile(const Eigen::VectorXd& values, double q);

// Fraction of targets inside their interval, boundaries included.
double picp(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
            const Eigen::VectorXd& uppers);

// Mean signed width; crossed widths are averaged as-is and flagged.
double mpiw(const Eigen::VectorXd& lowers, const Eigen::VectorXd& uppers,
            bool* crossed = nullptr);

double smse(const Eigen::VectorXd& est_lo, const Eigen::VectorXd& est_hi,
            const Eigen::VectorXd& true_lo, const Eigen::VectorXd& true_hi);

PartitionCounts partition_counts(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                                 const Eigen::VectorXd& uppers, double r);

// lq = fraction strictly below the upper bound, uq = fraction strictly below
// the lower bound; their difference is the strictly-inside fraction.
std::pair<double, double> lq_uq(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                                const Eigen::VectorXd& uppers);

// Assembles the full report in one pass over the vectors.
PIReport evaluate_pi(const Eigen::VectorXd& y, const Eigen::VectorXd& lowers,
                     const Eigen::VectorXd& uppers, double r);

} // namespace tubepi
