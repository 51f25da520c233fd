#pragma once

#include <cstdint>
#include <utility>

#include "tubepi/dataset.hpp"
#include "tubepi/rng.hpp"

namespace tubepi {

// sin(x) / x, with sinc(0) = 1 by continuity.
double sinc(double x);

// Inverse CDF of the standard normal (Wichura's algorithm, good to
// ~1e-15 over (0,1)). Throws std::invalid_argument outside (0,1).
double normal_quantile(double p);

// CDF and inverse CDF of the chi-squared distribution with 3 degrees
// of freedom. The CDF has a closed form in erf; the inverse bisects it.
double chi2_3_cdf(double x);
double chi2_3_quantile(double p);

Dataset gen_dataset_a(Eigen::Index m, std::uint64_t seed,
                      double noise_variance = 0.8);
Dataset gen_dataset_b(Eigen::Index m, std::uint64_t seed);
Dataset gen_sinc_uniform(Eigen::Index m, std::uint64_t seed);
Dataset gen_hetero_sin(Eigen::Index m, std::uint64_t seed);

Dataset gen_dataset(GeneratorKind kind, Eigen::Index m, std::uint64_t seed,
                    double noise_variance = 0.8);

// Ideal interval of coverage t at asymmetry r for a single point of a
// synthetic generator: [F^-1(q), F^-1(q + t)] with q = (1 - t)(1 - r),
// where F is the conditional noise CDF shifted by the trend value.
// Throws for EXTERNAL data, where the conditional law is unknown.
std::pair<double, double> true_pi(GeneratorKind kind, double x, double t,
                                  double r, double noise_variance = 0.8);

// Convenience: per-row ideal bounds for a whole dataset.
void true_pi_bounds(const Dataset& data, double t, double r,
                    Eigen::VectorXd& lowers, Eigen::VectorXd& uppers);

} // namespace tubepi
