#pragma once

#include <vector>

#include "tubepi/loss.hpp"
#include "tubepi/metrics.hpp"

namespace tubepi {

// Candidate values are the (steps + 1)-point uniform grid on [lo, hi];
// only ordered pairs (mu_lower <= mu_upper) are evaluated.
struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    int steps = 400;

    void validate() const;
    // Node i as lo + (hi - lo) * i / steps, so both endpoints are exact.
    double value(int i) const;
};

// Grid covering the sample range padded by 5% on each side (a fixed
// half-unit pad when all samples coincide, to keep lo < hi).
GridSpec default_grid(const std::vector<double>& samples, int steps = 400);

struct GridMinimum {
    double mu_lower = 0.0;
    double mu_upper = 0.0;
    double loss = 0.0;
};

// Mean tube loss of constant bounds over the samples, summed in input
// order. The grid minimizer scores every cell with exactly this
// function, so its reported minimum is directly comparable.
double mean_tube_loss(const std::vector<double>& samples, double mu_lower,
                      double mu_upper, const TubeParams& params);

// Exhaustive search over all ordered grid pairs; ties break toward the
// lexicographically smallest (mu_lower, mu_upper). The width and ridge
// knobs of params are ignored: this is the bare-loss setting.
GridMinimum grid_minimize_tube(const std::vector<double>& samples,
                               const TubeParams& params, const GridSpec& grid);

struct LemmaRatios {
    PartitionCounts counts; // partition of the samples at the optimum
    double ratio_12 = 0.0;  // m1 / m2 (NaN when m2 = 0)
    double ratio_43 = 0.0;  // m4 / m3 (NaN when m3 = 0)
    double ratio_out_in = 0.0; // (m1 + m4) / (m2 + m3)
    double target = 0.0;       // (1 - t) / t
    GridMinimum optimum;
};

// Minimizes, partitions the samples against the constant optimum, and
// reports the outside/inside count ratios next to their common target.
LemmaRatios lemma_ratios(const std::vector<double>& samples,
                         const TubeParams& params, const GridSpec& grid);

} // namespace tubepi
