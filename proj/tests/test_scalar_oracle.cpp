#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tubepi/rng.hpp"
#include "tubepi/scalar_oracle.hpp"

using namespace tubepi;

namespace {

TubeParams make_params(double t, double r) {
    TubeParams p;
    p.t = t;
    p.r = r;
    return p;
}

std::vector<double> normal_samples(int m, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(m));
    for (double& x : v) x = rng.normal();
    return v;
}

} // namespace

TEST_CASE("grid nodes hit the endpoints and dyadic midpoints exactly") {
    const GridSpec g{-1.0, 1.0, 4};
    CHECK(g.value(0) == -1.0);
    CHECK(g.value(2) == 0.0);
    CHECK(g.value(4) == 1.0);
}

TEST_CASE("default grid pads the sample range by five percent") {
    const GridSpec g = default_grid({0.0, 10.0}, 100);
    CHECK(g.lo == doctest::Approx(-0.5));
    CHECK(g.hi == doctest::Approx(10.5));
    CHECK(g.steps == 100);
    // a degenerate range falls back to a fixed half-unit pad
    const GridSpec flat = default_grid({2.5, 2.5}, 10);
    CHECK(flat.lo == doctest::Approx(2.0));
    CHECK(flat.hi == doctest::Approx(3.0));
}

TEST_CASE("small-case argmin matches the exhaustive reference") {
    // Independently enumerated: integer grid 0..4 over samples {0,1,2,3,4}
    // at t=0.6, r=0.5 has two minimizers, (0,3) and (1,4), both at mean
    // loss 0.28; the lexicographically smaller pair must win.
    const std::vector<double> samples{0.0, 1.0, 2.0, 3.0, 4.0};
    const GridSpec grid{0.0, 4.0, 4};
    const GridMinimum gm =
        grid_minimize_tube(samples, make_params(0.6, 0.5), grid);
    CHECK(gm.mu_lower == 0.0);
    CHECK(gm.mu_upper == 3.0);
    CHECK(gm.loss == doctest::Approx(0.28).epsilon(1e-12));
}

TEST_CASE("identical samples admit a zero-loss tube pinned at the atom") {
    // every sample sits exactly on the upper bound, so any (l, 2.5) pair is
    // free; the ascending scan returns the one with the smallest lower bound
    const std::vector<double> samples(8, 2.5);
    const GridSpec grid = default_grid(samples, 400);
    const GridMinimum gm =
        grid_minimize_tube(samples, make_params(0.8, 0.5), grid);
    CHECK(gm.loss == 0.0);
    CHECK(gm.mu_upper == 2.5);
    CHECK(gm.mu_lower == grid.lo);
}

TEST_CASE("the grid minimum beats every random feasible pair") {
    const std::vector<double> samples = normal_samples(300, 21);
    const TubeParams p = make_params(0.8, 0.5);
    const GridSpec grid = default_grid(samples, 150);
    const GridMinimum gm = grid_minimize_tube(samples, p, grid);
    Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        int i = static_cast<int>(rng.uniform(0.0, grid.steps + 1.0));
        int j = static_cast<int>(rng.uniform(0.0, grid.steps + 1.0));
        if (i > j) std::swap(i, j);
        const double loss =
            mean_tube_loss(samples, grid.value(i), grid.value(j), p);
        CHECK(gm.loss <= loss + 1e-12);
    }
}

TEST_CASE("grid refinement never worsens the minimum and improves it boundedly") {
    const std::vector<double> samples = normal_samples(500, 33);
    const TubeParams p = make_params(0.8, 0.5);
    // 400 is a multiple of 50, so every coarse node is also a fine node
    const GridSpec coarse = default_grid(samples, 50);
    const GridSpec fine = default_grid(samples, 400);
    const GridMinimum c = grid_minimize_tube(samples, p, coarse);
    const GridMinimum f = grid_minimize_tube(samples, p, fine);
    CHECK(f.loss <= c.loss + 1e-12);
    // each bound sits at most one coarse cell from the fine optimum, and the
    // loss is Lipschitz in each bound with constant max(t, 1-t)
    const double cell = (coarse.hi - coarse.lo) / coarse.steps;
    CHECK(c.loss - f.loss <= 2.0 * std::max(p.t, 1.0 - p.t) * cell + 1e-12);
}

TEST_CASE("partition ratios approach the (1-t)/t limit as m grows") {
    const TubeParams p = make_params(0.8, 0.5);
    const double target = 0.25;

    const std::vector<double> small = normal_samples(500, 1);
    const LemmaRatios lr_small =
        lemma_ratios(small, p, default_grid(small, 400));
    CHECK(std::abs(lr_small.ratio_out_in - target) < 0.08);
    CHECK(lr_small.target == doctest::Approx(target));

    const std::vector<double> big = normal_samples(10000, 1);
    const LemmaRatios lr_big = lemma_ratios(big, p, default_grid(big, 400));
    CHECK(std::abs(lr_big.ratio_out_in - target) < 0.02);
    // per-side ratios follow the same limit at r = 0.5
    CHECK(std::abs(lr_big.ratio_12 - target) < 0.04);
    CHECK(std::abs(lr_big.ratio_43 - target) < 0.04);
    // counts decompose the sample
    CHECK(lr_big.counts.total() == 10000);
}

TEST_CASE("the oracle optimum covers near the requested rate") {
    const std::vector<double> samples = normal_samples(2000, 8);
    const TubeParams p = make_params(0.8, 0.5);
    const GridMinimum gm =
        grid_minimize_tube(samples, p, default_grid(samples, 400));
    long covered = 0;
    for (double y : samples) {
        if (y >= gm.mu_lower && y <= gm.mu_upper) ++covered;
    }
    const double cov = static_cast<double>(covered) / samples.size();
    CHECK(cov > 0.75);
    CHECK(cov < 0.85);
}

TEST_CASE("an even split gives symmetric tails") {
    const std::vector<double> samples = normal_samples(4000, 14);
    const TubeParams p = make_params(0.5, 0.5);
    const LemmaRatios lr = lemma_ratios(samples, p, default_grid(samples, 300));
    CHECK(std::abs(lr.ratio_out_in - 1.0) < 0.1);
}

TEST_CASE("invalid grids and inputs are rejected") {
    CHECK_THROWS_AS((GridSpec{1.0, 0.0, 10}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{0.0, 1.0, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(default_grid({}, 10), std::invalid_argument);

    const TubeParams p = make_params(0.8, 0.5);
    CHECK_THROWS_AS(grid_minimize_tube({1.0}, p, GridSpec{0.0, 2.0, 10}),
                    std::invalid_argument);
    // the grid must cover the whole sample range
    CHECK_THROWS_AS(
        grid_minimize_tube({0.0, 5.0}, p, GridSpec{0.0, 2.0, 10}),
        std::invalid_argument);
    CHECK_THROWS_AS(mean_tube_loss({}, 0.0, 1.0, p), std::invalid_argument);
}
