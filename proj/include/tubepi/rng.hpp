#pragma once

#include <cstdint>
#include <vector>

namespace tubepi {

// xoshiro256++ with splitmix64 seeding. Chosen over std::mt19937 +
// std::*_distribution because the standard distributions are
// implementation-defined: the same seed must give the same data on every
// platform this runs on. All sampling helpers below are hand-rolled on top
// of the raw 64-bit stream for the same reason.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform on [0,1): 53 mantissa bits of the next word
    double uniform();
    double uniform(double lo, double hi);

    // standard normal via Box-Muller; pairs are generated together and the
    // spare is cached, so draw order is part of the stream contract
    double normal();
    double normal(double mean, double stddev);

    // chi-squared with 3 degrees of freedom: sum of three squared normals
    double chi2_3();

    // Fisher-Yates over 0..n-1
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tubepi
