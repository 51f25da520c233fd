#include "tubepi/rng.hpp"

#include <cmath>
#include <numbers>

namespace tubepi {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) {
    // splitmix64 expansion is the seeding procedure recommended by the
    // xoshiro authors; it also makes seed 0 usable.
    for (auto& w : s_) w = splitmix64(seed);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1-uniform() lies in (0,1], keeping the log argument nonzero
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

double Rng::chi2_3() {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double z = normal();
        s += z * z;
    }
    return s;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = next_u64() % i;
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

} // namespace tubepi
