#include "tubepi/datagen.hpp"

#include <cmath>
#include <stdexcept>

namespace tubepi {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

} // namespace

double sinc(double x) {
    if (x == 0.0) {
        return 1.0;
    }
    return std::sin(x) / x;
}

// Wichura's AS241 rational approximations for the normal inverse CDF.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return q < 0.0 ? -value : value;
}

// For k = 3 degrees of freedom the chi-squared CDF reduces to
// erf(sqrt(x/2)) - sqrt(2x/pi) exp(-x/2).
double chi2_3_cdf(double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    return std::erf(std::sqrt(0.5 * x)) -
           std::sqrt(2.0 * x / kPi) * std::exp(-0.5 * x);
}

double chi2_3_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("chi2_3_quantile: p must be in (0, 1)");
    }
    double lo = 0.0;
    double hi = 1.0;
    while (chi2_3_cdf(hi) < p) {
        hi *= 2.0;
        if (hi > 1e6) {
            throw std::runtime_error("chi2_3_quantile: bracket failed");
        }
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_3_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-14 * (1.0 + hi)) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

Dataset gen_dataset_a(Eigen::Index m, std::uint64_t seed,
                      double noise_variance) {
    if (m <= 0) {
        throw std::invalid_argument("gen_dataset_a: m must be positive");
    }
    if (noise_variance < 0.0) {
        throw std::invalid_argument("gen_dataset_a: variance must be >= 0");
    }
    Rng rng(seed);
    Dataset data;
    data.features.resize(m, 1);
    data.targets.resize(m);
    const double stddev = std::sqrt(noise_variance);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = rng.uniform();
        data.features(i, 0) = x;
        data.targets(i) = sinc(x) + rng.normal(0.0, stddev);
    }
    data.meta = {GeneratorKind::DATASET_A, seed, noise_variance};
    return data;
}

Dataset gen_dataset_b(Eigen::Index m, std::uint64_t seed) {
    if (m <= 0) {
        throw std::invalid_argument("gen_dataset_b: m must be positive");
    }
    Rng rng(seed);
    Dataset data;
    data.features.resize(m, 1);
    data.targets.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = rng.uniform();
        data.features(i, 0) = x;
        data.targets(i) = sinc(x) + rng.chi2_3();
    }
    data.meta = {GeneratorKind::DATASET_B, seed, 0.0};
    return data;
}

Dataset gen_sinc_uniform(Eigen::Index m, std::uint64_t seed) {
    if (m <= 0) {
        throw std::invalid_argument("gen_sinc_uniform: m must be positive");
    }
    Rng rng(seed);
    Dataset data;
    data.features.resize(m, 1);
    data.targets.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = rng.uniform(-2.0 * kPi, 2.0 * kPi);
        data.features(i, 0) = x;
        data.targets(i) = sinc(x) + rng.uniform(-1.0, 1.0);
    }
    data.meta = {GeneratorKind::SINC_UNIFORM, seed, 0.0};
    return data;
}

Dataset gen_hetero_sin(Eigen::Index m, std::uint64_t seed) {
    if (m <= 0) {
        throw std::invalid_argument("gen_hetero_sin: m must be positive");
    }
    Rng rng(seed);
    Dataset data;
    data.features.resize(m, 1);
    data.targets.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = rng.uniform(-2.0, 2.0);
        data.features(i, 0) = x;
        data.targets(i) = 0.3 * std::sin(kPi * x) + rng.normal(0.0, x * x);
    }
    data.meta = {GeneratorKind::HETERO_SIN, seed, 0.0};
    return data;
}

Dataset gen_dataset(GeneratorKind kind, Eigen::Index m, std::uint64_t seed,
                    double noise_variance) {
    switch (kind) {
    case GeneratorKind::DATASET_A:
        return gen_dataset_a(m, seed, noise_variance);
    case GeneratorKind::DATASET_B:
        return gen_dataset_b(m, seed);
    case GeneratorKind::SINC_UNIFORM:
        return gen_sinc_uniform(m, seed);
    case GeneratorKind::HETERO_SIN:
        return gen_hetero_sin(m, seed);
    case GeneratorKind::EXTERNAL:
        break;
    }
    throw std::invalid_argument("gen_dataset: kind has no generator");
}

std::string generator_name(GeneratorKind kind) {
    switch (kind) {
    case GeneratorKind::DATASET_A:
        return "dataset_a";
    case GeneratorKind::DATASET_B:
        return "dataset_b";
    case GeneratorKind::SINC_UNIFORM:
        return "sinc_uniform";
    case GeneratorKind::HETERO_SIN:
        return "hetero_sin";
    case GeneratorKind::EXTERNAL:
        return "external";
    }
    throw std::invalid_argument("generator_name: unknown kind");
}

GeneratorKind generator_from_name(const std::string& name) {
    if (name == "dataset_a") return GeneratorKind::DATASET_A;
    if (name == "dataset_b") return GeneratorKind::DATASET_B;
    if (name == "sinc_uniform") return GeneratorKind::SINC_UNIFORM;
    if (name == "hetero_sin") return GeneratorKind::HETERO_SIN;
    if (name == "external") return GeneratorKind::EXTERNAL;
    throw std::invalid_argument("generator_from_name: unknown name '" + name +
                                "'");
}

std::pair<double, double> true_pi(GeneratorKind kind, double x, double t,
                                  double r, double noise_variance) {
    if (!(t > 0.0 && t < 1.0)) {
        throw std::invalid_argument("true_pi: t must be in (0, 1)");
    }
    if (!(r >= 0.0 && r <= 1.0)) {
        throw std::invalid_argument("true_pi: r must be in [0, 1]");
    }
    const double q = (1.0 - t) * (1.0 - r);
    // Clamp away from the open-interval endpoints so r in {0, 1} maps to
    // the extreme representable quantiles instead of throwing.
    const double q_lo = std::min(std::max(q, 1e-12), 1.0 - 1e-12);
    const double q_hi = std::min(std::max(q + t, 1e-12), 1.0 - 1e-12);
    switch (kind) {
    case GeneratorKind::DATASET_A: {
        const double mid = sinc(x);
        const double s = std::sqrt(noise_variance);
        return {mid + s * normal_quantile(q_lo), mid + s * normal_quantile(q_hi)};
    }
    case GeneratorKind::DATASET_B: {
        const double mid = sinc(x);
        return {mid + chi2_3_quantile(q_lo), mid + chi2_3_quantile(q_hi)};
    }
    case GeneratorKind::SINC_UNIFORM: {
        const double mid = sinc(x);
        return {mid + (2.0 * q_lo - 1.0), mid + (2.0 * q_hi - 1.0)};
    }
    case GeneratorKind::HETERO_SIN: {
        const double mid = 0.3 * std::sin(kPi * x);
        const double s = x * x;
        return {mid + s * normal_quantile(q_lo), mid + s * normal_quantile(q_hi)};
    }
    case GeneratorKind::EXTERNAL:
        break;
    }
    throw std::invalid_argument("true_pi: no conditional law for this kind");
}

void true_pi_bounds(const Dataset& data, double t, double r,
                    Eigen::VectorXd& lowers, Eigen::VectorXd& uppers) {
    const Eigen::Index m = data.rows();
    lowers.resize(m);
    uppers.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto [lo, hi] = true_pi(data.meta.kind, data.features(i, 0), t, r,
                                      data.meta.noise_variance);
        lowers(i) = lo;
        uppers(i) = hi;
    }
}

} // namespace tubepi
