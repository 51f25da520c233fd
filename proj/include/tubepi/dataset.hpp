#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace tubepi {

enum class GeneratorKind {
    DATASET_A,    // sinc(x) + Gaussian noise, x ~ U(0,1)
    DATASET_B,    // sinc(x) + chi^2(3) noise, x ~ U(0,1)
    SINC_UNIFORM, // sinc(x) + U(-1,1), x ~ U(-2pi, 2pi)
    HETERO_SIN,   // 0.3 sin(pi x) + N(0, x^4), x ~ U(-2, 2)
    EXTERNAL,     // loaded from CSV; no true-quantile access
};

std::string generator_name(GeneratorKind kind);
GeneratorKind generator_from_name(const std::string& name);

struct DataMeta {
    GeneratorKind kind = GeneratorKind::EXTERNAL;
    std::uint64_t seed = 0;
    double noise_variance = 0.8; // dataset A only
};

struct Dataset {
    Eigen::MatrixXd features; // m x n
    Eigen::VectorXd targets;  // m
    DataMeta meta;

    Eigen::Index rows() const { return targets.size(); }
    Eigen::Index dim() const { return features.cols(); }
};

} // namespace tubepi
