#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tubepi/dataset.hpp"
#include "tubepi/loss.hpp"

namespace tubepi {

enum class Activation { RELU };

struct NetConfig {
    Eigen::Index input_dim = 1;
    Eigen::Index hidden_units = 100;
    Activation activation = Activation::RELU;
    double init_scale = 0.3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Eigen::Index batch_size = 100;
    long epochs = 600;
    std::uint64_t seed = 0; // shuffle stream

    void validate() const;
};

// One hidden ReLU layer, two linear output heads: head 0 = lower bound,
// head 1 = upper bound.
struct DenseNet {
    Eigen::MatrixXd W1; // hidden x input
    Eigen::VectorXd c1; // hidden
    Eigen::MatrixXd W2; // 2 x hidden
    Eigen::VectorXd c2; // 2
    NetConfig config;
};

enum class NetLossKind { TUBE, PINBALL_PAIR, QD };

struct NetLossSpec {
    NetLossKind kind = NetLossKind::TUBE;
    // TUBE reads t, r, delta; QD reads t. The net loss is mean-normalized,
    // so delta multiplies the mean width here.
    TubeParams params;
    // PINBALL_PAIR: head 0 tracks q_low, head 1 tracks q_high.
    double q_low = 0.05;
    double q_high = 0.95;
    // QD knobs.
    double lambda_qd = 0.1;
    double soften_s = 200.0;

    void validate() const;
    // Empirical-quantile levels used to seed the two output biases.
    std::pair<double, double> bias_levels() const;
};

// Weights drawn uniform(-init_scale, init_scale) * sqrt(1 / fan_in); hidden
// biases zero; output biases set to the given starting bounds.
DenseNet mlp_init(const NetConfig& cfg, double bias_lower, double bias_upper);

std::pair<double, double> mlp_forward(const DenseNet& net,
                                      const Eigen::VectorXd& x);

void mlp_forward_batch(const DenseNet& net, const Eigen::MatrixXd& X,
                       Eigen::VectorXd& lowers, Eigen::VectorXd& uppers);

struct NetGrads {
    Eigen::MatrixXd gW1;
    Eigen::VectorXd gc1;
    Eigen::MatrixXd gW2;
    Eigen::VectorXd gc2;
};

// Loss and full parameter gradient on one batch; shared by the trainer and
// by finite-difference checks.
double net_loss_and_grad(const DenseNet& net, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, const NetLossSpec& spec,
                         NetGrads& grads);

// Batch value of the configured loss (no gradient), for diagnostics.
double net_loss(const DenseNet& net, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& y, const NetLossSpec& spec);

// Mini-batch Adam over shuffled epochs. Output biases start at the
// empirical bias_levels() quantiles of the training targets.
DenseNet mlp_train(const Dataset& data, const NetLossSpec& spec,
                   const NetConfig& net_cfg, const AdamConfig& opt);

// Independent seeds, bounds averaged across members.
std::vector<DenseNet> train_ensemble(const Dataset& data,
                                     const NetLossSpec& spec,
                                     const NetConfig& net_cfg,
                                     const AdamConfig& opt, int members);

void predict_ensemble(const std::vector<DenseNet>& nets,
                      const Eigen::MatrixXd& X, Eigen::VectorXd& lowers,
                      Eigen::VectorXd& uppers);

} // namespace tubepi
