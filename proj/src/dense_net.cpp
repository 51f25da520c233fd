#include "tubepi/dense_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tubepi/errors.hpp"
#include "tubepi/metrics.hpp"
#include "tubepi/rng.hpp"

namespace tubepi {

void NetConfig::validate() const {
    if (input_dim < 1) {
        throw std::invalid_argument("NetConfig: input_dim must be >= 1");
    }
    if (hidden_units < 1) {
        throw std::invalid_argument("NetConfig: hidden_units must be >= 1");
    }
    if (init_scale < 0.0) {
        throw std::invalid_argument("NetConfig: init_scale must be >= 0");
    }
}

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("AdamConfig: learning_rate must be > 0");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("AdamConfig: betas must lie in (0, 1)");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("AdamConfig: eps must be > 0");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("AdamConfig: batch_size must be >= 1");
    }
    if (epochs < 1) {
        throw std::invalid_argument("AdamConfig: epochs must be >= 1");
    }
}

void NetLossSpec::validate() const {
    switch (kind) {
    case NetLossKind::TUBE:
        params.validate();
        break;
    case NetLossKind::PINBALL_PAIR:
        if (!(q_low > 0.0 && q_low < q_high && q_high < 1.0)) {
            throw std::invalid_argument(
                "NetLossSpec: need 0 < q_low < q_high < 1");
        }
        break;
    case NetLossKind::QD:
        if (!(params.t > 0.0 && params.t < 1.0)) {
            throw std::invalid_argument("NetLossSpec: QD needs t in (0, 1)");
        }
        if (!(soften_s > 0.0) || lambda_qd < 0.0) {
            throw std::invalid_argument("NetLossSpec: bad QD knobs");
        }
        break;
    }
}

std::pair<double, double> NetLossSpec::bias_levels() const {
    if (kind == NetLossKind::PINBALL_PAIR) {
        return {q_low, q_high};
    }
    return {(1.0 - params.t) / 2.0, (1.0 + params.t) / 2.0};
}

DenseNet mlp_init(const NetConfig& cfg, double bias_lower, double bias_upper) {
    cfg.validate();
    Rng rng(cfg.seed);
    DenseNet net;
    net.config = cfg;
    const double s1 =
        cfg.init_scale * std::sqrt(1.0 / static_cast<double>(cfg.input_dim));
    const double s2 = cfg.init_scale *
                      std::sqrt(1.0 / static_cast<double>(cfg.hidden_units));
    net.W1.resize(cfg.hidden_units, cfg.input_dim);
    for (Eigen::Index i = 0; i < net.W1.rows(); ++i) {
        for (Eigen::Index j = 0; j < net.W1.cols(); ++j) {
            net.W1(i, j) = rng.uniform(-s1, s1);
        }
    }
    net.c1.setZero(cfg.hidden_units);
    net.W2.resize(2, cfg.hidden_units);
    for (Eigen::Index i = 0; i < net.W2.rows(); ++i) {
        for (Eigen::Index j = 0; j < net.W2.cols(); ++j) {
            net.W2(i, j) = rng.uniform(-s2, s2);
        }
    }
    net.c2.resize(2);
    net.c2 << bias_lower, bias_upper;
    return net;
}

namespace {

// Pre-activations, activations, and both heads for a batch.
struct ForwardCache {
    Eigen::MatrixXd Z; // batch x hidden
    Eigen::MatrixXd H; // batch x hidden
    Eigen::MatrixXd O; // batch x 2 (lower, upper)
};

ForwardCache forward_cache(const DenseNet& net, const Eigen::MatrixXd& X) {
    if (X.cols() != net.W1.cols()) {
        throw std::invalid_argument("mlp_forward: dimension mismatch");
    }
    ForwardCache fc;
    fc.Z = X * net.W1.transpose();
    fc.Z.rowwise() += net.c1.transpose();
    fc.H = fc.Z.cwiseMax(0.0);
    fc.O = fc.H * net.W2.transpose();
    fc.O.rowwise() += net.c2.transpose();
    return fc;
}

// Fills dO with per-sample derivatives of the batch loss w.r.t. (lower,
// upper) and returns the batch loss value.
double head_gradients(const Eigen::VectorXd& y, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& up, const NetLossSpec& spec,
                      Eigen::MatrixXd& dO) {
    const Eigen::Index B = y.size();
    dO.setZero(B, 2);
    const double inv_b = 1.0 / static_cast<double>(B);

    switch (spec.kind) {
    case NetLossKind::TUBE: {
        double sum = 0.0;
        double width_sum = 0.0;
        const double delta = spec.params.delta;
        for (Eigen::Index i = 0; i < B; ++i) {
            const bool crossed = up[i] < lo[i];
            const double u = crossed ? lo[i] : up[i];
            const double l = crossed ? up[i] : lo[i];
            sum += tube_loss(y[i], l, u, spec.params);
            const BoundGradient g = tube_loss_grad(y[i], l, u, spec.params);
            // Route the swapped-sample gradient back to the owning head.
            dO(i, 0) = (crossed ? g.d_upper : g.d_lower) * inv_b;
            dO(i, 1) = (crossed ? g.d_lower : g.d_upper) * inv_b;
            if (delta > 0.0) {
                const double w = up[i] - lo[i];
                width_sum += std::abs(w);
                const double s = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
                dO(i, 0) -= delta * s * inv_b;
                dO(i, 1) += delta * s * inv_b;
            }
        }
        return sum * inv_b + delta * width_sum * inv_b;
    }
    case NetLossKind::PINBALL_PAIR: {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < B; ++i) {
            const double u_lo = y[i] - lo[i];
            const double u_hi = y[i] - up[i];
            sum += pinball_loss(u_lo, spec.q_low) +
                   pinball_loss(u_hi, spec.q_high);
            dO(i, 0) = -pinball_grad(u_lo, spec.q_low) * inv_b;
            dO(i, 1) = -pinball_grad(u_hi, spec.q_high) * inv_b;
        }
        return sum * inv_b;
    }
    case NetLossKind::QD: {
        const double t = spec.params.t;
        const double s = spec.soften_s;
        Eigen::VectorXd ka(B), kb(B), k(B);
        for (Eigen::Index i = 0; i < B; ++i) {
            ka[i] = sigmoid(s * (y[i] - lo[i]));
            kb[i] = sigmoid(s * (up[i] - y[i]));
            k[i] = ka[i] * kb[i];
        }
        const double S = k.sum();
        const double W = ((up - lo).cwiseProduct(k)).sum();
        const double picp_soft = S * inv_b;
        const double mpiw_capt = S > 1e-12 ? W / S : 0.0;
        const double pen_scale =
            spec.lambda_qd * static_cast<double>(B) / (t * (1.0 - t));
        const double pen_base = std::max(0.0, t - picp_soft);
        const double loss = mpiw_capt + pen_scale * pen_base * pen_base;

        for (Eigen::Index i = 0; i < B; ++i) {
            const double dk_dlo = -s * ka[i] * (1.0 - ka[i]) * kb[i];
            const double dk_dup = s * ka[i] * kb[i] * (1.0 - kb[i]);
            double dm_dlo = 0.0;
            double dm_dup = 0.0;
            if (S > 1e-12) {
                const double w = up[i] - lo[i];
                const double dW_dlo = -k[i] + w * dk_dlo;
                const double dW_dup = k[i] + w * dk_dup;
                dm_dlo = (dW_dlo * S - W * dk_dlo) / (S * S);
                dm_dup = (dW_dup * S - W * dk_dup) / (S * S);
            }
            const double dpen = pen_scale * 2.0 * pen_base * (-inv_b);
            dO(i, 0) = dm_dlo + dpen * dk_dlo;
            dO(i, 1) = dm_dup + dpen * dk_dup;
        }
        return loss;
    }
    }
    throw std::logic_error("head_gradients: unreachable");
}

} // namespace

std::pair<double, double> mlp_forward(const DenseNet& net,
                                      const Eigen::VectorXd& x) {
    const ForwardCache fc = forward_cache(net, x.transpose());
    return {fc.O(0, 0), fc.O(0, 1)};
}

void mlp_forward_batch(const DenseNet& net, const Eigen::MatrixXd& X,
                       Eigen::VectorXd& lowers, Eigen::VectorXd& uppers) {
    const ForwardCache fc = forward_cache(net, X);
    lowers = fc.O.col(0);
    uppers = fc.O.col(1);
}

double net_loss_and_grad(const DenseNet& net, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, const NetLossSpec& spec,
                         NetGrads& grads) {
    spec.validate();
    if (X.rows() != y.size()) {
        throw std::invalid_argument("net_loss_and_grad: length mismatch");
    }
    const ForwardCache fc = forward_cache(net, X);
    Eigen::MatrixXd dO;
    const double loss =
        head_gradients(y, fc.O.col(0), fc.O.col(1), spec, dO);

    grads.gW2 = dO.transpose() * fc.H;
    grads.gc2 = dO.colwise().sum().transpose();
    Eigen::MatrixXd dZ = (dO * net.W2).cwiseProduct(
        (fc.Z.array() > 0.0).cast<double>().matrix());
    grads.gW1 = dZ.transpose() * X;
    grads.gc1 = dZ.colwise().sum().transpose();
    return loss;
}

double net_loss(const DenseNet& net, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& y, const NetLossSpec& spec) {
    NetGrads scratch;
    return net_loss_and_grad(net, X, y, spec, scratch);
}

namespace {

struct AdamState {
    Eigen::MatrixXd mW1, vW1, mW2, vW2;
    Eigen::VectorXd mc1, vc1, mc2, vc2;
    long step = 0;

    explicit AdamState(const DenseNet& net) {
        mW1 = Eigen::MatrixXd::Zero(net.W1.rows(), net.W1.cols());
        vW1 = mW1;
        mW2 = Eigen::MatrixXd::Zero(net.W2.rows(), net.W2.cols());
        vW2 = mW2;
        mc1 = Eigen::VectorXd::Zero(net.c1.size());
        vc1 = mc1;
        mc2 = Eigen::VectorXd::Zero(net.c2.size());
        vc2 = mc2;
    }
};

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, const AdamConfig& opt,
                 long step) {
    m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
    v = opt.beta2 * v + (1.0 - opt.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
    param -= (opt.learning_rate * (m / bc1).array() /
              ((v / bc2).array().sqrt() + opt.eps))
                 .matrix();
}

} // namespace

DenseNet mlp_train(const Dataset& data, const NetLossSpec& spec,
                   const NetConfig& net_cfg, const AdamConfig& opt) {
    spec.validate();
    net_cfg.validate();
    opt.validate();
    const Eigen::Index n = data.rows();
    if (n < opt.batch_size) {
        throw std::invalid_argument("mlp_train: fewer samples than batch_size");
    }
    if (data.dim() != net_cfg.input_dim) {
        throw std::invalid_argument("mlp_train: input_dim mismatch");
    }

    const auto [lvl_lo, lvl_hi] = spec.bias_levels();
    DenseNet net = mlp_init(net_cfg, empirical_quantile(data.targets, lvl_lo),
                            empirical_quantile(data.targets, lvl_hi));
    AdamState state(net);
    Rng shuffle_rng(opt.seed);
    NetGrads grads;

    for (long epoch = 0; epoch < opt.epochs; ++epoch) {
        const std::vector<std::size_t> order =
            shuffle_rng.permutation(static_cast<std::size_t>(n));
        for (Eigen::Index start = 0; start < n; start += opt.batch_size) {
            const Eigen::Index bs = std::min(opt.batch_size, n - start);
            Eigen::MatrixXd Xb(bs, data.dim());
            Eigen::VectorXd yb(bs);
            for (Eigen::Index i = 0; i < bs; ++i) {
                const auto src = order[static_cast<std::size_t>(start + i)];
                Xb.row(i) = data.features.row(static_cast<Eigen::Index>(src));
                yb[i] = data.targets[static_cast<Eigen::Index>(src)];
            }
            const double loss = net_loss_and_grad(net, Xb, yb, spec, grads);
            if (!std::isfinite(loss)) {
                throw DivergenceError("mlp_train: non-finite loss at epoch " +
                                      std::to_string(epoch));
            }
            ++state.step;
            adam_update(net.W1, grads.gW1, state.mW1, state.vW1, opt,
                        state.step);
            adam_update(net.c1, grads.gc1, state.mc1, state.vc1, opt,
                        state.step);
            adam_update(net.W2, grads.gW2, state.mW2, state.vW2, opt,
                        state.step);
            adam_update(net.c2, grads.gc2, state.mc2, state.vc2, opt,
                        state.step);
        }
    }
    if (!net.W1.allFinite() || !net.W2.allFinite() || !net.c1.allFinite() ||
        !net.c2.allFinite()) {
        throw DivergenceError("mlp_train: non-finite parameters after training");
    }
    return net;
}

std::vector<DenseNet> train_ensemble(const Dataset& data,
                                     const NetLossSpec& spec,
                                     const NetConfig& net_cfg,
                                     const AdamConfig& opt, int members) {
    if (members < 1) {
        throw std::invalid_argument("train_ensemble: members must be >= 1");
    }
    std::vector<DenseNet> nets;
    nets.reserve(static_cast<std::size_t>(members));
    for (int i = 0; i < members; ++i) {
        NetConfig ncfg = net_cfg;
        AdamConfig ocfg = opt;
        ncfg.seed = net_cfg.seed + static_cast<std::uint64_t>(i);
        ocfg.seed = opt.seed + static_cast<std::uint64_t>(i);
        nets.push_back(mlp_train(data, spec, ncfg, ocfg));
    }
    return nets;
}

void predict_ensemble(const std::vector<DenseNet>& nets,
                      const Eigen::MatrixXd& X, Eigen::VectorXd& lowers,
                      Eigen::VectorXd& uppers) {
    if (nets.empty()) {
        throw std::invalid_argument("predict_ensemble: no members");
    }
    Eigen::VectorXd lo, up;
    lowers = Eigen::VectorXd::Zero(X.rows());
    uppers = Eigen::VectorXd::Zero(X.rows());
    for (const DenseNet& net : nets) {
        mlp_forward_batch(net, X, lo, up);
        lowers += lo;
        uppers += up;
    }
    lowers /= static_cast<double>(nets.size());
    uppers /= static_cast<double>(nets.size());
}

} // namespace tubepi
