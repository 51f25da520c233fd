#include "tubepi/kernel_machine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tubepi/errors.hpp"
#include "tubepi/metrics.hpp"

namespace tubepi {

void KernelSpec::validate() const {
    if (kind == KernelKind::RBF && !(gamma > 0.0)) {
        throw std::invalid_argument("KernelSpec: RBF needs gamma > 0");
    }
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x1,
                   const Eigen::VectorXd& x2) {
    if (x1.size() != x2.size()) {
        throw std::invalid_argument("kernel_eval: dimension mismatch");
    }
    spec.validate();
    if (spec.kind == KernelKind::LINEAR) {
        return x1.dot(x2);
    }
    return std::exp(-spec.gamma * (x1 - x2).squaredNorm());
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                     const Eigen::MatrixXd& Z) {
    if (X.cols() != Z.cols()) {
        throw std::invalid_argument("gram: dimension mismatch");
    }
    spec.validate();
    if (spec.kind == KernelKind::LINEAR) {
        return X * Z.transpose();
    }
    // ||x - z||^2 = ||x||^2 + ||z||^2 - 2 x.z, assembled without a pair loop
    const Eigen::VectorXd xn = X.rowwise().squaredNorm();
    const Eigen::VectorXd zn = Z.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * X * Z.transpose());
    d2.colwise() += xn;
    d2.rowwise() += zn.transpose();
    return (-spec.gamma * d2.cwiseMax(0.0)).array().exp();
}

void GDConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("GDConfig: learning_rate must be > 0");
    }
    if (max_iters < 1) {
        throw std::invalid_argument("GDConfig: max_iters must be >= 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("GDConfig: tol must be > 0");
    }
    if (width_penalty_warmup < 0 || width_penalty_warmup >= max_iters) {
        throw std::invalid_argument(
            "GDConfig: width_penalty_warmup must sit inside [0, max_iters)");
    }
}

std::pair<double, double> PIKernelModel::predict_point(
    const Eigen::VectorXd& x) const {
    if (x.size() != anchors.cols()) {
        throw std::invalid_argument("predict_point: dimension mismatch");
    }
    Eigen::MatrixXd row(1, x.size());
    row.row(0) = x.transpose();
    const Eigen::MatrixXd k = gram(kernel, row, anchors);
    const double upper = (k * alpha)(0) + b1;
    const double lower = (k * beta)(0) + b2;
    return {lower, upper};
}

void predict(const PIKernelModel& model, const Eigen::MatrixXd& X,
             Eigen::VectorXd& lowers, Eigen::VectorXd& uppers) {
    if (X.cols() != model.anchors.cols()) {
        throw std::invalid_argument("predict: dimension mismatch");
    }
    const Eigen::MatrixXd K = gram(model.kernel, X, model.anchors);
    uppers = K * model.alpha;
    uppers.array() += model.b1;
    lowers = K * model.beta;
    lowers.array() += model.b2;
}

namespace {

// Computes y1 = K x1 and y2 = K x2 in a single sweep over K. The training
// loop below always needs kernel products in independent pairs (both bound
// forward passes, then both coefficient gradients), and for realistic
// training sizes the gram matrix is far larger than cache, so streaming it
// once for two products instead of twice nearly halves the per-iteration
// memory traffic. Four columns per step amortize the output updates enough
// to keep the single sweep bandwidth-bound.
void fused_matvec2(const Eigen::MatrixXd& K, const Eigen::VectorXd& x1,
                   const Eigen::VectorXd& x2, Eigen::VectorXd& y1,
                   Eigen::VectorXd& y2) {
    const Eigen::Index rows = K.rows();
    const Eigen::Index cols = K.cols();
    y1.setZero(rows);
    y2.setZero(rows);
    double* __restrict out1 = y1.data();
    double* __restrict out2 = y2.data();
    Eigen::Index j = 0;
    for (; j + 3 < cols; j += 4) {
        const double* __restrict c0 = K.data() + j * rows;
        const double* __restrict c1 = c0 + rows;
        const double* __restrict c2 = c1 + rows;
        const double* __restrict c3 = c2 + rows;
        const double a0 = x1[j];
        const double a1 = x1[j + 1];
        const double a2 = x1[j + 2];
        const double a3 = x1[j + 3];
        const double b0 = x2[j];
        const double b1 = x2[j + 1];
        const double b2 = x2[j + 2];
        const double b3 = x2[j + 3];
        for (Eigen::Index i = 0; i < rows; ++i) {
            out1[i] += (c0[i] * a0 + c1[i] * a1) + (c2[i] * a2 + c3[i] * a3);
            out2[i] += (c0[i] * b0 + c1[i] * b1) + (c2[i] * b2 + c3[i] * b3);
        }
    }
    for (; j < cols; ++j) {
        const double* __restrict c0 = K.data() + j * rows;
        const double a0 = x1[j];
        const double b0 = x2[j];
        for (Eigen::Index i = 0; i < rows; ++i) {
            out1[i] += c0[i] * a0;
            out2[i] += c0[i] * b0;
        }
    }
}

struct SampleCoefs {
    // Coefficients that multiply the kernel rows in the subgradient: ca for
    // the alpha/b1 side, cb for the beta/b2 side, after any crossed-sample
    // swap has been routed back to the owning parameters.
    Eigen::VectorXd ca;
    Eigen::VectorXd cb;
    long crossed = 0;
    double tube_sum = 0.0;
};

SampleCoefs tube_coefficients(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& upper_raw,
                              const Eigen::VectorXd& lower_raw,
                              const TubeParams& params) {
    const Eigen::Index m = y.size();
    SampleCoefs out;
    out.ca.setZero(m);
    out.cb.setZero(m);
    const double t = params.t;
    const double r = params.r;
    for (Eigen::Index i = 0; i < m; ++i) {
        const bool crossed = upper_raw[i] < lower_raw[i];
        const double u = crossed ? lower_raw[i] : upper_raw[i];
        const double l = crossed ? upper_raw[i] : lower_raw[i];
        if (crossed) {
            ++out.crossed;
        }
        const double rline = r * u + (1.0 - r) * l;
        // Same branch layout as tube_loss_grad, with ties resolved toward
        // the inside branches.
        double cu = 0.0; // coefficient on the larger bound value
        double cl = 0.0; // coefficient on the smaller bound value
        if (y[i] > u) {
            cu = -t;
            out.tube_sum += t * (y[i] - u);
        } else if (y[i] < l) {
            cl = t;
            out.tube_sum += t * (l - y[i]);
        } else if (y[i] >= rline) {
            cu = 1.0 - t;
            out.tube_sum += (1.0 - t) * (u - y[i]);
        } else {
            cl = -(1.0 - t);
            out.tube_sum += (1.0 - t) * (y[i] - l);
        }
        // The larger value belongs to beta/b2 when crossed.
        out.ca[i] = crossed ? cl : cu;
        out.cb[i] = crossed ? cu : cl;
    }
    return out;
}

} // namespace

double objective(const PIKernelModel& model, const Dataset& data) {
    if (data.features.rows() != model.anchors.rows() ||
        data.features.cols() != model.anchors.cols()) {
        throw std::invalid_argument("objective: anchor shape mismatch");
    }
    Eigen::VectorXd lowers;
    Eigen::VectorXd uppers;
    predict(model, data.features, lowers, uppers);
    const SampleCoefs sc =
        tube_coefficients(data.targets, uppers, lowers, model.params);
    const double ridge = 0.5 * model.params.lambda *
                         (model.alpha.squaredNorm() + model.beta.squaredNorm());
    const double width =
        model.params.delta * (uppers - lowers).cwiseAbs().sum();
    return ridge + sc.tube_sum + width;
}

ObjectiveGradient objective_gradient(const PIKernelModel& model,
                                     const Dataset& data) {
    if (data.features.rows() != model.anchors.rows() ||
        data.features.cols() != model.anchors.cols()) {
        throw std::invalid_argument("objective_gradient: anchor shape mismatch");
    }
    Eigen::VectorXd lowers;
    Eigen::VectorXd uppers;
    predict(model, data.features, lowers, uppers);
    SampleCoefs sc =
        tube_coefficients(data.targets, uppers, lowers, model.params);
    if (model.params.delta > 0.0) {
        const Eigen::VectorXd sign_w = (uppers - lowers).unaryExpr([](double w) {
            return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
        });
        sc.ca += model.params.delta * sign_w;
        sc.cb -= model.params.delta * sign_w;
    }
    const Eigen::MatrixXd K =
        gram(model.kernel, data.features, model.anchors);
    ObjectiveGradient g;
    g.g_alpha = K.transpose() * sc.ca + model.params.lambda * model.alpha;
    g.g_beta = K.transpose() * sc.cb + model.params.lambda * model.beta;
    g.g_b1 = sc.ca.sum();
    g.g_b2 = sc.cb.sum();
    return g;
}

PIKernelModel train(const Dataset& data, const TubeParams& params,
                    const KernelSpec& kernel, const GDConfig& cfg) {
    params.validate();
    kernel.validate();
    cfg.validate();
    const Eigen::Index m = data.rows();
    if (m < 2) {
        throw std::invalid_argument("train: need >= 2 samples");
    }
    if (!data.features.allFinite() || !data.targets.allFinite()) {
        throw std::invalid_argument("train: non-finite inputs");
    }

    PIKernelModel model;
    model.anchors = data.features;
    model.kernel = kernel;
    model.params = params;
    model.trained_seed = cfg.seed;
    model.alpha.setZero(m);
    model.beta.setZero(m);
    model.b1 = empirical_quantile(data.targets, (1.0 + params.t) / 2.0);
    model.b2 = empirical_quantile(data.targets, (1.0 - params.t) / 2.0);

    const Eigen::MatrixXd K = gram(kernel, data.features, data.features);
    const Eigen::VectorXd& y = data.targets;

    if (cfg.record_objective) {
        model.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iters));
    }

    Eigen::VectorXd upper(m), lower(m), sign_w(m);
    Eigen::VectorXd g_alpha(m), g_beta(m);
    for (long k = 1; k <= cfg.max_iters; ++k) {
        fused_matvec2(K, model.alpha, model.beta, upper, lower);
        upper.array() += model.b1;
        lower.array() += model.b2;

        SampleCoefs sc = tube_coefficients(y, upper, lower, params);
        model.instability += sc.crossed;

        if (cfg.record_objective) {
            const double ridge =
                0.5 * params.lambda *
                (model.alpha.squaredNorm() + model.beta.squaredNorm());
            const double width =
                params.delta * (upper - lower).cwiseAbs().sum();
            model.objective_trace.push_back(ridge + sc.tube_sum + width);
        }

        const bool width_on = params.delta > 0.0 &&
                              k > cfg.width_penalty_warmup &&
                              (upper - lower).mean() > 0.0;
        if (width_on) {
            sign_w = (upper - lower).unaryExpr(
                [](double w) { return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0); });
            sc.ca += params.delta * sign_w;
            sc.cb -= params.delta * sign_w;
        }

        fused_matvec2(K, sc.ca, sc.cb, g_alpha, g_beta);
        g_alpha += params.lambda * model.alpha;
        g_beta += params.lambda * model.beta;
        const double g_b1 = sc.ca.sum();
        const double g_b2 = sc.cb.sum();

        const double eta = cfg.lr_schedule == LrSchedule::CONSTANT
                               ? cfg.learning_rate
                               : cfg.learning_rate / std::sqrt(
                                     static_cast<double>(k));

        model.alpha -= eta * g_alpha;
        model.beta -= eta * g_beta;
        model.b1 -= eta * g_b1;
        model.b2 -= eta * g_b2;
        model.iters_run = k;

        if (!model.alpha.allFinite() || !model.beta.allFinite() ||
            !std::isfinite(model.b1) || !std::isfinite(model.b2)) {
            throw DivergenceError(
                "train: non-finite parameters at iteration " +
                std::to_string(k) + "; lower the learning rate");
        }

        const double update_norm =
            eta * std::sqrt(g_alpha.squaredNorm() + g_beta.squaredNorm() +
                            g_b1 * g_b1 + g_b2 * g_b2);
        model.final_update_norm = update_norm;
        if (update_norm < cfg.tol) {
            break;
        }
    }
    model.final_objective = objective(model, data);
    return model;
}

QuantileKernelModel train_quantile(const Dataset& data, double q,
                                   const KernelSpec& kernel, double lambda,
                                   const GDConfig& cfg) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("train_quantile: q must be in (0, 1)");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("train_quantile: lambda must be >= 0");
    }
    kernel.validate();
    cfg.validate();
    const Eigen::Index m = data.rows();
    if (m < 2) {
        throw std::invalid_argument("train_quantile: need >= 2 samples");
    }

    QuantileKernelModel model;
    model.anchors = data.features;
    model.kernel = kernel;
    model.q = q;
    model.lambda = lambda;
    model.alpha.setZero(m);
    model.b = empirical_quantile(data.targets, q);

    const Eigen::MatrixXd K = gram(kernel, data.features, data.features);
    const Eigen::VectorXd& y = data.targets;
    const double inv_m = 1.0 / static_cast<double>(m);

    Eigen::VectorXd f(m), g(m);
    for (long k = 1; k <= cfg.max_iters; ++k) {
        f.noalias() = K * model.alpha;
        f.array() += model.b;
        for (Eigen::Index i = 0; i < m; ++i) {
            g[i] = pinball_grad(y[i] - f[i], q);
        }
        // d pinball(y - f) / d f = -pinball_grad, averaged over the batch
        const Eigen::VectorXd g_alpha =
            lambda * model.alpha - inv_m * (K * g);
        const double g_b = -inv_m * g.sum();

        const double eta = cfg.lr_schedule == LrSchedule::CONSTANT
                               ? cfg.learning_rate
                               : cfg.learning_rate / std::sqrt(
                                     static_cast<double>(k));
        model.alpha -= eta * g_alpha;
        model.b -= eta * g_b;
        model.iters_run = k;

        if (!model.alpha.allFinite() || !std::isfinite(model.b)) {
            throw DivergenceError(
                "train_quantile: non-finite parameters at iteration " +
                std::to_string(k));
        }
        const double update_norm =
            eta * std::sqrt(g_alpha.squaredNorm() + g_b * g_b);
        model.final_update_norm = update_norm;
        if (update_norm < cfg.tol) {
            break;
        }
    }
    return model;
}

Eigen::VectorXd predict_quantile(const QuantileKernelModel& model,
                                 const Eigen::MatrixXd& X) {
    if (X.cols() != model.anchors.cols()) {
        throw std::invalid_argument("predict_quantile: dimension mismatch");
    }
    Eigen::VectorXd f = gram(model.kernel, X, model.anchors) * model.alpha;
    f.array() += model.b;
    return f;
}

} // namespace tubepi
