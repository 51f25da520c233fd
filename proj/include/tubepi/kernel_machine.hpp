#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tubepi/dataset.hpp"
#include "tubepi/loss.hpp"

namespace tubepi {

enum class KernelKind { LINEAR, RBF };

struct KernelSpec {
    KernelKind kind = KernelKind::LINEAR;
    double gamma = 1.0; // RBF width, ignored by LINEAR

    void validate() const;
};

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x1,
                   const Eigen::VectorXd& x2);

// Pairwise kernel matrix between the rows of X and the rows of Z.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                     const Eigen::MatrixXd& Z);

enum class LrSchedule { CONSTANT, INV_SQRT };

struct GDConfig {
    double learning_rate = 1e-4;
    long max_iters = 10000;
    double tol = 1e-9; // stop once the applied update norm drops below this
    long width_penalty_warmup = 100; // iterations before the width term engages
    std::uint64_t seed = 0;          // carried for config echo; descent is
                                     // full-batch and draws nothing
    LrSchedule lr_schedule = LrSchedule::CONSTANT;
    bool record_objective = false; // keep a per-iteration objective trace

    void validate() const;
};

// Dual-form interval model: upper(x) = k(anchors, x) alpha + b1,
// lower(x) = k(anchors, x) beta + b2. Bounds are not forcibly ordered.
struct PIKernelModel {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    double b1 = 0.0;
    double b2 = 0.0;
    Eigen::MatrixXd anchors;
    KernelSpec kernel;
    TubeParams params;

    // training diagnostics
    std::uint64_t trained_seed = 0;
    long iters_run = 0;
    long instability = 0; // sample-iterations spent with crossed bounds
    double final_update_norm = 0.0;
    double final_objective = 0.0;
    std::vector<double> objective_trace; // filled when record_objective

    std::pair<double, double> predict_point(const Eigen::VectorXd& x) const;
};

// Batch prediction over the rows of X.
void predict(const PIKernelModel& model, const Eigen::MatrixXd& X,
             Eigen::VectorXd& lowers, Eigen::VectorXd& uppers);

// Ridge + summed tube loss + width penalty, evaluated on the anchors' data.
double objective(const PIKernelModel& model, const Dataset& data);

// Subgradient of objective() in every parameter block at the model's
// current state. The width term contributes whenever delta > 0; the
// training loop's warmup gate is a schedule choice, not part of the
// objective itself.
struct ObjectiveGradient {
    Eigen::VectorXd g_alpha;
    Eigen::VectorXd g_beta;
    double g_b1 = 0.0;
    double g_b2 = 0.0;
};

ObjectiveGradient objective_gradient(const PIKernelModel& model,
                                     const Dataset& data);

// Full-batch subgradient descent on the interval objective. Both bound
// functions move together each iteration; samples whose bounds crossed are
// scored with the bounds swapped and counted in model.instability. The
// width-penalty gradient stays off until width_penalty_warmup iterations
// have passed and the mean raw width is positive.
PIKernelModel train(const Dataset& data, const TubeParams& params,
                    const KernelSpec& kernel, const GDConfig& cfg);

// Single-bound quantile machine: f(x) = k(anchors, x) alpha + b fitted to
// (lambda/2) |alpha|^2 + mean pinball_q by the same descent scheme.
struct QuantileKernelModel {
    Eigen::VectorXd alpha;
    double b = 0.0;
    Eigen::MatrixXd anchors;
    KernelSpec kernel;
    double q = 0.5;
    double lambda = 0.0;
    long iters_run = 0;
    double final_update_norm = 0.0;
};

QuantileKernelModel train_quantile(const Dataset& data, double q,
                                   const KernelSpec& kernel, double lambda,
                                   const GDConfig& cfg);

Eigen::VectorXd predict_quantile(const QuantileKernelModel& model,
                                 const Eigen::MatrixXd& X);

} // namespace tubepi
