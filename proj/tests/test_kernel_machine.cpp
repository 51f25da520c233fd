#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tubepi/datagen.hpp"
#include "tubepi/errors.hpp"
#include "tubepi/kernel_machine.hpp"
#include "tubepi/metrics.hpp"
#include "tubepi/rng.hpp"

using namespace tubepi;

namespace {

TubeParams make_params(double t, double r, double delta = 0.0,
                       double lambda = 0.0) {
    TubeParams p;
    p.t = t;
    p.r = r;
    p.delta = delta;
    p.lambda = lambda;
    return p;
}

KernelSpec linear_kernel() {
    KernelSpec k;
    k.kind = KernelKind::LINEAR;
    return k;
}

KernelSpec rbf_kernel(double gamma) {
    KernelSpec k;
    k.kind = KernelKind::RBF;
    k.gamma = gamma;
    return k;
}

GDConfig gd(double lr, long iters, long warmup = 100) {
    GDConfig c;
    c.learning_rate = lr;
    c.max_iters = iters;
    c.width_penalty_warmup = warmup < iters ? warmup : 0;
    return c;
}

} // namespace

TEST_CASE("kernel evaluations match closed forms") {
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 2.0;
    b << 3.0, 4.0;
    CHECK(kernel_eval(linear_kernel(), a, b) == doctest::Approx(11.0));
    CHECK(kernel_eval(rbf_kernel(1.0), a, a) == doctest::Approx(1.0));

    Eigen::VectorXd z0(1), z1(1);
    z0 << 0.0;
    z1 << 1.0;
    // gamma = ln 2 over unit distance halves the kernel
    CHECK(kernel_eval(rbf_kernel(std::log(2.0)), z0, z1) ==
          doctest::Approx(0.5));

    Eigen::VectorXd c(3);
    CHECK_THROWS_AS(kernel_eval(linear_kernel(), a, c), std::invalid_argument);
    CHECK_THROWS_AS(kernel_eval(rbf_kernel(0.0), a, b), std::invalid_argument);
}

TEST_CASE("gram matrix agrees with pairwise evaluation") {
    Rng rng(2);
    Eigen::MatrixXd X(8, 3), Z(5, 3);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 3; ++j) Z(i, j) = rng.normal();

    for (const KernelSpec& spec : {linear_kernel(), rbf_kernel(0.7)}) {
        const Eigen::MatrixXd K = gram(spec, X, Z);
        REQUIRE(K.rows() == 8);
        REQUIRE(K.cols() == 5);
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 5; ++j) {
                CHECK(K(i, j) == doctest::Approx(kernel_eval(
                                     spec, X.row(i).transpose(),
                                     Z.row(j).transpose()))
                                     .epsilon(1e-12));
            }
        }
    }
    // RBF self-gram has a unit diagonal and is symmetric
    const Eigen::MatrixXd S = gram(rbf_kernel(2.0), X, X);
    CHECK((S.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("an intercept-only model predicts its intercepts everywhere") {
    PIKernelModel model;
    model.kernel = rbf_kernel(1.5);
    model.params = make_params(0.8, 0.5);
    model.anchors = Eigen::MatrixXd::Random(6, 2);
    model.alpha = Eigen::VectorXd::Zero(6);
    model.beta = Eigen::VectorXd::Zero(6);
    model.b1 = 2.5;
    model.b2 = -1.5;
    Eigen::VectorXd q(2);
    q << 0.3, -0.7;
    const auto [lo, hi] = model.predict_point(q);
    CHECK(lo == -1.5);
    CHECK(hi == 2.5);

    Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXd lowers, uppers;
    predict(model, X, lowers, uppers);
    CHECK((lowers.array() == -1.5).all());
    CHECK((uppers.array() == 2.5).all());
}

TEST_CASE("objective matches closed forms in degenerate states") {
    Rng rng(6);
    Dataset data;
    data.features = Eigen::MatrixXd::Random(12, 1);
    data.targets.resize(12);
    for (int i = 0; i < 12; ++i) data.targets[i] = rng.normal() + 0.01;

    PIKernelModel model;
    model.kernel = linear_kernel();
    model.params = make_params(0.8, 0.5, 0.3, 7.0);
    model.anchors = data.features;
    model.alpha = Eigen::VectorXd::Zero(12);
    model.beta = Eigen::VectorXd::Zero(12);
    model.b1 = 0.0;
    model.b2 = 0.0;
    // zero-width tube at zero: every sample pays t |y|, the width term is 0,
    // and zero coefficients kill the ridge
    CHECK(objective(model, data) ==
          doctest::Approx(0.8 * data.targets.cwiseAbs().sum()).epsilon(1e-12));
}

TEST_CASE("crossed bounds are scored with the bounds swapped") {
    Dataset data;
    data.features = Eigen::MatrixXd::Zero(2, 1);
    data.targets.resize(2);
    data.targets << 0.0, 2.0;

    PIKernelModel model;
    model.kernel = linear_kernel();
    model.params = make_params(0.8, 0.5, 0.1, 0.0);
    model.anchors = data.features;
    model.alpha = Eigen::VectorXd::Zero(2);
    model.beta = Eigen::VectorXd::Zero(2);
    model.b1 = -1.0; // upper ends up below lower
    model.b2 = 1.0;
    // swapped tube: y=0 sits on the midline (0.2 * 1), y=2 above (0.8 * 1);
    // the width term charges delta * |u - l| = 0.1 * 2 per sample
    CHECK(objective(model, data) == doctest::Approx(0.2 + 0.8 + 0.4));
}

TEST_CASE("analytic gradient matches central differences at random states") {
    Rng rng(31);
    const Eigen::Index m = 18;
    const double h = 1e-6;
    int states_checked = 0;
    while (states_checked < 50) {
        Dataset data;
        data.features.resize(m, 2);
        data.targets.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            data.features(i, 0) = rng.uniform(-1.0, 1.0);
            data.features(i, 1) = rng.uniform(-1.0, 1.0);
            data.targets[i] = rng.normal();
        }
        PIKernelModel model;
        model.kernel = (states_checked % 2 == 0) ? linear_kernel()
                                                 : rbf_kernel(1.3);
        model.params = make_params(rng.uniform(0.55, 0.95),
                                   rng.uniform(0.2, 0.8),
                                   (states_checked % 3 == 0) ? 0.15 : 0.0,
                                   (states_checked % 2 == 0) ? 1.0 : 0.0);
        model.anchors = data.features;
        model.alpha.resize(m);
        model.beta.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            model.alpha[i] = 0.25 * rng.normal();
            model.beta[i] = 0.25 * rng.normal();
        }
        model.b1 = rng.uniform(0.2, 1.5);
        model.b2 = rng.uniform(-1.5, -0.2);

        // reject states whose difference stencil would straddle a kink
        Eigen::VectorXd lowers, uppers;
        predict(model, data.features, lowers, uppers);
        double margin = 1e9;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double u = std::max(uppers[i], lowers[i]);
            const double l = std::min(uppers[i], lowers[i]);
            const double rline =
                model.params.r * u + (1.0 - model.params.r) * l;
            const double y = data.targets[i];
            margin = std::min({margin, std::abs(y - u), std::abs(y - l),
                               std::abs(y - rline), std::abs(u - l)});
        }
        if (margin < 5e-4) {
            continue;
        }
        ++states_checked;

        const ObjectiveGradient g = objective_gradient(model, data);
        double max_abs = std::max({g.g_alpha.cwiseAbs().maxCoeff(),
                                   g.g_beta.cwiseAbs().maxCoeff(),
                                   std::abs(g.g_b1), std::abs(g.g_b2), 1.0});
        auto fd = [&](double& slot) {
            const double keep = slot;
            slot = keep + h;
            const double plus = objective(model, data);
            slot = keep - h;
            const double minus = objective(model, data);
            slot = keep;
            return (plus - minus) / (2.0 * h);
        };
        for (Eigen::Index i = 0; i < m; ++i) {
            CHECK(std::abs(fd(model.alpha[i]) - g.g_alpha[i]) / max_abs <
                  1e-5);
            CHECK(std::abs(fd(model.beta[i]) - g.g_beta[i]) / max_abs < 1e-5);
        }
        CHECK(std::abs(fd(model.b1) - g.g_b1) / max_abs < 1e-5);
        CHECK(std::abs(fd(model.b2) - g.g_b2) / max_abs < 1e-5);
    }
}

TEST_CASE("a vanishing step budget leaves the quantile initialization") {
    const Dataset data = gen_dataset_a(80, 12);
    const TubeParams p = make_params(0.8, 0.5);
    GDConfig cfg = gd(1e-300, 1, 0);
    const PIKernelModel model = train(data, p, linear_kernel(), cfg);
    // the intercepts absorb the microscopic update; the coefficients start
    // from zero, so theirs stays visible but negligible
    CHECK(model.b1 == empirical_quantile(data.targets, (1.0 + 0.8) / 2.0));
    CHECK(model.b2 == empirical_quantile(data.targets, (1.0 - 0.8) / 2.0));
    CHECK(model.alpha.cwiseAbs().maxCoeff() < 1e-250);
    CHECK(model.beta.cwiseAbs().maxCoeff() < 1e-250);
    CHECK(model.iters_run == 1);
}

TEST_CASE("the objective descends at a conservative step size") {
    const Dataset data = gen_dataset_a(200, 4);
    GDConfig cfg = gd(1e-6, 400, 100);
    cfg.record_objective = true;
    const PIKernelModel model =
        train(data, make_params(0.8, 0.5, 0.0, 1.0), linear_kernel(), cfg);
    REQUIRE(model.objective_trace.size() >= 2);
    for (std::size_t k = 1; k < model.objective_trace.size(); ++k) {
        const double prev = model.objective_trace[k - 1];
        const double cur = model.objective_trace[k];
        CHECK(cur <= prev + 1e-9 * (1.0 + std::abs(prev)));
    }
    // the recorded trace ends where the final objective resumes
    CHECK(model.final_objective <=
          model.objective_trace.front() + 1e-12);
}

TEST_CASE("the slower schedule shrinks later updates") {
    const Dataset data = gen_dataset_a(100, 5);
    GDConfig constant = gd(1e-5, 500, 0);
    GDConfig decaying = gd(1e-5, 500, 0);
    decaying.lr_schedule = LrSchedule::INV_SQRT;
    const PIKernelModel mc =
        train(data, make_params(0.8, 0.5), linear_kernel(), constant);
    const PIKernelModel md =
        train(data, make_params(0.8, 0.5), linear_kernel(), decaying);
    // same gradient field, but the decaying schedule travels less
    CHECK(md.final_update_norm < mc.final_update_norm);
    CHECK(mc.iters_run == 500);
    CHECK(md.iters_run == 500);
}

TEST_CASE("placement slides the trained tube through the sample") {
    const Dataset data = gen_dataset_a(400, 19);
    const Dataset eval = gen_dataset_a(2000, 20);
    auto run = [&](double r) {
        const PIKernelModel model = train(data, make_params(0.8, r),
                                          linear_kernel(), gd(2e-5, 4000));
        Eigen::VectorXd lowers, uppers;
        predict(model, eval.features, lowers, uppers);
        return evaluate_pi(eval.targets, lowers, uppers, r);
    };
    const PIReport low = run(0.2);
    const PIReport mid = run(0.5);
    const PIReport high = run(0.8);
    // the below-tube mass (fraction under the lower bound) grows with r
    CHECK(low.uq < mid.uq);
    CHECK(mid.uq < high.uq);
    // coverage stays in the same neighborhood throughout
    for (const PIReport* rep : {&low, &mid, &high}) {
        CHECK(rep->picp > 0.7);
        CHECK(rep->picp < 0.9);
    }
}

TEST_CASE("the width penalty narrows the tube at some coverage cost") {
    const Dataset data = gen_dataset_a(300, 23);
    auto run = [&](double delta) {
        const PIKernelModel model =
            train(data, make_params(0.9, 0.5, delta, 1.0), linear_kernel(),
                  gd(2e-5, 3000));
        Eigen::VectorXd lowers, uppers;
        predict(model, data.features, lowers, uppers);
        return evaluate_pi(data.targets, lowers, uppers, 0.5);
    };
    const PIReport plain = run(0.0);
    const PIReport penalized = run(0.15);
    CHECK(penalized.mpiw < plain.mpiw);
    CHECK(penalized.picp <= plain.picp);
}

TEST_CASE("training is bit-deterministic for a fixed configuration") {
    const Dataset data = gen_dataset_b(150, 40);
    GDConfig cfg = gd(1e-4, 600);
    const TubeParams p = make_params(0.8, 0.5, 0.01, 1.0);
    const PIKernelModel m1 = train(data, p, rbf_kernel(20.0), cfg);
    const PIKernelModel m2 = train(data, p, rbf_kernel(20.0), cfg);
    CHECK(m1.alpha == m2.alpha);
    CHECK(m1.beta == m2.beta);
    CHECK(m1.b1 == m2.b1);
    CHECK(m1.b2 == m2.b2);
    CHECK(m1.final_objective == m2.final_objective);
    CHECK(m1.instability == m2.instability);
}

TEST_CASE("exploding steps raise the divergence error") {
    const Dataset data = gen_dataset_a(50, 2);
    // ridge amplification factor |1 - eta lambda| >> 1 blows up the weights
    CHECK_THROWS_AS(train(data, make_params(0.8, 0.5, 0.0, 1.0),
                          linear_kernel(), gd(1000.0, 500, 0)),
                    DivergenceError);
}

TEST_CASE("violent width pressure is survived and counted") {
    const Dataset data = gen_dataset_a(20, 3);
    GDConfig cfg = gd(0.1, 100, 0);
    const PIKernelModel model =
        train(data, make_params(0.8, 0.5, 2.0, 0.0), linear_kernel(), cfg);
    // the penalty repeatedly slams the bounds through each other; the
    // crossed-sample bookkeeping keeps training finite and counts the hits
    CHECK(model.instability > 0);
    CHECK(std::isfinite(model.final_objective));
}

TEST_CASE("quantile machine fits conditional quantiles of a linear trend") {
    Rng rng(55);
    const Eigen::Index m = 200;
    Dataset data;
    data.features.resize(m, 1);
    data.targets.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        data.features(i, 0) = rng.uniform(-1.0, 1.0);
        data.targets[i] = 2.0 * data.features(i, 0) + 0.5 * rng.normal();
    }
    // a decaying step is needed here: with a constant step the subgradient
    // iterates orbit the optimum in a band wider than the quantile gap
    GDConfig cfg = gd(0.05, 20000, 0);
    cfg.lr_schedule = LrSchedule::INV_SQRT;
    const QuantileKernelModel med =
        train_quantile(data, 0.5, linear_kernel(), 0.0, cfg);
    const QuantileKernelModel high =
        train_quantile(data, 0.9, linear_kernel(), 0.0, cfg);

    Eigen::MatrixXd grid(5, 1);
    grid << -0.8, -0.4, 0.0, 0.4, 0.8;
    const Eigen::VectorXd f_med = predict_quantile(med, grid);
    const Eigen::VectorXd f_high = predict_quantile(high, grid);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(f_med[i] - 2.0 * grid(i, 0)) < 0.25);
        CHECK(f_high[i] - f_med[i] > 0.3); // curves stay apart, never cross
    }
    // the median residuals split the training sample roughly in half
    const Eigen::VectorXd fit = predict_quantile(med, data.features);
    long above = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (data.targets[i] > fit[i]) ++above;
    }
    const double frac = static_cast<double>(above) / static_cast<double>(m);
    CHECK(frac > 0.4);
    CHECK(frac < 0.6);
}

TEST_CASE("configuration validation rejects broken settings") {
    CHECK_THROWS_AS(gd(0.0, 100).validate(), std::invalid_argument);
    CHECK_THROWS_AS(gd(1e-4, 0).validate(), std::invalid_argument);
    GDConfig bad_warmup = gd(1e-4, 100);
    bad_warmup.width_penalty_warmup = 100;
    CHECK_THROWS_AS(bad_warmup.validate(), std::invalid_argument);
    GDConfig bad_tol = gd(1e-4, 100);
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(bad_tol.validate(), std::invalid_argument);

    const Dataset tiny = gen_dataset_a(1, 1);
    CHECK_THROWS_AS(train(tiny, make_params(0.8, 0.5), linear_kernel(),
                          gd(1e-4, 100, 0)),
                    std::invalid_argument);
}
