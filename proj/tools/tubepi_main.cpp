#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tubepi/config.hpp"
#include "tubepi/conformal.hpp"
#include "tubepi/csvio.hpp"
#include "tubepi/datagen.hpp"
#include "tubepi/dense_net.hpp"
#include "tubepi/errors.hpp"
#include "tubepi/forecasting.hpp"
#include "tubepi/kernel_machine.hpp"
#include "tubepi/metrics.hpp"
#include "tubepi/model_io.hpp"
#include "tubepi/report.hpp"
#include "tubepi/scalar_oracle.hpp"
#include "tubepi/tuning.hpp"

namespace {

using namespace tubepi;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// TUBEPI_SEED wins over both config files and --seed flags.
void apply_env_seed(std::uint64_t& seed) {
    const char* env = std::getenv("TUBEPI_SEED");
    if (env == nullptr || *env == '\0') {
        return;
    }
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(env, &pos);
        if (env[pos] != '\0') {
            throw std::invalid_argument(env);
        }
        seed = v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("TUBEPI_SEED: not an unsigned integer: '") +
                          env + "'");
    }
}

GeneratorKind generator_from_flag(const std::string& name) {
    if (name == "a") return GeneratorKind::DATASET_A;
    if (name == "b") return GeneratorKind::DATASET_B;
    try {
        return generator_from_name(name);
    } catch (const std::exception&) {
        throw ConfigError("unknown dataset '" + name +
                          "' (use a, b, sinc_uniform or hetero_sin)");
    }
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IOError("cannot create '" + dir + "': " + ec.message());
    }
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// Pre-parse peek at --config so config values become flag defaults that
// explicit flags then override.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) {
            return argv[i + 1];
        }
        if (arg.rfind("--config=", 0) == 0) {
            return arg.substr(9);
        }
    }
    return "";
}

Dataset make_dataset(const ExperimentConfig& cfg, long n, std::uint64_t seed) {
    return gen_dataset(generator_from_flag(cfg.generator),
                       static_cast<Eigen::Index>(n), seed,
                       cfg.noise_variance);
}

// Attaches true-quantile SMSE when the data's generator is known.
void attach_smse(PIReport& rep, const Dataset& data,
                 const Eigen::VectorXd& lowers, const Eigen::VectorXd& uppers,
                 const TubeParams& params) {
    if (data.meta.kind == GeneratorKind::EXTERNAL) {
        return;
    }
    Eigen::VectorXd true_lo, true_hi;
    true_pi_bounds(data, params.t, params.r, true_lo, true_hi);
    rep.smse = smse(lowers, uppers, true_lo, true_hi);
}

PIKernelModel train_tube_model(const Dataset& data, const TubeParams& params,
                               const ExperimentConfig& cfg) {
    return train(data, params, cfg.kernel, cfg.gd);
}

PITrainer make_trainer(const ExperimentConfig& cfg) {
    if (cfg.backbone == "net") {
        return [cfg](const Dataset& train_set, const TubeParams& params) -> PIFn {
            NetLossSpec spec;
            spec.kind = NetLossKind::TUBE;
            spec.params = params;
            NetConfig ncfg = cfg.net;
            ncfg.input_dim = train_set.dim();
            const DenseNet net = mlp_train(train_set, spec, ncfg, cfg.adam);
            return [net](const Eigen::VectorXd& x) {
                return mlp_forward(net, x);
            };
        };
    }
    return [cfg](const Dataset& train_set, const TubeParams& params) -> PIFn {
        const PIKernelModel model = train_tube_model(train_set, params, cfg);
        return [model](const Eigen::VectorXd& x) {
            return model.predict_point(x);
        };
    };
}

int cmd_gen(const std::string& dataset, long n, std::uint64_t seed,
            double variance, const std::string& out) {
    const Dataset data = gen_dataset(generator_from_flag(dataset),
                                     static_cast<Eigen::Index>(n), seed,
                                     variance);
    save_dataset(out, data);
    std::cout << "wrote " << n << " rows to " << out << "\n";
    return 0;
}

int cmd_train(ExperimentConfig cfg) {
    cfg.validate();
    ensure_out_dir(cfg.out_dir);

    Dataset train_data, test_data;
    if (!cfg.data_csv.empty()) {
        train_data = load_csv(cfg.data_csv);
        test_data = train_data;
    } else {
        train_data = make_dataset(cfg, cfg.n_train, cfg.seed);
        test_data = make_dataset(cfg, cfg.n_test, cfg.seed + 1);
    }

    const auto start = Clock::now();
    OrderedJson details;
    details["backbone"] = cfg.backbone;
    details["data"] = cfg.data_csv.empty() ? cfg.generator : cfg.data_csv;

    Eigen::VectorXd lowers, uppers;
    if (cfg.backbone == "net") {
        NetLossSpec spec;
        spec.kind = NetLossKind::TUBE;
        spec.params = cfg.params;
        NetConfig ncfg = cfg.net;
        ncfg.input_dim = train_data.dim();
        const DenseNet net = mlp_train(train_data, spec, ncfg, cfg.adam);
        const double secs = seconds_since(start);
        mlp_forward_batch(net, test_data.features, lowers, uppers);
        save_model(join(cfg.out_dir, "model.txt"), net, spec);
        details["hidden_units"] = ncfg.hidden_units;
        details["epochs"] = cfg.adam.epochs;
        details["train_seconds"] = secs;
    } else {
        const PIKernelModel model =
            train_tube_model(train_data, cfg.params, cfg);
        const double secs = seconds_since(start);
        predict(model, test_data.features, lowers, uppers);
        save_model(join(cfg.out_dir, "model.txt"), model);
        details["kernel"] =
            cfg.kernel.kind == KernelKind::RBF ? "rbf" : "linear";
        details["iters_run"] = model.iters_run;
        details["instability"] = model.instability;
        details["final_objective"] = json_number(model.final_objective);
        details["train_seconds"] = secs;
    }

    PIReport rep =
        evaluate_pi(test_data.targets, lowers, uppers, cfg.params.r);
    rep.train_seconds = seconds_since(start);
    attach_smse(rep, test_data, lowers, uppers, cfg.params);

    save_predictions(join(cfg.out_dir, "predictions.csv"), test_data.features,
                     test_data.targets, lowers, uppers);
    write_json(join(cfg.out_dir, "report.json"),
               experiment_report("train", cfg.seed, cfg.params, rep,
                                 std::move(details)));
    std::cout << "picp " << rep.picp << " mpiw " << rep.mpiw << " -> "
              << join(cfg.out_dir, "report.json") << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, ExperimentConfig cfg) {
    ensure_out_dir(cfg.out_dir);
    const LoadedModel loaded = load_model(model_path);

    Dataset data;
    if (!cfg.data_csv.empty()) {
        data = load_csv(cfg.data_csv);
    } else {
        data = make_dataset(cfg, cfg.n_test, cfg.seed);
    }

    TubeParams params = loaded.kind == ModelKind::KERNEL
                            ? loaded.kernel.params
                            : loaded.net_loss.params;
    Eigen::VectorXd lowers, uppers;
    if (loaded.kind == ModelKind::KERNEL) {
        predict(loaded.kernel, data.features, lowers, uppers);
    } else {
        mlp_forward_batch(loaded.net, data.features, lowers, uppers);
    }

    PIReport rep = evaluate_pi(data.targets, lowers, uppers, params.r);
    attach_smse(rep, data, lowers, uppers, params);

    OrderedJson details;
    details["model"] = model_path;
    details["backbone"] =
        loaded.kind == ModelKind::KERNEL ? "kernel" : "net";
    save_predictions(join(cfg.out_dir, "predictions.csv"), data.features,
                     data.targets, lowers, uppers);
    write_json(join(cfg.out_dir, "report.json"),
               experiment_report("eval", cfg.seed, params, rep,
                                 std::move(details)));
    std::cout << "picp " << rep.picp << " mpiw " << rep.mpiw << " -> "
              << join(cfg.out_dir, "report.json") << "\n";
    return 0;
}

OrderedJson sweep_details(const SweepResult& result, const char* param_name) {
    OrderedJson details;
    details["parameter"] = param_name;
    details["chosen"] = result.chosen;
    details["tag"] = selection_tag_name(result.tag);
    OrderedJson table = OrderedJson::array();
    for (const SweepRow& row : result.table) {
        OrderedJson r;
        r["value"] = row.value;
        r["val_picp"] = row.val_picp;
        r["val_mpiw"] = row.val_mpiw;
        if (row.test_picp) {
            r["test_picp"] = *row.test_picp;
            r["test_mpiw"] = *row.test_mpiw;
        }
        table.push_back(std::move(r));
    }
    details["table"] = std::move(table);
    return details;
}

void save_sweep_csv(const std::string& path, const SweepResult& result,
                    const char* param_name, bool with_test) {
    std::vector<std::string> header{param_name, "val_picp", "val_mpiw"};
    if (with_test) {
        header.push_back("test_picp");
        header.push_back("test_mpiw");
    }
    std::vector<std::vector<double>> rows;
    for (const SweepRow& row : result.table) {
        std::vector<double> r{row.value, row.val_picp, row.val_mpiw};
        if (with_test) {
            r.push_back(row.test_picp.value_or(0.0));
            r.push_back(row.test_mpiw.value_or(0.0));
        }
        rows.push_back(std::move(r));
    }
    save_table(path, header, rows);
}

int cmd_sweep_r(ExperimentConfig cfg, const std::vector<double>& grid,
                double slack) {
    cfg.validate();
    ensure_out_dir(cfg.out_dir);
    const Dataset train_data = make_dataset(cfg, cfg.n_train, cfg.seed);
    const Dataset val_data = make_dataset(cfg, cfg.n_val, cfg.seed + 1);
    const Dataset test_data = make_dataset(cfg, cfg.n_test, cfg.seed + 2);

    const auto start = Clock::now();
    const SweepResult result = sweep_r(train_data, val_data, test_data,
                                       cfg.params, make_trainer(cfg), grid,
                                       slack);

    // Re-evaluate the winner for the envelope metrics.
    TubeParams chosen = cfg.params;
    chosen.r = result.chosen;
    const PIFn fn = make_trainer(cfg)(train_data, chosen);
    Eigen::VectorXd lowers(test_data.rows()), uppers(test_data.rows());
    for (Eigen::Index i = 0; i < test_data.rows(); ++i) {
        std::tie(lowers[i], uppers[i]) =
            fn(test_data.features.row(i).transpose());
    }
    PIReport rep = evaluate_pi(test_data.targets, lowers, uppers, chosen.r);
    rep.train_seconds = seconds_since(start);
    attach_smse(rep, test_data, lowers, uppers, chosen);

    save_sweep_csv(join(cfg.out_dir, "sweep.csv"), result, "r", true);
    write_json(join(cfg.out_dir, "report.json"),
               experiment_report("sweep-r", cfg.seed, chosen, rep,
                                 sweep_details(result, "r")));
    std::cout << "chosen r " << result.chosen << " ("
              << selection_tag_name(result.tag) << ") -> "
              << join(cfg.out_dir, "report.json") << "\n";
    return 0;
}

int cmd_recalibrate(ExperimentConfig cfg, const std::vector<double>& schedule,
                    double target) {
    cfg.validate();
    ensure_out_dir(cfg.out_dir);
    const Dataset train_data = make_dataset(cfg, cfg.n_train, cfg.seed);
    const Dataset val_data = make_dataset(cfg, cfg.n_val, cfg.seed + 1);

    const auto start = Clock::now();
    const std::optional<double> target_opt =
        target > 0.0 ? std::optional<double>(target) : std::nullopt;
    const SweepResult result =
        recalibrate_delta(train_data, val_data, cfg.params, make_trainer(cfg),
                          schedule, target_opt);

    TubeParams chosen = cfg.params;
    chosen.delta = result.chosen;
    const PIFn fn = make_trainer(cfg)(train_data, chosen);
    Eigen::VectorXd lowers(val_data.rows()), uppers(val_data.rows());
    for (Eigen::Index i = 0; i < val_data.rows(); ++i) {
        std::tie(lowers[i], uppers[i]) =
            fn(val_data.features.row(i).transpose());
    }
    PIReport rep = evaluate_pi(val_data.targets, lowers, uppers, chosen.r);
    rep.train_seconds = seconds_since(start);
    attach_smse(rep, val_data, lowers, uppers, chosen);

    save_sweep_csv(join(cfg.out_dir, "sweep.csv"), result, "delta", false);
    write_json(join(cfg.out_dir, "report.json"),
               experiment_report("recalibrate", cfg.seed, chosen, rep,
                                 sweep_details(result, "delta")));
    std::cout << "chosen delta " << result.chosen << " ("
              << selection_tag_name(result.tag) << ") -> "
              << join(cfg.out_dir, "report.json") << "\n";
    return 0;
}

int cmd_lemma_check(double t, double r, long m, std::uint64_t seed, int steps,
                    const std::string& out_dir) {
    ensure_out_dir(out_dir);
    Rng rng(seed);
    std::vector<double> samples(static_cast<std::size_t>(m));
    for (double& s : samples) {
        s = rng.normal();
    }
    TubeParams params;
    params.t = t;
    params.r = r;
    const GridSpec grid = default_grid(samples, steps);
    const LemmaRatios ratios = lemma_ratios(samples, params, grid);

    const Eigen::Index n = static_cast<Eigen::Index>(m);
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(samples.data(), n);
    const Eigen::VectorXd lowers =
        Eigen::VectorXd::Constant(n, ratios.optimum.mu_lower);
    const Eigen::VectorXd uppers =
        Eigen::VectorXd::Constant(n, ratios.optimum.mu_upper);
    const PIReport rep = evaluate_pi(y, lowers, uppers, r);

    OrderedJson details;
    details["ratio_12"] = json_number(ratios.ratio_12);
    details["ratio_43"] = json_number(ratios.ratio_43);
    details["ratio_out_in"] = json_number(ratios.ratio_out_in);
    details["target"] = ratios.target;
    details["mu_lower"] = ratios.optimum.mu_lower;
    details["mu_upper"] = ratios.optimum.mu_upper;
    details["grid_steps"] = steps;
    details["m"] = m;

    write_json(join(out_dir, "report.json"),
               experiment_report("lemma-check", seed, params, rep,
                                 std::move(details)));
    std::cout << "ratio_out_in " << ratios.ratio_out_in << " target "
              << ratios.target << " -> " << join(out_dir, "report.json")
              << "\n";
    return 0;
}

int cmd_conformal(ExperimentConfig cfg, int trials, long n_calib,
                  const std::string& rule) {
    cfg.validate();
    ensure_out_dir(cfg.out_dir);
    const long n_total = 5 * n_calib; // 3:1:1 split keeps calib at n_calib

    std::vector<std::vector<double>> trial_rows;
    Eigen::VectorXd all_y, all_lo, all_hi;
    long pooled = 0;
    double q_hat_last = 0.0;

    for (int trial = 0; trial < trials; ++trial) {
        const auto start = Clock::now();
        const Dataset data =
            make_dataset(cfg, n_total, cfg.seed + static_cast<std::uint64_t>(trial));
        SplitPlan plan;
        plan.seed = cfg.seed + static_cast<std::uint64_t>(trial);
        const SplitResult split = split_dataset(data, plan);

        ConformalPredictor cp;
        if (rule == "abs") {
            const QuantileKernelModel point =
                train_quantile(split.train, 0.5, cfg.kernel, cfg.params.lambda,
                               cfg.gd);
            cp = conformalize_absolute(
                [point](const Eigen::VectorXd& x) {
                    Eigen::MatrixXd row(1, x.size());
                    row.row(0) = x.transpose();
                    return predict_quantile(point, row)(0);
                },
                split.calib, cfg.params.t);
        } else {
            const PIKernelModel base =
                train_tube_model(split.train, cfg.params, cfg);
            cp = conformalize(
                [base](const Eigen::VectorXd& x) {
                    return base.predict_point(x);
                },
                split.calib, cfg.params.t);
        }
        q_hat_last = cp.q_hat;

        const Eigen::Index nt = split.test.rows();
        Eigen::VectorXd lo(nt), hi(nt);
        for (Eigen::Index i = 0; i < nt; ++i) {
            std::tie(lo[i], hi[i]) =
                cp.predict_set(split.test.features.row(i).transpose());
        }
        const double trial_picp = picp(split.test.targets, lo, hi);
        const double trial_mpiw = mpiw(lo, hi);
        trial_rows.push_back({static_cast<double>(trial), trial_picp,
                              trial_mpiw, seconds_since(start)});

        all_y.conservativeResize(pooled + nt);
        all_lo.conservativeResize(pooled + nt);
        all_hi.conservativeResize(pooled + nt);
        all_y.segment(pooled, nt) = split.test.targets;
        all_lo.segment(pooled, nt) = lo;
        all_hi.segment(pooled, nt) = hi;
        pooled += nt;
    }

    save_table(join(cfg.out_dir, "trials.csv"),
               {"trial", "picp", "mpiw", "seconds"}, trial_rows);

    PIReport rep = evaluate_pi(all_y, all_lo, all_hi, cfg.params.r);
    OrderedJson details;
    details["rule"] = rule;
    details["trials"] = trials;
    details["n_calib"] = n_calib;
    details["q_hat_last"] = json_number(q_hat_last);
    write_json(join(cfg.out_dir, "report.json"),
               experiment_report("conformal", cfg.seed, cfg.params, rep,
                                 std::move(details)));
    std::cout << "pooled coverage " << rep.picp << " over " << trials
              << " trials -> " << join(cfg.out_dir, "report.json") << "\n";
    return 0;
}

int cmd_forecast(ExperimentConfig cfg, const std::string& series_csv,
                 long synthetic_n, long lags, double train_frac, bool scale) {
    cfg.validate();
    ensure_out_dir(cfg.out_dir);

    Eigen::VectorXd series;
    if (!series_csv.empty()) {
        const Dataset data = load_csv(series_csv);
        if (data.dim() != 0) {
            // Single-column files have no feature columns; anything else is
            // not a series.
            throw DataError(series_csv + ": expected a single-column series");
        }
        series = data.targets;
    } else if (synthetic_n > 0) {
        Rng rng(cfg.seed);
        series.resize(synthetic_n);
        for (Eigen::Index i = 0; i < series.size(); ++i) {
            series[i] = rng.normal();
        }
    } else {
        throw ConfigError("forecast: provide --series or --synthetic-n");
    }

    const Eigen::Index split =
        static_cast<Eigen::Index>(train_frac * static_cast<double>(series.size()));
    WindowSpec spec;
    spec.p = lags;
    if (split <= spec.p || series.size() - split <= spec.p) {
        throw DataError("forecast: series too short for the split and lags");
    }

    ForecastBackbone backbone;
    backbone.kind = cfg.backbone == "net" ? BackboneKind::NET
                                          : BackboneKind::KERNEL;
    backbone.kernel = cfg.kernel;
    backbone.gd = cfg.gd;
    backbone.net = cfg.net;
    backbone.adam = cfg.adam;

    const auto start = Clock::now();
    const Forecaster fc = train_forecaster(series.head(split), spec,
                                           cfg.params, backbone, scale);
    PIReport rep = rolling_evaluate(fc, series.tail(series.size() - split));
    rep.train_seconds = seconds_since(start);

    const Eigen::VectorXd test = series.tail(series.size() - split);
    const Eigen::Index rows = test.size() - spec.p;
    Eigen::VectorXd lowers(rows), uppers(rows);
    for (Eigen::Index j = 0; j < rows; ++j) {
        std::tie(lowers[j], uppers[j]) =
            fc.predict_next(test.segment(j, spec.p));
    }
    save_forecast(join(cfg.out_dir, "forecast.csv"), lowers, uppers);

    OrderedJson details;
    details["lags"] = lags;
    details["scaled"] = scale;
    details["train_points"] = static_cast<long>(split);
    details["test_points"] = static_cast<long>(rows);
    write_json(join(cfg.out_dir, "report.json"),
               experiment_report("forecast", cfg.seed, cfg.params, rep,
                                 std::move(details)));
    std::cout << "picp " << rep.picp << " mpiw " << rep.mpiw << " -> "
              << join(cfg.out_dir, "report.json") << "\n";
    return 0;
}

// Registers the flags shared by every experiment-shaped subcommand, bound
// directly to the config snapshot so config-file values act as defaults.
void add_experiment_flags(CLI::App* cmd, ExperimentConfig& cfg) {
    cmd->add_option("--config", "config file (flags override its values)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--dataset", cfg.generator,
                    "generator: a, b, sinc_uniform, hetero_sin");
    cmd->add_option("--csv", cfg.data_csv, "external dataset CSV");
    cmd->add_option("--n-train", cfg.n_train, "training rows");
    cmd->add_option("--n-val", cfg.n_val, "validation rows");
    cmd->add_option("--n-test", cfg.n_test, "test rows");
    cmd->add_option("--variance", cfg.noise_variance,
                    "noise variance for dataset a");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--t", cfg.params.t, "target coverage in (0,1)");
    cmd->add_option("--r", cfg.params.r, "tube placement in (0,1)");
    cmd->add_option("--delta", cfg.params.delta, "width penalty weight");
    cmd->add_option("--lambda", cfg.params.lambda, "ridge weight");
    cmd->add_option("--backbone", cfg.backbone, "kernel or net");
    cmd->add_option("--out-dir", cfg.out_dir, "artifact directory");

    auto* kernel_opt =
        cmd->add_option("--kernel", "kernel kind: linear or rbf");
    kernel_opt->each([&cfg](const std::string& v) {
        cfg.kernel.kind = kernel_kind_from(v);
    });
    cmd->add_option("--gamma", cfg.kernel.gamma, "RBF width");
    cmd->add_option("--lr", cfg.gd.learning_rate, "kernel learning rate");
    cmd->add_option("--iters", cfg.gd.max_iters, "kernel max iterations");
    cmd->add_option("--tol", cfg.gd.tol, "update-norm stop threshold");
    cmd->add_option("--warmup", cfg.gd.width_penalty_warmup,
                    "iterations before the width penalty engages");
    auto* sched_opt =
        cmd->add_option("--schedule", "learning-rate schedule: constant or inv_sqrt");
    sched_opt->each([&cfg](const std::string& v) {
        cfg.gd.lr_schedule = schedule_from(v);
    });

    cmd->add_option("--hidden", cfg.net.hidden_units, "net hidden units");
    cmd->add_option("--init-scale", cfg.net.init_scale, "net init scale");
    cmd->add_option("--epochs", cfg.adam.epochs, "net epochs");
    cmd->add_option("--batch", cfg.adam.batch_size, "net batch size");
    cmd->add_option("--adam-lr", cfg.adam.learning_rate, "net learning rate");
}

void sync_seeds(ExperimentConfig& cfg) {
    apply_env_seed(cfg.seed);
    cfg.gd.seed = cfg.seed;
    cfg.net.seed = cfg.seed;
    cfg.adam.seed = cfg.seed;
    if (cfg.generator == "a") {
        cfg.generator = "dataset_a";
    } else if (cfg.generator == "b") {
        cfg.generator = "dataset_b";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prediction intervals with the tube loss: data generation, "
                 "training, tuning, conformal calibration, forecasting"};
    app.require_subcommand(1);
    app.footer("exit codes: 0 success, 2 bad flags or config, 3 I/O failure, "
               "4 training divergence, 5 malformed data");

    // Config file values (when --config is given) become flag defaults.
    ExperimentConfig base;
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
        base = experiment_from(ConfigFile::parse(config_path));
    }

    int rc = 0;

    // gen
    std::string gen_dataset_name = "a";
    long gen_n = 1000;
    std::uint64_t gen_seed = 0;
    double gen_variance = 0.8;
    std::string gen_out = "data.csv";
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset");
    gen_cmd->add_option("--dataset", gen_dataset_name,
                        "a, b, sinc_uniform or hetero_sin");
    gen_cmd->add_option("--n", gen_n, "rows")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen_seed, "RNG seed");
    gen_cmd->add_option("--variance", gen_variance, "dataset a noise variance");
    gen_cmd->add_option("--out", gen_out, "output CSV path");
    gen_cmd->callback([&] {
        apply_env_seed(gen_seed);
        rc = cmd_gen(gen_dataset_name, gen_n, gen_seed, gen_variance, gen_out);
    });

    // train
    ExperimentConfig train_cfg = base;
    auto* train_cmd =
        app.add_subcommand("train", "train a tube model and evaluate it");
    add_experiment_flags(train_cmd, train_cfg);
    train_cmd->callback([&] {
        sync_seeds(train_cfg);
        rc = cmd_train(train_cfg);
    });

    // eval
    ExperimentConfig eval_cfg = base;
    std::string eval_model;
    auto* eval_cmd =
        app.add_subcommand("eval", "evaluate a saved model on a dataset");
    eval_cmd->add_option("--model", eval_model, "model file")
        ->required()
        ->check(CLI::ExistingFile);
    add_experiment_flags(eval_cmd, eval_cfg);
    eval_cmd->callback([&] {
        sync_seeds(eval_cfg);
        rc = cmd_eval(eval_model, eval_cfg);
    });

    // sweep-r
    ExperimentConfig sweep_cfg = base;
    std::vector<double> r_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double sweep_slack = 0.01;
    auto* sweep_cmd = app.add_subcommand(
        "sweep-r", "tune tube placement on a validation split");
    add_experiment_flags(sweep_cmd, sweep_cfg);
    sweep_cmd->add_option("--grid", r_grid, "candidate r values");
    sweep_cmd->add_option("--slack", sweep_slack, "coverage slack");
    sweep_cmd->callback([&] {
        sync_seeds(sweep_cfg);
        rc = cmd_sweep_r(sweep_cfg, r_grid, sweep_slack);
    });

    // recalibrate
    ExperimentConfig recal_cfg = base;
    std::vector<double> delta_schedule{0.0, 0.001, 0.005, 0.1, 0.15, 0.2};
    double recal_target = 0.0; // 0 means "use t"
    auto* recal_cmd = app.add_subcommand(
        "recalibrate", "walk the width penalty up under validation coverage");
    add_experiment_flags(recal_cmd, recal_cfg);
    recal_cmd->add_option("--delta-schedule", delta_schedule,
                          "ascending schedule starting at 0");
    recal_cmd->add_option("--target", recal_target,
                          "coverage target (defaults to t)");
    recal_cmd->callback([&] {
        sync_seeds(recal_cfg);
        rc = cmd_recalibrate(recal_cfg, delta_schedule, recal_target);
    });

    // lemma-check
    double lemma_t = 0.8, lemma_r = 0.5;
    long lemma_m = 5000;
    std::uint64_t lemma_seed = 0;
    int lemma_steps = 400;
    std::string lemma_out = ".";
    auto* lemma_cmd = app.add_subcommand(
        "lemma-check", "partition-ratio check of the scalar grid oracle");
    lemma_cmd->add_option("--t", lemma_t, "target coverage");
    lemma_cmd->add_option("--r", lemma_r, "tube placement");
    lemma_cmd->add_option("--m", lemma_m, "sample count")
        ->check(CLI::PositiveNumber);
    lemma_cmd->add_option("--seed", lemma_seed, "RNG seed");
    lemma_cmd->add_option("--steps", lemma_steps, "grid resolution");
    lemma_cmd->add_option("--out-dir", lemma_out, "artifact directory");
    lemma_cmd->callback([&] {
        apply_env_seed(lemma_seed);
        rc = cmd_lemma_check(lemma_t, lemma_r, lemma_m, lemma_seed, lemma_steps,
                             lemma_out);
    });

    // conformal
    ExperimentConfig conf_cfg = base;
    int conf_trials = 10;
    long conf_calib = 200;
    std::string conf_rule = "cqr";
    auto* conf_cmd = app.add_subcommand(
        "conformal", "split-conformal trial harness on synthetic data");
    add_experiment_flags(conf_cmd, conf_cfg);
    conf_cmd->add_option("--trials", conf_trials, "trial count")
        ->check(CLI::PositiveNumber);
    conf_cmd->add_option("--n-calib", conf_calib, "calibration rows per trial")
        ->check(CLI::PositiveNumber);
    conf_cmd->add_option("--rule", conf_rule, "cqr (interval base) or abs");
    conf_cmd->callback([&] {
        sync_seeds(conf_cfg);
        rc = cmd_conformal(conf_cfg, conf_trials, conf_calib, conf_rule);
    });

    // forecast
    ExperimentConfig fcast_cfg = base;
    std::string fcast_series;
    long fcast_synth = 0;
    long fcast_lags = 8;
    double fcast_frac = 0.7;
    bool fcast_scale = false;
    auto* fcast_cmd = app.add_subcommand(
        "forecast", "one-step-ahead interval forecasting on a series");
    add_experiment_flags(fcast_cmd, fcast_cfg);
    fcast_cmd->add_option("--series", fcast_series,
                          "single-column series CSV");
    fcast_cmd->add_option("--synthetic-n", fcast_synth,
                          "generate a white-noise series of this length");
    fcast_cmd->add_option("--lags", fcast_lags, "lag window length")
        ->check(CLI::PositiveNumber);
    fcast_cmd->add_option("--train-frac", fcast_frac, "training fraction");
    fcast_cmd->add_flag("--scale", fcast_scale, "min-max scale the series");
    fcast_cmd->callback([&] {
        sync_seeds(fcast_cfg);
        rc = cmd_forecast(fcast_cfg, fcast_series, fcast_synth, fcast_lags,
                          fcast_frac, fcast_scale);
    });

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
