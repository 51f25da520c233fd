#include "tubepi/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tubepi/datagen.hpp"
#include "tubepi/errors.hpp"

namespace tubepi {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IOError("cannot open config '" + path +
                      "': " + std::strerror(errno));
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

ConfigFile ConfigFile::parse_text(const std::string& text,
                                  const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#' ||
            stripped.front() == ';') {
            continue;
        }
        if (stripped.front() == '[') {
            if (stripped.back() != ']' || stripped.size() < 3) {
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            cfg.sections_[section]; // register even if empty
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        if (section.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": key outside any [section]");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": empty key");
        }
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto sit = sections_.find(section);
    return sit != sections_.end() && sit->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    const auto sit = sections_.find(section);
    if (sit == sections_.end()) {
        return fallback;
    }
    const auto kit = sit->second.find(key);
    return kit == sit->second.end() ? fallback : kit->second;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key, double fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const std::string raw = get(section, key, "");
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) {
            throw std::invalid_argument(raw);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key +
                          ": expected a number, got '" + raw + "'");
    }
}

long ConfigFile::get_long(const std::string& section, const std::string& key,
                          long fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const std::string raw = get(section, key, "");
    try {
        std::size_t pos = 0;
        const long v = std::stol(raw, &pos);
        if (pos != raw.size()) {
            throw std::invalid_argument(raw);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key +
                          ": expected an integer, got '" + raw + "'");
    }
}

std::uint64_t ConfigFile::get_u64(const std::string& section,
                                  const std::string& key,
                                  std::uint64_t fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const std::string raw = get(section, key, "");
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(raw, &pos);
        if (pos != raw.size()) {
            throw std::invalid_argument(raw);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key +
                          ": expected an unsigned integer, got '" + raw + "'");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) {
        return fallback;
    }
    const std::string raw = lower(get(section, key, ""));
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") {
        return true;
    }
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") {
        return false;
    }
    throw ConfigError(origin_ + ": [" + section + "] " + key +
                      ": expected a boolean, got '" + raw + "'");
}

KernelKind kernel_kind_from(const std::string& name) {
    const std::string n = lower(name);
    if (n == "linear") {
        return KernelKind::LINEAR;
    }
    if (n == "rbf") {
        return KernelKind::RBF;
    }
    throw ConfigError("unknown kernel '" + name + "' (use linear or rbf)");
}

LrSchedule schedule_from(const std::string& name) {
    const std::string n = lower(name);
    if (n == "constant") {
        return LrSchedule::CONSTANT;
    }
    if (n == "inv_sqrt") {
        return LrSchedule::INV_SQRT;
    }
    throw ConfigError("unknown schedule '" + name +
                      "' (use constant or inv_sqrt)");
}

void ExperimentConfig::validate() const {
    try {
        params.validate();
        if (backbone == "kernel") {
            kernel.validate();
            gd.validate();
        } else if (backbone == "net") {
            net.validate();
            adam.validate();
        } else {
            throw ConfigError("unknown backbone '" + backbone +
                              "' (use kernel or net)");
        }
        if (generator != "external" && data_csv.empty()) {
            generator_from_name(generator); // throws on unknown names
        }
        if (n_train < 2 || n_test < 1) {
            throw ConfigError("need n_train >= 2 and n_test >= 1");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig experiment_from(const ConfigFile& file) {
    ExperimentConfig cfg;
    cfg.task = file.get("experiment", "task", cfg.task);
    cfg.out_dir = file.get("experiment", "out_dir", cfg.out_dir);
    cfg.seed = file.get_u64("experiment", "seed", cfg.seed);

    cfg.generator = file.get("data", "generator", cfg.generator);
    cfg.data_csv = file.get("data", "csv", cfg.data_csv);
    cfg.n_train = file.get_long("data", "n_train", cfg.n_train);
    cfg.n_val = file.get_long("data", "n_val", cfg.n_val);
    cfg.n_test = file.get_long("data", "n_test", cfg.n_test);
    cfg.noise_variance =
        file.get_double("data", "noise_variance", cfg.noise_variance);

    cfg.params.t = file.get_double("tube", "t", cfg.params.t);
    cfg.params.r = file.get_double("tube", "r", cfg.params.r);
    cfg.params.delta = file.get_double("tube", "delta", cfg.params.delta);
    cfg.params.lambda = file.get_double("tube", "lambda", cfg.params.lambda);

    cfg.backbone = file.get("backbone", "kind", cfg.backbone);
    cfg.kernel.kind =
        kernel_kind_from(file.get("kernel", "kind", "linear"));
    cfg.kernel.gamma = file.get_double("kernel", "gamma", cfg.kernel.gamma);
    cfg.gd.learning_rate =
        file.get_double("kernel", "learning_rate", cfg.gd.learning_rate);
    cfg.gd.max_iters = file.get_long("kernel", "max_iters", cfg.gd.max_iters);
    cfg.gd.tol = file.get_double("kernel", "tol", cfg.gd.tol);
    cfg.gd.width_penalty_warmup =
        file.get_long("kernel", "warmup", cfg.gd.width_penalty_warmup);
    cfg.gd.lr_schedule =
        schedule_from(file.get("kernel", "schedule", "constant"));

    cfg.net.hidden_units =
        file.get_long("net", "hidden_units", cfg.net.hidden_units);
    cfg.net.init_scale =
        file.get_double("net", "init_scale", cfg.net.init_scale);
    cfg.adam.learning_rate =
        file.get_double("net", "learning_rate", cfg.adam.learning_rate);
    cfg.adam.batch_size = file.get_long("net", "batch_size", cfg.adam.batch_size);
    cfg.adam.epochs = file.get_long("net", "epochs", cfg.adam.epochs);

    cfg.gd.seed = cfg.seed;
    cfg.net.seed = cfg.seed;
    cfg.adam.seed = cfg.seed;
    return cfg;
}

} // namespace tubepi
