#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "tubepi/dense_net.hpp"
#include "tubepi/kernel_machine.hpp"
#include "tubepi/loss.hpp"

namespace tubepi {

// Flat sectioned key-value config: [section] headers, key = value lines,
// '#'/';' comment lines. Duplicate keys take the last value.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& path);
    static ConfigFile parse_text(const std::string& text,
                                 const std::string& origin);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long get_long(const std::string& section, const std::string& key,
                  long fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;

    const std::map<std::string, std::map<std::string, std::string>>&
    sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_;
};

// Typed snapshot of one experiment; the CLI builds it from a ConfigFile
// and then lets command-line flags override individual fields.
struct ExperimentConfig {
    std::string task = "train";
    std::string out_dir = ".";
    std::uint64_t seed = 0;

    // data source: a named generator or an external CSV
    std::string generator = "dataset_a";
    std::string data_csv;
    long n_train = 500;
    long n_val = 500;
    long n_test = 1000;
    double noise_variance = 0.8;

    TubeParams params;

    std::string backbone = "kernel"; // kernel | net
    KernelSpec kernel;
    GDConfig gd;
    NetConfig net;
    AdamConfig adam;

    void validate() const; // throws ConfigError
};

// Reads the known sections ([experiment], [data], [tube], [kernel], [net]).
ExperimentConfig experiment_from(const ConfigFile& file);

// Parse helpers shared with CLI flag handling; throw ConfigError.
KernelKind kernel_kind_from(const std::string& name);
LrSchedule schedule_from(const std::string& name);

} // namespace tubepi
