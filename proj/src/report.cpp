#include "tubepi/report.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>

#include "tubepi/errors.hpp"

namespace tubepi {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

OrderedJson json_number(double v) {
    if (!std::isfinite(v)) {
        return nullptr;
    }
    return v;
}

OrderedJson params_json(const TubeParams& params) {
    OrderedJson j;
    j["t"] = params.t;
    j["r"] = params.r;
    j["delta"] = params.delta;
    j["lambda"] = params.lambda;
    return j;
}

OrderedJson pi_report_json(const PIReport& rep) {
    OrderedJson j;
    j["picp"] = json_number(rep.picp);
    j["mpiw"] = json_number(rep.mpiw);
    j["crossed_bounds"] = rep.crossed_bounds;
    j["smse"] = rep.smse ? json_number(*rep.smse) : OrderedJson(nullptr);
    OrderedJson part;
    part["m1"] = rep.partition.m1;
    part["m2"] = rep.partition.m2;
    part["m3"] = rep.partition.m3;
    part["m4"] = rep.partition.m4;
    part["k_upper"] = rep.partition.k_upper;
    part["k_rline"] = rep.partition.k_rline;
    part["k_lower"] = rep.partition.k_lower;
    j["partition"] = part;
    j["lq"] = json_number(rep.lq);
    j["uq"] = json_number(rep.uq);
    j["n"] = rep.n;
    j["train_seconds"] = json_number(rep.train_seconds);
    return j;
}

OrderedJson experiment_report(const std::string& task, std::uint64_t seed,
                              const TubeParams& params, const PIReport& rep,
                              OrderedJson details) {
    OrderedJson j;
    j["schema_version"] = 1;
    j["task"] = task;
    j["seed"] = seed;
    j["timestamp"] = utc_timestamp();
    j["params"] = params_json(params);
    j["metrics"] = pi_report_json(rep);
    j["details"] = std::move(details);
    return j;
}

void write_json(const std::string& path, const OrderedJson& doc) {
    std::ofstream out(path);
    if (!out) {
        throw IOError("cannot open '" + path +
                      "' for writing: " + std::strerror(errno));
    }
    out << doc.dump(2) << "\n";
    if (!out) {
        throw IOError("write failed for '" + path + "'");
    }
}

namespace {

using nlohmann::json;

bool fail(std::string* why, const std::string& message) {
    if (why) {
        *why = message;
    }
    return false;
}

// Numbers anywhere in the tree must be finite; null is the explicit
// "not applicable" marker.
bool all_numbers_finite(const json& node, const std::string& at,
                        std::string* why) {
    if (node.is_number()) {
        const double v = node.get<double>();
        if (!std::isfinite(v)) {
            return fail(why, at + ": non-finite number");
        }
        return true;
    }
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (!all_numbers_finite(it.value(), at + "." + it.key(), why)) {
                return false;
            }
        }
    } else if (node.is_array()) {
        std::size_t i = 0;
        for (const auto& item : node) {
            if (!all_numbers_finite(item, at + "[" + std::to_string(i) + "]",
                                    why)) {
                return false;
            }
            ++i;
        }
    }
    return true;
}

bool require(const json& obj, const char* key, json::value_t type,
             const std::string& at, std::string* why) {
    if (!obj.contains(key)) {
        return fail(why, at + ": missing required field '" + key + "'");
    }
    const json& v = obj.at(key);
    const bool ok =
        v.type() == type ||
        (type == json::value_t::number_float && v.is_number()) ||
        (type == json::value_t::number_integer && v.is_number_integer()) ||
        (type == json::value_t::number_unsigned && v.is_number_integer());
    if (!ok) {
        return fail(why, at + "." + key + ": wrong type");
    }
    return true;
}

} // namespace

bool validate_report(const nlohmann::json& report, std::string* why) {
    if (!report.is_object()) {
        return fail(why, "report: not an object");
    }
    if (!require(report, "schema_version", json::value_t::number_integer,
                 "report", why) ||
        !require(report, "task", json::value_t::string, "report", why) ||
        !require(report, "seed", json::value_t::number_unsigned, "report",
                 why) ||
        !require(report, "timestamp", json::value_t::string, "report", why) ||
        !require(report, "params", json::value_t::object, "report", why) ||
        !require(report, "metrics", json::value_t::object, "report", why) ||
        !require(report, "details", json::value_t::object, "report", why)) {
        return false;
    }
    if (report.at("schema_version").get<long>() != 1) {
        return fail(why, "report.schema_version: expected 1");
    }

    const json& params = report.at("params");
    for (const char* key : {"t", "r", "delta", "lambda"}) {
        if (!require(params, key, json::value_t::number_float, "params",
                     why)) {
            return false;
        }
    }

    const json& metrics = report.at("metrics");
    for (const char* key : {"picp", "mpiw", "lq", "uq", "train_seconds"}) {
        if (!require(metrics, key, json::value_t::number_float, "metrics",
                     why)) {
            return false;
        }
    }
    if (!require(metrics, "crossed_bounds", json::value_t::boolean, "metrics",
                 why) ||
        !require(metrics, "n", json::value_t::number_integer, "metrics",
                 why) ||
        !require(metrics, "partition", json::value_t::object, "metrics",
                 why)) {
        return false;
    }
    if (!metrics.contains("smse") ||
        (!metrics.at("smse").is_null() && !metrics.at("smse").is_number())) {
        return fail(why, "metrics.smse: must be a number or null");
    }
    const json& part = metrics.at("partition");
    for (const char* key :
         {"m1", "m2", "m3", "m4", "k_upper", "k_rline", "k_lower"}) {
        if (!require(part, key, json::value_t::number_integer,
                     "metrics.partition", why)) {
            return false;
        }
    }
    return all_numbers_finite(report, "report", why);
}

} // namespace tubepi
