#pragma once

#include <string>

#include "json.hpp"

#include "tubepi/loss.hpp"
#include "tubepi/metrics.hpp"

namespace tubepi {

// JSON reports with deterministic key order. A fixed config and seed must
// reproduce the file byte-for-byte except for the timestamp field, so all
// payload assembly goes through ordered_json and the timestamp is the only
// wall-clock value.

using OrderedJson = nlohmann::ordered_json;

// Non-finite values are not valid JSON numbers; they serialize as null.
OrderedJson json_number(double v);

OrderedJson pi_report_json(const PIReport& rep);

OrderedJson params_json(const TubeParams& params);

// Standard envelope: schema_version, task, seed, timestamp, params,
// metrics, plus a task-specific details object (may be empty).
OrderedJson experiment_report(const std::string& task, std::uint64_t seed,
                              const TubeParams& params, const PIReport& rep,
                              OrderedJson details = OrderedJson::object());

// Pretty-prints with a trailing newline; the caller creates directories.
void write_json(const std::string& path, const OrderedJson& doc);

// Structural validation mirroring docs/report-schema.json: required keys,
// types, and finiteness of all numbers. Returns false and fills `why` on
// the first violation.
bool validate_report(const nlohmann::json& report, std::string* why);

} // namespace tubepi
