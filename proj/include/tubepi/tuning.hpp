#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tubepi/conformal.hpp"
#include "tubepi/dataset.hpp"
#include "tubepi/loss.hpp"

namespace tubepi {

// Trains a model on the given data and hands back its bound functions.
// Sweeps vary one TubeParams field at a time and retrain from scratch, so
// the backbone and its seed live inside the closure.
using PITrainer =
    std::function<PIFn(const Dataset& train, const TubeParams& params)>;

struct SweepRow {
    double value = 0.0;
    double val_picp = 0.0;
    double val_mpiw = 0.0;
    std::optional<double> test_picp; // filled by sweep_r only
    std::optional<double> test_mpiw;
};

enum class SelectionTag {
    MIN_MPIW_FEASIBLE, // best-width r among those meeting coverage
    LAST_FEASIBLE,     // largest delta that kept validation coverage
    NO_FEASIBLE,       // nothing met coverage; fallback reported
};

std::string selection_tag_name(SelectionTag tag);

struct SweepResult {
    std::vector<SweepRow> table;
    double chosen = 0.0;
    SelectionTag tag = SelectionTag::NO_FEASIBLE;
};

// Trains one model per r (ascending), keeps the minimum validation MPIW
// among r with validation PICP >= t - slack; falls back to the max-PICP r
// with the NO_FEASIBLE tag when coverage is never met.
SweepResult sweep_r(const Dataset& train, const Dataset& val,
                    const Dataset& test, const TubeParams& base,
                    const PITrainer& trainer, const std::vector<double>& grid,
                    double slack = 0.01);

// Walks an ascending delta schedule (starting at 0) while validation PICP
// stays >= the coverage target (exact comparison, no slack); returns the
// last feasible delta. target_coverage defaults to base.t.
SweepResult recalibrate_delta(
    const Dataset& train, const Dataset& val, const TubeParams& base,
    const PITrainer& trainer, const std::vector<double>& schedule,
    std::optional<double> target_coverage = std::nullopt);

} // namespace tubepi
