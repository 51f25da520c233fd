#include "tubepi/tuning.hpp"

#include <algorithm>
#include <stdexcept>

#include "tubepi/metrics.hpp"

namespace tubepi {

namespace {

void bounds_on(const PIFn& fn, const Dataset& data, Eigen::VectorXd& lowers,
               Eigen::VectorXd& uppers) {
    const Eigen::Index m = data.rows();
    lowers.resize(m);
    uppers.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto [lo, up] = fn(data.features.row(i).transpose());
        lowers[i] = lo;
        uppers[i] = up;
    }
}

} // namespace

std::string selection_tag_name(SelectionTag tag) {
    switch (tag) {
    case SelectionTag::MIN_MPIW_FEASIBLE:
        return "MIN_MPIW_FEASIBLE";
    case SelectionTag::LAST_FEASIBLE:
        return "LAST_FEASIBLE";
    case SelectionTag::NO_FEASIBLE:
        return "NO_FEASIBLE";
    }
    throw std::logic_error("selection_tag_name: unreachable");
}

SweepResult sweep_r(const Dataset& train, const Dataset& val,
                    const Dataset& test, const TubeParams& base,
                    const PITrainer& trainer, const std::vector<double>& grid,
                    double slack) {
    if (grid.empty()) {
        throw std::invalid_argument("sweep_r: empty grid");
    }
    for (const double r : grid) {
        if (!(r > 0.0 && r < 1.0)) {
            throw std::invalid_argument("sweep_r: grid values must lie in "
                                        "(0, 1)");
        }
    }
    std::vector<double> ordered = grid;
    std::sort(ordered.begin(), ordered.end());

    SweepResult out;
    Eigen::VectorXd lo, up;
    std::size_t best_feasible = grid.size(); // sentinel: none yet
    std::size_t best_any = 0;
    for (const double r : ordered) {
        TubeParams params = base;
        params.r = r;
        const PIFn fn = trainer(train, params);

        SweepRow row;
        row.value = r;
        bounds_on(fn, val, lo, up);
        row.val_picp = picp(val.targets, lo, up);
        row.val_mpiw = mpiw(lo, up);
        bounds_on(fn, test, lo, up);
        row.test_picp = picp(test.targets, lo, up);
        row.test_mpiw = mpiw(lo, up);
        out.table.push_back(row);

        const std::size_t idx = out.table.size() - 1;
        if (row.val_picp > out.table[best_any].val_picp) {
            best_any = idx;
        }
        const bool feasible = row.val_picp >= base.t - slack;
        if (feasible &&
            (best_feasible == grid.size() ||
             row.val_mpiw < out.table[best_feasible].val_mpiw)) {
            best_feasible = idx;
        }
    }

    if (best_feasible < grid.size()) {
        out.chosen = out.table[best_feasible].value;
        out.tag = SelectionTag::MIN_MPIW_FEASIBLE;
    } else {
        out.chosen = out.table[best_any].value;
        out.tag = SelectionTag::NO_FEASIBLE;
    }
    return out;
}

SweepResult recalibrate_delta(const Dataset& train, const Dataset& val,
                              const TubeParams& base, const PITrainer& trainer,
                              const std::vector<double>& schedule,
                              std::optional<double> target_coverage) {
    if (schedule.empty() || schedule.front() != 0.0) {
        throw std::invalid_argument("recalibrate_delta: schedule must start "
                                    "at 0");
    }
    if (!std::is_sorted(schedule.begin(), schedule.end())) {
        throw std::invalid_argument("recalibrate_delta: schedule must be "
                                    "ascending");
    }
    const double target = target_coverage.value_or(base.t);

    SweepResult out;
    Eigen::VectorXd lo, up;
    bool have_feasible = false;
    for (const double delta : schedule) {
        TubeParams params = base;
        params.delta = delta;
        const PIFn fn = trainer(train, params);

        SweepRow row;
        row.value = delta;
        bounds_on(fn, val, lo, up);
        row.val_picp = picp(val.targets, lo, up);
        row.val_mpiw = mpiw(lo, up);
        out.table.push_back(row);

        if (row.val_picp >= target) {
            out.chosen = delta;
            have_feasible = true;
        } else {
            // The walk stops at the first infeasible step; it stays in the
            // table so the caller can see why.
            break;
        }
    }
    out.tag =
        have_feasible ? SelectionTag::LAST_FEASIBLE : SelectionTag::NO_FEASIBLE;
    if (!have_feasible) {
        out.chosen = 0.0;
    }
    return out;
}

} // namespace tubepi
