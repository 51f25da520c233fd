#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tubepi/dataset.hpp"

namespace tubepi {

// Reads a CSV with a header row; every column before the last is a
// feature, the last is the target. Lines starting with '#' are comment
// metadata and may carry generator provenance (generator, seed,
// noise_variance) written by save_dataset. Throws DataError with
// row/column diagnostics on malformed input, IOError on unreadable files.
Dataset load_csv(const std::string& path);

// Writes a dataset with '#' provenance comments and a header row.
void save_dataset(const std::string& path, const Dataset& data);

// Writes per-row predictions: feature columns, y, lower, upper.
void save_predictions(const std::string& path, const Eigen::MatrixXd& features,
                      const Eigen::VectorXd& targets,
                      const Eigen::VectorXd& lowers,
                      const Eigen::VectorXd& uppers);

// Writes a forecast horizon: index, lower, upper.
void save_forecast(const std::string& path, const Eigen::VectorXd& lowers,
                   const Eigen::VectorXd& uppers);

// Generic table writer used for sweep output: one header, numeric rows.
void save_table(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows);

} // namespace tubepi
