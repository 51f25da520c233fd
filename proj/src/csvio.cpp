#include "tubepi/csvio.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "tubepi/errors.hpp"

#include "tubepi/datagen.hpp"

namespace tubepi {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& field, double& out) {
    const std::string text = trim(field);
    if (text.empty()) {
        return false;
    }
    std::size_t pos = 0;
    try {
        out = std::stod(text, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == text.size();
}

// Comment lines look like "# key: value"; unknown keys are ignored so
// the format stays forward compatible.
void apply_meta_line(const std::string& line, DataMeta& meta) {
    std::string body = trim(line.substr(1));
    const auto colon = body.find(':');
    if (colon == std::string::npos) {
        return;
    }
    const std::string key = trim(body.substr(0, colon));
    const std::string value = trim(body.substr(colon + 1));
    try {
        if (key == "generator") {
            meta.kind = generator_from_name(value);
        } else if (key == "seed") {
            meta.seed = std::stoull(value);
        } else if (key == "noise_variance") {
            meta.noise_variance = std::stod(value);
        }
    } catch (const std::exception&) {
        // Malformed metadata never blocks loading the numeric body.
    }
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IOError("cannot open '" + path +
                      "' for writing: " + std::strerror(errno));
    }
    out << std::setprecision(17);
    return out;
}

} // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IOError("cannot open '" + path + "': " + std::strerror(errno));
    }

    Dataset data;
    data.meta = DataMeta{};
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    std::size_t ncols = 0;
    std::vector<std::vector<double>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        if (stripped.front() == '#') {
            apply_meta_line(stripped, data.meta);
            continue;
        }
        const std::vector<std::string> fields = split_fields(stripped);
        if (!saw_header) {
            // The first data line must be a header; a fully numeric line
            // here means the header is missing.
            double dummy;
            bool all_numeric = true;
            for (const std::string& f : fields) {
                if (!parse_double(f, dummy)) {
                    all_numeric = false;
                    break;
                }
            }
            if (all_numeric) {
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": expected a header row, found numeric "
                                "data");
            }
            saw_header = true;
            ncols = fields.size();
            continue;
        }
        if (fields.size() != ncols) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(ncols) +
                            " columns, found " +
                            std::to_string(fields.size()));
        }
        std::vector<double> row(ncols);
        for (std::size_t c = 0; c < ncols; ++c) {
            if (!parse_double(fields[c], row[c])) {
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": column " + std::to_string(c + 1) +
                                ": non-numeric value '" + trim(fields[c]) +
                                "'");
            }
        }
        rows.push_back(std::move(row));
    }

    if (!saw_header) {
        throw DataError(path + ": empty file");
    }
    if (rows.empty()) {
        throw DataError(path + ": header but no data rows");
    }

    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index n = static_cast<Eigen::Index>(ncols) - 1;
    data.features.resize(m, n);
    data.targets.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            data.features(i, j) = rows[static_cast<std::size_t>(i)]
                                      [static_cast<std::size_t>(j)];
        }
        data.targets(i) = rows[static_cast<std::size_t>(i)][ncols - 1];
    }
    return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out = open_for_write(path);
    out << "# generator: " << generator_name(data.meta.kind) << "\n";
    out << "# seed: " << data.meta.seed << "\n";
    if (data.meta.kind == GeneratorKind::DATASET_A) {
        out << "# noise_variance: " << data.meta.noise_variance << "\n";
    }
    const Eigen::Index n = data.dim();
    for (Eigen::Index j = 0; j < n; ++j) {
        out << (n == 1 ? std::string("x") : "x" + std::to_string(j + 1))
            << ",";
    }
    out << "y\n";
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out << data.features(i, j) << ",";
        }
        out << data.targets(i) << "\n";
    }
    if (!out) {
        throw IOError("write failed for '" + path + "'");
    }
}

void save_predictions(const std::string& path, const Eigen::MatrixXd& features,
                      const Eigen::VectorXd& targets,
                      const Eigen::VectorXd& lowers,
                      const Eigen::VectorXd& uppers) {
    const Eigen::Index m = targets.size();
    if (features.rows() != m || lowers.size() != m || uppers.size() != m) {
        throw std::invalid_argument("save_predictions: length mismatch");
    }
    std::ofstream out = open_for_write(path);
    const Eigen::Index n = features.cols();
    for (Eigen::Index j = 0; j < n; ++j) {
        out << (n == 1 ? std::string("x") : "x" + std::to_string(j + 1))
            << ",";
    }
    out << "y,lower,upper\n";
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out << features(i, j) << ",";
        }
        out << targets(i) << "," << lowers(i) << "," << uppers(i) << "\n";
    }
    if (!out) {
        throw IOError("write failed for '" + path + "'");
    }
}

void save_forecast(const std::string& path, const Eigen::VectorXd& lowers,
                   const Eigen::VectorXd& uppers) {
    if (lowers.size() != uppers.size()) {
        throw std::invalid_argument("save_forecast: length mismatch");
    }
    std::ofstream out = open_for_write(path);
    out << "index,lower,upper\n";
    for (Eigen::Index i = 0; i < lowers.size(); ++i) {
        out << i << "," << lowers(i) << "," << uppers(i) << "\n";
    }
    if (!out) {
        throw IOError("write failed for '" + path + "'");
    }
}

void save_table(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_for_write(path);
    for (std::size_t j = 0; j < header.size(); ++j) {
        out << header[j] << (j + 1 < header.size() ? "," : "\n");
    }
    for (const std::vector<double>& row : rows) {
        if (row.size() != header.size()) {
            throw std::invalid_argument("save_table: row width mismatch");
        }
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << row[j] << (j + 1 < row.size() ? "," : "\n");
        }
    }
    if (!out) {
        throw IOError("write failed for '" + path + "'");
    }
}

} // namespace tubepi
