#include "tubepi/model_io.hpp"

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tubepi/errors.hpp"

namespace tubepi {

namespace {

constexpr const char* kVersionLine = "tubepi model v1";

std::string dbl_hex(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(bits));
    return buf;
}

double hex_dbl(const std::string& token, const std::string& path) {
    if (token.size() != 16 ||
        token.find_first_not_of("0123456789abcdef") != std::string::npos) {
        throw DataError(path + ": malformed value '" + token + "'");
    }
    const std::uint64_t bits = std::stoull(token, nullptr, 16);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

// Pull-based token reader that turns premature EOF into a clean error.
struct TokenReader {
    std::ifstream in;
    std::string path;

    std::string next() {
        std::string token;
        if (!(in >> token)) {
            throw DataError(path + ": truncated model file");
        }
        return token;
    }

    std::string expect(const std::string& want) {
        const std::string got = next();
        if (got != want) {
            throw DataError(path + ": expected '" + want + "', found '" + got +
                            "'");
        }
        return got;
    }

    double next_double() { return hex_dbl(next(), path); }

    long next_long() {
        const std::string token = next();
        try {
            return std::stol(token);
        } catch (const std::exception&) {
            throw DataError(path + ": expected an integer, found '" + token +
                            "'");
        }
    }

    std::uint64_t next_u64() {
        const std::string token = next();
        try {
            return std::stoull(token);
        } catch (const std::exception&) {
            throw DataError(path + ": expected an integer, found '" + token +
                            "'");
        }
    }
};

void write_matrix(std::ofstream& out, const char* tag,
                  const Eigen::MatrixXd& m) {
    out << tag << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << dbl_hex(m(i, j)) << (j + 1 < m.cols() ? " " : "\n");
        }
    }
}

void write_vector(std::ofstream& out, const char* tag,
                  const Eigen::VectorXd& v) {
    out << tag << " " << v.size() << "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << dbl_hex(v[i]) << (i + 1 < v.size() ? " " : "\n");
    }
}

Eigen::MatrixXd read_matrix(TokenReader& tr, const char* tag) {
    tr.expect(tag);
    const long rows = tr.next_long();
    const long cols = tr.next_long();
    if (rows < 0 || cols < 0) {
        throw DataError(tr.path + ": negative matrix shape");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = tr.next_double();
        }
    }
    return m;
}

Eigen::VectorXd read_vector(TokenReader& tr, const char* tag) {
    tr.expect(tag);
    const long n = tr.next_long();
    if (n < 0) {
        throw DataError(tr.path + ": negative vector length");
    }
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = tr.next_double();
    }
    return v;
}

std::ofstream open_model_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IOError("cannot open '" + path +
                      "' for writing: " + std::strerror(errno));
    }
    out << kVersionLine << "\n";
    return out;
}

const char* loss_kind_name(NetLossKind kind) {
    switch (kind) {
    case NetLossKind::TUBE:
        return "TUBE";
    case NetLossKind::PINBALL_PAIR:
        return "PINBALL_PAIR";
    case NetLossKind::QD:
        return "QD";
    }
    return "TUBE";
}

NetLossKind loss_kind_from(const std::string& name, const std::string& path) {
    if (name == "TUBE") return NetLossKind::TUBE;
    if (name == "PINBALL_PAIR") return NetLossKind::PINBALL_PAIR;
    if (name == "QD") return NetLossKind::QD;
    throw DataError(path + ": unknown loss kind '" + name + "'");
}

} // namespace

void save_model(const std::string& path, const PIKernelModel& model) {
    std::ofstream out = open_model_out(path);
    out << "kind kernel\n";
    out << "kernel " << (model.kernel.kind == KernelKind::RBF ? "RBF" : "LINEAR")
        << " " << dbl_hex(model.kernel.gamma) << "\n";
    out << "params " << dbl_hex(model.params.t) << " " << dbl_hex(model.params.r)
        << " " << dbl_hex(model.params.delta) << " "
        << dbl_hex(model.params.lambda) << "\n";
    out << "meta " << model.trained_seed << " " << model.iters_run << " "
        << model.instability << " " << dbl_hex(model.final_update_norm) << " "
        << dbl_hex(model.final_objective) << "\n";
    write_matrix(out, "anchors", model.anchors);
    write_vector(out, "alpha", model.alpha);
    write_vector(out, "beta", model.beta);
    out << "b1 " << dbl_hex(model.b1) << "\n";
    out << "b2 " << dbl_hex(model.b2) << "\n";
    out << "end\n";
    if (!out) {
        throw IOError("write failed for '" + path + "'");
    }
}

void save_model(const std::string& path, const DenseNet& net,
                const NetLossSpec& loss) {
    std::ofstream out = open_model_out(path);
    out << "kind net\n";
    out << "net " << net.config.input_dim << " " << net.config.hidden_units
        << " " << dbl_hex(net.config.init_scale) << " " << net.config.seed
        << "\n";
    out << "loss " << loss_kind_name(loss.kind) << " " << dbl_hex(loss.params.t)
        << " " << dbl_hex(loss.params.r) << " " << dbl_hex(loss.params.delta)
        << " " << dbl_hex(loss.q_low) << " " << dbl_hex(loss.q_high) << " "
        << dbl_hex(loss.lambda_qd) << " " << dbl_hex(loss.soften_s) << "\n";
    write_matrix(out, "W1", net.W1);
    write_vector(out, "c1", net.c1);
    write_matrix(out, "W2", net.W2);
    write_vector(out, "c2", net.c2);
    out << "end\n";
    if (!out) {
        throw IOError("write failed for '" + path + "'");
    }
}

LoadedModel load_model(const std::string& path) {
    TokenReader tr;
    tr.in.open(path);
    tr.path = path;
    if (!tr.in) {
        throw IOError("cannot open '" + path + "': " + std::strerror(errno));
    }
    std::string version;
    std::getline(tr.in, version);
    if (!version.empty() && version.back() == '\r') {
        version.pop_back();
    }
    if (version != kVersionLine) {
        throw DataError(path + ": unsupported model format '" + version + "'");
    }

    LoadedModel out;
    tr.expect("kind");
    const std::string kind = tr.next();
    if (kind == "kernel") {
        out.kind = ModelKind::KERNEL;
        PIKernelModel& m = out.kernel;
        tr.expect("kernel");
        const std::string kname = tr.next();
        if (kname == "RBF") {
            m.kernel.kind = KernelKind::RBF;
        } else if (kname == "LINEAR") {
            m.kernel.kind = KernelKind::LINEAR;
        } else {
            throw DataError(path + ": unknown kernel '" + kname + "'");
        }
        m.kernel.gamma = tr.next_double();
        tr.expect("params");
        m.params.t = tr.next_double();
        m.params.r = tr.next_double();
        m.params.delta = tr.next_double();
        m.params.lambda = tr.next_double();
        tr.expect("meta");
        m.trained_seed = tr.next_u64();
        m.iters_run = tr.next_long();
        m.instability = tr.next_long();
        m.final_update_norm = tr.next_double();
        m.final_objective = tr.next_double();
        m.anchors = read_matrix(tr, "anchors");
        m.alpha = read_vector(tr, "alpha");
        m.beta = read_vector(tr, "beta");
        if (m.alpha.size() != m.anchors.rows() ||
            m.beta.size() != m.anchors.rows()) {
            throw DataError(path + ": coefficient/anchor length mismatch");
        }
        tr.expect("b1");
        m.b1 = tr.next_double();
        tr.expect("b2");
        m.b2 = tr.next_double();
    } else if (kind == "net") {
        out.kind = ModelKind::NET;
        DenseNet& n = out.net;
        tr.expect("net");
        n.config.input_dim = tr.next_long();
        n.config.hidden_units = tr.next_long();
        n.config.init_scale = tr.next_double();
        n.config.seed = tr.next_u64();
        tr.expect("loss");
        out.net_loss.kind = loss_kind_from(tr.next(), path);
        out.net_loss.params.t = tr.next_double();
        out.net_loss.params.r = tr.next_double();
        out.net_loss.params.delta = tr.next_double();
        out.net_loss.q_low = tr.next_double();
        out.net_loss.q_high = tr.next_double();
        out.net_loss.lambda_qd = tr.next_double();
        out.net_loss.soften_s = tr.next_double();
        n.W1 = read_matrix(tr, "W1");
        n.c1 = read_vector(tr, "c1");
        n.W2 = read_matrix(tr, "W2");
        n.c2 = read_vector(tr, "c2");
        if (n.W1.rows() != n.config.hidden_units ||
            n.W1.cols() != n.config.input_dim || n.W2.rows() != 2 ||
            n.W2.cols() != n.config.hidden_units || n.c1.size() != n.W1.rows() ||
            n.c2.size() != 2) {
            throw DataError(path + ": layer shape mismatch");
        }
    } else {
        throw DataError(path + ": unknown model kind '" + kind + "'");
    }
    tr.expect("end");
    return out;
}

} // namespace tubepi
