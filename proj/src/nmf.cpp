#include "courtaudit/nmf.hpp"

#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "courtaudit/rng.hpp"
#include "courtaudit/text_io.hpp"

namespace courtaudit {

using nlohmann::json;

double nmf_objective(const Eigen::MatrixXd& C, const Eigen::MatrixXd& W,
                     const Eigen::MatrixXd& H, const NmfConfig& config) {
    const double fit = 0.5 * (C - W * H).squaredNorm();
    return fit + config.l1_w * W.sum() + 0.5 * config.l2_w * W.squaredNorm() +
           config.l1_h * H.sum() + 0.5 * config.l2_h * H.squaredNorm();
}

namespace {

// Exact coordinate update of one factor per HALS: for each component j the
// non-negative minimizer of the quadratic in that column (resp. row) given
// everything else. G = C * other^T (or other^T * C), B = Gram matrix of the
// other factor.
void hals_update_w(Eigen::MatrixXd& W, const Eigen::MatrixXd& G, const Eigen::MatrixXd& B,
                   double l1, double l2) {
    const int k = static_cast<int>(W.cols());
    for (int j = 0; j < k; ++j) {
        const double denom = B(j, j) + l2;
        if (denom <= 1e-300) {
            W.col(j).setZero();  // dead component: only the L1 term remains
            continue;
        }
        Eigen::VectorXd numer = G.col(j) - W * B.col(j) + B(j, j) * W.col(j);
        numer.array() -= l1;
        W.col(j) = (numer / denom).cwiseMax(0.0);
    }
}

void hals_update_h(Eigen::MatrixXd& H, const Eigen::MatrixXd& G, const Eigen::MatrixXd& B,
                   double l1, double l2) {
    const int k = static_cast<int>(H.rows());
    for (int j = 0; j < k; ++j) {
        const double denom = B(j, j) + l2;
        if (denom <= 1e-300) {
            H.row(j).setZero();
            continue;
        }
        Eigen::RowVectorXd numer = G.row(j) - B.row(j) * H + B(j, j) * H.row(j);
        numer.array() -= l1;
        H.row(j) = (numer / denom).cwiseMax(0.0);
    }
}

void multiplicative_sweep(const Eigen::MatrixXd& C, Eigen::MatrixXd& W, Eigen::MatrixXd& H,
                          const NmfConfig& config) {
    constexpr double eps = 1e-12;
    {
        const Eigen::MatrixXd numer = C * H.transpose();
        const Eigen::MatrixXd denom =
            W * (H * H.transpose()) + config.l2_w * W +
            Eigen::MatrixXd::Constant(W.rows(), W.cols(), config.l1_w + eps);
        W = W.cwiseProduct(numer.cwiseQuotient(denom));
    }
    {
        const Eigen::MatrixXd numer = W.transpose() * C;
        const Eigen::MatrixXd denom =
            (W.transpose() * W) * H + config.l2_h * H +
            Eigen::MatrixXd::Constant(H.rows(), H.cols(), config.l1_h + eps);
        H = H.cwiseProduct(numer.cwiseQuotient(denom));
    }
}

}  // namespace

NmfModel nmf_fit(const Eigen::MatrixXd& C, const NmfConfig& config) {
    const auto m = C.rows();
    const auto n = C.cols();
    if (m == 0 || n == 0) throw std::invalid_argument("nmf_fit: empty matrix");
    if ((C.array() < 0.0).any())
        throw std::invalid_argument("nmf_fit: matrix has negative entries");
    if (config.k < 1 || config.k > std::min(m, n))
        throw std::invalid_argument("nmf_fit: k must lie in [1, min(m, n)]");
    if (config.max_iter < 1) throw std::invalid_argument("nmf_fit: max_iter must be positive");

    NmfModel model;
    model.config = config;

    // scale-matched random start on (0, sqrt(mean(C)/k)]
    Rng rng(config.seed);
    double scale = std::sqrt(C.mean() / static_cast<double>(config.k));
    if (!(scale > 0.0)) scale = 1e-8;
    model.W.resize(m, config.k);
    model.H.resize(config.k, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < config.k; ++j)
            model.W(i, j) = (1.0 - rng.uniform()) * scale;
    for (Eigen::Index i = 0; i < config.k; ++i)
        for (Eigen::Index j = 0; j < n; ++j) model.H(i, j) = (1.0 - rng.uniform()) * scale;

    model.objective_trace.push_back(nmf_objective(C, model.W, model.H, config));
    for (int iter = 0; iter < config.max_iter; ++iter) {
        if (config.multiplicative) {
            multiplicative_sweep(C, model.W, model.H, config);
        } else {
            hals_update_w(model.W, C * model.H.transpose(), model.H * model.H.transpose(),
                          config.l1_w, config.l2_w);
            hals_update_h(model.H, model.W.transpose() * C, model.W.transpose() * model.W,
                          config.l1_h, config.l2_h);
        }
        const double prev = model.objective_trace.back();
        const double cur = nmf_objective(C, model.W, model.H, config);
        model.objective_trace.push_back(cur);
        if (prev - cur < config.tol * std::max(prev, 1e-30)) break;
    }
    return model;
}

double reconstruction_error(const Eigen::MatrixXd& C, const NmfModel& model) {
    const double norm = C.norm();
    if (norm <= 0.0) throw std::invalid_argument("reconstruction_error: zero-norm matrix");
    return (C - model.W * model.H).norm() / norm;
}

namespace {

std::string matrix_to_csv(const Eigen::MatrixXd& M) {
    std::string out;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out += ',';
            out += format_double(M(i, j));
        }
        out += '\n';
    }
    return out;
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged matrix csv");
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

}  // namespace

void NmfModel::save(const std::filesystem::path& directory) const {
    std::filesystem::create_directories(directory);
    write_file_atomic(directory / "nmf_w.csv", matrix_to_csv(W));
    write_file_atomic(directory / "nmf_h.csv", matrix_to_csv(H));
    json j;
    j["k"] = config.k;
    j["l1_w"] = config.l1_w;
    j["l2_w"] = config.l2_w;
    j["l1_h"] = config.l1_h;
    j["l2_h"] = config.l2_h;
    j["tol"] = config.tol;
    j["max_iter"] = config.max_iter;
    j["seed"] = config.seed;
    j["multiplicative"] = config.multiplicative;
    j["objective_trace"] = objective_trace;
    write_file_atomic(directory / "nmf_config.json", j.dump(2) + "\n");
}

NmfModel NmfModel::load(const std::filesystem::path& directory) {
    NmfModel model;
    model.W = matrix_from_csv(read_file(directory / "nmf_w.csv"));
    model.H = matrix_from_csv(read_file(directory / "nmf_h.csv"));
    const json j = json::parse(read_file(directory / "nmf_config.json"));
    model.config.k = j.at("k").get<int>();
    model.config.l1_w = j.at("l1_w").get<double>();
    model.config.l2_w = j.at("l2_w").get<double>();
    model.config.l1_h = j.at("l1_h").get<double>();
    model.config.l2_h = j.at("l2_h").get<double>();
    model.config.tol = j.at("tol").get<double>();
    model.config.max_iter = j.at("max_iter").get<int>();
    model.config.seed = j.at("seed").get<std::uint64_t>();
    model.config.multiplicative = j.at("multiplicative").get<bool>();
    model.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    return model;
}

}  // namespace courtaudit
