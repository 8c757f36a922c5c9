#include "colopred/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <json.hpp>

#include "colopred/error.hpp"
#include "detail_text.hpp"

namespace colopred::features {

using counters::is_missing;

std::pair<FeatureMatrix, std::vector<metrics::Label>> make_feature_matrix(
    const std::vector<metrics::CoExecutionRecord>& records) {
    if (records.empty())
        throw Error(Errc::empty_input, "no records");
    FeatureMatrix m;
    m.names = records.front().features.names;
    m.data.reserve(records.size() * m.names.size());
    std::vector<metrics::Label> labels;
    labels.reserve(records.size());
    for (const auto& r : records) {
        if (r.features.names != m.names)
            throw Error(Errc::schema_mismatch,
                        "record " + r.ve_name + "|" + r.vh_name + " has a different schema");
        m.row_ids.push_back(r.ve_name + "|" + r.vh_name);
        m.data.insert(m.data.end(), r.features.values.begin(), r.features.values.end());
        labels.push_back(r.degradation.label);
    }
    return {std::move(m), std::move(labels)};
}

FeatureMatrix drop_missing(const FeatureMatrix& m) {
    const std::size_t n = m.rows(), p = m.cols();
    // Columns first: a dead counter must not delete every row.
    std::vector<std::size_t> keep_cols;
    for (std::size_t j = 0; j < p; ++j) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            if (is_missing(m.at(i, j))) ok = false;
        if (ok) keep_cols.push_back(j);
    }
    std::vector<std::size_t> keep_rows;
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = true;
        for (std::size_t j : keep_cols)
            if (is_missing(m.at(i, j))) { ok = false; break; }
        if (ok) keep_rows.push_back(i);
    }
    if (keep_cols.empty() || keep_rows.empty())
        throw Error(Errc::empty_result, "nothing survives missing-value removal");

    FeatureMatrix out;
    for (std::size_t j : keep_cols) out.names.push_back(m.names[j]);
    out.data.reserve(keep_rows.size() * keep_cols.size());
    for (std::size_t i : keep_rows) {
        out.row_ids.push_back(m.row_ids[i]);
        for (std::size_t j : keep_cols) out.data.push_back(m.at(i, j));
    }
    return out;
}

namespace {

void require_observed(const FeatureMatrix& m, const char* op) {
    for (double v : m.data)
        if (is_missing(v))
            throw Error(Errc::missing_values,
                        std::string(op) + " requires a fully observed matrix");
}

// Column means and population standard deviations.
void column_moments(const FeatureMatrix& m, std::vector<double>& mean,
                    std::vector<double>& sd) {
    const std::size_t n = m.rows(), p = m.cols();
    mean.assign(p, 0.0);
    sd.assign(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) mean[j] += m.at(i, j);
    for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const double d = m.at(i, j) - mean[j];
            sd[j] += d * d;
        }
    for (std::size_t j = 0; j < p; ++j) sd[j] = std::sqrt(sd[j] / static_cast<double>(n));
}

void require_variance(const FeatureMatrix& m, const std::vector<double>& sd) {
    for (std::size_t j = 0; j < sd.size(); ++j)
        if (!(sd[j] > 0.0))
            throw Error(Errc::zero_variance_column,
                        "column '" + m.names[j] + "' has zero variance");
}

}  // namespace

std::vector<double> correlation_matrix(const FeatureMatrix& m) {
    require_observed(m, "correlation_matrix");
    const std::size_t n = m.rows(), p = m.cols();
    if (n < 2)
        throw Error(Errc::degenerate_input, "need at least 2 rows");
    std::vector<double> mean, sd;
    column_moments(m, mean, sd);
    require_variance(m, sd);

    std::vector<double> corr(p * p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        corr[a * p + a] = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (m.at(i, a) - mean[a]) * (m.at(i, b) - mean[b]);
            double c = s / (static_cast<double>(n) * sd[a] * sd[b]);
            c = std::clamp(c, -1.0, 1.0);
            corr[a * p + b] = corr[b * p + a] = c;
        }
    }
    return corr;
}

PcaModel pca_fit(const FeatureMatrix& m, const Retain& retain) {
    require_observed(m, "pca_fit");
    const std::size_t n = m.rows(), p = m.cols();
    if (n < 2)
        throw Error(Errc::degenerate_input, "PCA needs at least 2 rows");
    if (p == 0)
        throw Error(Errc::degenerate_input, "PCA needs at least 1 column");
    if (retain.by_count() && retain.k == 0)
        throw Error(Errc::bad_format, "retain.k must be >= 1");
    if (!retain.by_count() && !(retain.variance > 0.0 && retain.variance <= 1.0))
        throw Error(Errc::bad_format, "retain.variance must lie in (0,1]");

    PcaModel model;
    model.feature_names = m.names;
    column_moments(m, model.mean, model.scale);
    require_variance(m, model.scale);

    // Covariance of the standardized data (n-1 divisor).
    Eigen::MatrixXd z(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            z(i, j) = (m.at(i, j) - model.mean[j]) / model.scale[j];
    Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw Error(Errc::degenerate_input, "eigendecomposition failed");

    // Descending eigenvalue order, stable so equal eigenvalues keep solver order.
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return eig.eigenvalues()(a) > eig.eigenvalues()(b);
    });

    double total = 0.0;
    for (std::size_t j = 0; j < p; ++j) total += std::max(0.0, eig.eigenvalues()(j));
    const double lambda_max = std::max(0.0, eig.eigenvalues()(order[0]));
    const double rank_tol = lambda_max * 1e-12;
    std::size_t rank = 0;
    for (std::size_t j : order)
        if (eig.eigenvalues()(j) > rank_tol) ++rank;

    std::size_t k = 0;
    if (retain.by_count()) {
        k = std::min(retain.k, rank);
    } else {
        double cum = 0.0;
        for (std::size_t idx = 0; idx < rank; ++idx) {
            cum += std::max(0.0, eig.eigenvalues()(order[idx])) / total;
            ++k;
            if (cum >= retain.variance - 1e-12) break;
        }
    }
    if (k == 0)
        throw Error(Errc::degenerate_input, "no components retained");

    model.components.assign(k * p, 0.0);
    model.explained_variance_ratio.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t src = order[c];
        model.explained_variance_ratio[c] =
            std::max(0.0, eig.eigenvalues()(src)) / total;
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        // Sign convention: the largest-magnitude loading is non-negative.
        std::size_t arg = 0;
        for (std::size_t j = 1; j < p; ++j)
            if (std::abs(v(j)) > std::abs(v(arg))) arg = j;
        if (v(arg) < 0.0) v = -v;
        for (std::size_t j = 0; j < p; ++j) model.components[c * p + j] = v(j);
    }
    return model;
}

namespace {

void require_schema(const PcaModel& model, const FeatureMatrix& m) {
    if (m.names != model.feature_names)
        throw Error(Errc::schema_mismatch,
                    "matrix columns do not match the fitted feature set");
}

}  // namespace

FeatureMatrix pca_transform(const PcaModel& model, const FeatureMatrix& m) {
    require_schema(model, m);
    require_observed(m, "pca_transform");
    const std::size_t n = m.rows(), p = model.n_features(), k = model.n_components();
    FeatureMatrix out;
    out.row_ids = m.row_ids;
    for (std::size_t c = 0; c < k; ++c) out.names.push_back("PC" + std::to_string(c + 1));
    out.data.assign(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < p; ++j)
                s += (m.at(i, j) - model.mean[j]) / model.scale[j] *
                     model.components[c * p + j];
            out.data[i * k + c] = s;
        }
    return out;
}

FeatureMatrix pca_inverse_transform(const PcaModel& model, const FeatureMatrix& scores) {
    const std::size_t n = scores.rows(), p = model.n_features(), k = model.n_components();
    if (scores.cols() != k)
        throw Error(Errc::schema_mismatch, "score matrix has wrong column count");
    FeatureMatrix out;
    out.names = model.feature_names;
    out.row_ids = scores.row_ids;
    out.data.assign(n * p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c)
                s += scores.at(i, c) * model.components[c * p + j];
            out.data[i * p + j] = s * model.scale[j] + model.mean[j];
        }
    return out;
}

std::vector<std::string> top_loading_features(const PcaModel& model,
                                              std::size_t per_component) {
    if (per_component == 0)
        throw Error(Errc::bad_format, "per_component must be >= 1");
    const std::size_t p = model.n_features(), k = model.n_components();
    std::vector<std::string> out;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::size_t> idx(p);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(model.components[c * p + a]) >
                   std::abs(model.components[c * p + b]);
        });
        for (std::size_t r = 0; r < std::min(per_component, p); ++r) {
            const std::string& name = model.feature_names[idx[r]];
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        }
    }
    return out;
}

FeatureMatrix select_columns(const FeatureMatrix& m, const std::vector<std::string>& names) {
    std::vector<std::size_t> cols;
    for (const auto& name : names) {
        auto it = std::find(m.names.begin(), m.names.end(), name);
        if (it == m.names.end())
            throw Error(Errc::missing_feature, "column '" + name + "' not in matrix");
        cols.push_back(static_cast<std::size_t>(it - m.names.begin()));
    }
    FeatureMatrix out;
    out.names = names;
    out.row_ids = m.row_ids;
    out.data.reserve(m.rows() * cols.size());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j : cols) out.data.push_back(m.at(i, j));
    return out;
}

using nlohmann::json;

void save_pca_json(const PcaModel& model, std::ostream& out) {
    json doc{{"format", "pca"},
             {"version", 1},
             {"feature_names", model.feature_names},
             {"mean", model.mean},
             {"scale", model.scale},
             {"n_components", model.n_components()},
             {"components", model.components},
             {"explained_variance_ratio", model.explained_variance_ratio}};
    out << doc.dump(2) << '\n';
}

PcaModel load_pca_json(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::bad_model_file, std::string("invalid JSON: ") + e.what());
    }
    try {
        if (doc.at("format") != "pca" || doc.at("version") != 1)
            throw Error(Errc::bad_model_file, "unsupported PCA file format/version");
        PcaModel m;
        m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        m.mean = doc.at("mean").get<std::vector<double>>();
        m.scale = doc.at("scale").get<std::vector<double>>();
        m.components = doc.at("components").get<std::vector<double>>();
        m.explained_variance_ratio =
            doc.at("explained_variance_ratio").get<std::vector<double>>();
        const std::size_t p = m.feature_names.size(), k = m.explained_variance_ratio.size();
        if (m.mean.size() != p || m.scale.size() != p || m.components.size() != k * p ||
            doc.at("n_components").get<std::size_t>() != k)
            throw Error(Errc::bad_model_file, "inconsistent PCA dimensions");
        return m;
    } catch (const json::exception& e) {
        throw Error(Errc::bad_model_file, std::string("malformed PCA file: ") + e.what());
    }
}

void write_matrix_csv(const FeatureMatrix& m, std::ostream& out) {
    out << "row_id";
    for (const auto& n : m.names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << m.row_ids[i];
        for (std::size_t j = 0; j < m.cols(); ++j)
            out << ',' << detail::fmt_double(m.at(i, j));
        out << '\n';
    }
}

}  // namespace colopred::features
