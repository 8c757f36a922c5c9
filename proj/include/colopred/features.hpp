#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "colopred/counters.hpp"
#include "colopred/metrics.hpp"

namespace colopred::features {

// Dense row-major n x p matrix with named columns; cells may be missing (NaN).
struct FeatureMatrix {
    std::vector<std::string> names;    // p unique column names
    std::vector<std::string> row_ids;  // n opaque row identifiers
    std::vector<double> data;          // row-major, n*p

    std::size_t rows() const { return row_ids.size(); }
    std::size_t cols() const { return names.size(); }
    double& at(std::size_t i, std::size_t j) { return data[i * names.size() + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * names.size() + j]; }
    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * names.size(), names.size()};
    }
};

// Builds the matrix (and label vector) from dataset records. Rows keep record
// order; row ids are "<ve_name>|<vh_name>". All records must share one feature
// schema (throws schema_mismatch).
std::pair<FeatureMatrix, std::vector<metrics::Label>> make_feature_matrix(
    const std::vector<metrics::CoExecutionRecord>& records);

// Removes every column containing a missing value, then every remaining row
// containing one (columns first, so a dead counter cannot wipe out all rows).
// Throws empty_result if nothing survives.
FeatureMatrix drop_missing(const FeatureMatrix& m);

// Pearson correlation matrix (p x p, row-major). Requires fully observed
// columns with nonzero variance; throws zero_variance_column naming the column.
std::vector<double> correlation_matrix(const FeatureMatrix& m);

struct PcaModel {
    std::vector<std::string> feature_names;       // p fitted columns
    std::vector<double> mean;                     // p
    std::vector<double> scale;                    // p per-feature standard deviations
    std::vector<double> components;               // row-major k x p, orthonormal rows
    std::vector<double> explained_variance_ratio;  // k, non-increasing

    std::size_t n_components() const { return explained_variance_ratio.size(); }
    std::size_t n_features() const { return feature_names.size(); }
};

// Retention rule: either the smallest k whose cumulative explained-variance
// ratio reaches `variance`, or exactly min(k, rank) components.
struct Retain {
    static Retain by_k(std::size_t k) { return {k, -1.0}; }
    static Retain by_variance(double v) { return {0, v}; }
    std::size_t k = 0;
    double variance = -1.0;  // in (0,1] when active
    bool by_count() const { return variance < 0.0; }
};

// Standardizes columns (z-score), eigendecomposes the correlation structure and
// keeps components per `retain`. Sign convention: each component's
// largest-magnitude entry is non-negative; equal eigenvalues keep solver order.
// Throws zero_variance_column, degenerate_input (n < 2), missing_values.
PcaModel pca_fit(const FeatureMatrix& m, const Retain& retain);

// Projects rows onto the fitted components; columns come back as PC1..PCk.
// Column names/order must match the fit exactly (schema_mismatch otherwise).
FeatureMatrix pca_transform(const PcaModel& model, const FeatureMatrix& m);

// Maps PC scores back to the original feature space (un-standardized).
FeatureMatrix pca_inverse_transform(const PcaModel& model, const FeatureMatrix& scores);

// For each retained component, the `per_component` feature names with largest
// absolute loading; de-duplicated preserving first occurrence.
std::vector<std::string> top_loading_features(const PcaModel& model,
                                              std::size_t per_component);

// Column subset in the given order; throws missing_feature for unknown names.
FeatureMatrix select_columns(const FeatureMatrix& m,
                             const std::vector<std::string>& names);

// Versioned JSON (mean/scale/components/explained_variance_ratio/feature_names).
void save_pca_json(const PcaModel& model, std::ostream& out);
PcaModel load_pca_json(std::istream& in);

void write_matrix_csv(const FeatureMatrix& m, std::ostream& out);

}  // namespace colopred::features
