#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "colopred/features.hpp"
#include "colopred/metrics.hpp"

namespace colopred::model {

using features::FeatureMatrix;
using metrics::Label;

// ---------------------------------------------------------------------------
// Shared training configuration
// ---------------------------------------------------------------------------

enum class ClassWeight { none, balanced };

struct TrainConfig {
    int n_trees = 200;
    int max_depth = 4;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    double l2_leaf_penalty = 1.0;
    double subsample = 1.0;  // row fraction per tree, (0,1]
    std::uint64_t seed = 0;
    ClassWeight class_weight = ClassWeight::balanced;
};

// ---------------------------------------------------------------------------
// Gradient-boosted trees (binary logistic objective, second-order splits)
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // goes left when x[feature] < threshold
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    double value(std::span<const double> row) const;
};

struct GbdtModel {
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;
    double learning_rate = 0.1;
    double base_score = 0.0;  // log-odds prior
    TrainConfig config;       // echo of the training configuration

    // base_score + learning_rate * sum of tree outputs
    double margin(std::span<const double> row) const;
};

// Logistic-loss pieces used by boosting, exposed for direct verification
// against finite differences. `margin` is the raw score s, y in {0,1}.
double logistic_loss(double margin, double y, double weight = 1.0);
double logistic_grad(double margin, double y, double weight = 1.0);
double logistic_hess(double margin, double y, double weight = 1.0);

// Trains the boosted ensemble. Requires a fully observed matrix with both
// classes present; deterministic under cfg.seed.
// Throws single_class_training, missing_values, degenerate_input.
GbdtModel train_gbdt(const FeatureMatrix& X, const std::vector<Label>& y,
                     const TrainConfig& cfg);

// Probability of the High class for a row aligned with feature_names.
double predict_proba(const GbdtModel& model, std::span<const double> row);

// Name-aligned scoring; throws schema_mismatch when a feature is absent.
double predict_proba(const GbdtModel& model, const counters::FeatureVector& x);

inline Label predict_label(double prob_high, double threshold = 0.5) {
    return prob_high >= threshold ? Label::High : Label::Low;
}

// ---------------------------------------------------------------------------
// Single CART tree and random forest (gini splits, majority vote)
// ---------------------------------------------------------------------------

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 8;
    int min_samples_leaf = 1;
    double subsample = 1.0;  // per-tree row fraction, drawn without replacement
    int mtry = -1;           // features tried per split; -1 = sqrt(p), 0 = all
    std::uint64_t seed = 0;
};

// Leaves hold the High-vote fraction of their training rows.
Tree train_cart(const FeatureMatrix& X, const std::vector<Label>& y,
                const ForestConfig& cfg, std::uint64_t seed);

struct ForestModel {
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;
    ForestConfig config;
};

ForestModel train_random_forest(const FeatureMatrix& X, const std::vector<Label>& y,
                                const ForestConfig& cfg);

// Fraction of trees voting High (each tree votes by its leaf majority; a tied
// leaf votes Low).
double predict_proba(const ForestModel& model, std::span<const double> row);
double predict_proba(const ForestModel& model, const counters::FeatureVector& x);

// ---------------------------------------------------------------------------
// Elastic-net logistic regression (full-batch proximal gradient descent)
// ---------------------------------------------------------------------------

struct LinearModel {
    std::vector<std::string> feature_names;
    std::vector<double> weights;
    double bias = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    bool converged = true;  // gradient tolerance reached within the epoch budget
};

LinearModel train_logistic_elasticnet(const FeatureMatrix& X, const std::vector<Label>& y,
                                      double l1, double l2, int epochs = 2000,
                                      std::uint64_t seed = 0,
                                      ClassWeight class_weight = ClassWeight::balanced);

double predict_proba(const LinearModel& model, std::span<const double> row);
double predict_proba(const LinearModel& model, const counters::FeatureVector& x);

// ---------------------------------------------------------------------------
// CPU-load threshold baseline
// ---------------------------------------------------------------------------

struct BaselineModel {
    double cpu_load_threshold_percent = 100.0;
    std::string cpu_load_feature = "VH_cpu_load_mean";
};

// High iff the record's CPU-load feature is at or above the threshold.
// Throws missing_feature.
Label baseline_predict(const BaselineModel& b, const metrics::CoExecutionRecord& record);

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

using RowPredictor = std::function<Label(std::span<const double>)>;
using TrainFn = std::function<RowPredictor(const FeatureMatrix&, const std::vector<Label>&,
                                           std::uint64_t seed)>;

enum class CvMetric { accuracy, f1_high };

struct CvResult {
    std::vector<double> fold_scores;
    double mean_score = 0.0;
};

// Stratified k-fold: per-class shuffled round-robin assignment, deterministic
// under seed; per-fold training seeds are derived from (seed, fold).
// Throws insufficient_data when k < 2, n < k, or a class has fewer than k rows.
CvResult cross_validate(const TrainFn& trainer, const FeatureMatrix& X,
                        const std::vector<Label>& y, int k = 5, std::uint64_t seed = 0,
                        CvMetric metric = CvMetric::accuracy);

// Deterministic stratified holdout split; returns row indices (train, test).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<Label>& y, double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Serialization (versioned JSON; loading validates feature indices)
// ---------------------------------------------------------------------------

void save_gbdt_json(const GbdtModel& model, std::ostream& out);
GbdtModel load_gbdt_json(std::istream& in);
void save_forest_json(const ForestModel& model, std::ostream& out);
ForestModel load_forest_json(std::istream& in);
void save_linear_json(const LinearModel& model, std::ostream& out);
LinearModel load_linear_json(std::istream& in);

}  // namespace colopred::model
