#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "colopred/metrics.hpp"

namespace colopred::eval {

using metrics::CoExecutionRecord;
using metrics::Label;

// Positive class is High.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
    bool precision_zero_div = false;  // 0/0 reported as 0 and flagged
    bool recall_zero_div = false;
};

struct ClassificationReport {
    ClassMetrics low;
    ClassMetrics high;
    double accuracy = 0.0;
};

// Throws length_mismatch / empty_input.
ConfusionMatrix confusion(const std::vector<Label>& y_true,
                          const std::vector<Label>& y_pred);

ClassificationReport report(const ConfusionMatrix& cm);  // throws empty_input

// Text table in classification-report style. Metric cells are truncated (not
// rounded) to two decimals, matching how the comparison tables are quoted.
std::string format_report(const ClassificationReport& rep, const std::string& title = "");

using RecordPredictor = std::function<Label(const CoExecutionRecord&)>;

struct ModelComparison {
    std::string name;
    ConfusionMatrix cm;
    ClassificationReport rep;
};

// Scores every predictor on the evaluation set; rows ordered by accuracy
// descending (stable on ties). Throws empty_input.
std::vector<ModelComparison> compare(
    const std::vector<std::pair<std::string, RecordPredictor>>& models,
    const std::vector<CoExecutionRecord>& eval_set);

std::string format_comparison(const std::vector<ModelComparison>& rows);
// Machine-readable comparison: one row per model, full precision.
void write_comparison_csv(const std::vector<ModelComparison>& rows, std::ostream& out);
// 2x2 counts with header pred_low,pred_high; rows are true-Low then true-High.
void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out);

// x,degradation_pct,label rows for external plotting. Throws empty_input /
// missing_feature.
std::string scatter_export(const std::vector<CoExecutionRecord>& records,
                           const std::string& x_feature);

}  // namespace colopred::eval
