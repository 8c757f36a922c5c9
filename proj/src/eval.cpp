#include "colopred/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "colopred/error.hpp"
#include "detail_text.hpp"

namespace colopred::eval {

ConfusionMatrix confusion(const std::vector<Label>& y_true,
                          const std::vector<Label>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw Error(Errc::length_mismatch, "y_true and y_pred lengths differ");
    if (y_true.empty())
        throw Error(Errc::empty_input, "nothing to score");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] == Label::High;
        const bool p = y_pred[i] == Label::High;
        if (t && p) ++cm.tp;
        else if (!t && p) ++cm.fp;
        else if (!t && !p) ++cm.tn;
        else ++cm.fn;
    }
    return cm;
}

namespace {

ClassMetrics class_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                           std::uint64_t support) {
    ClassMetrics m;
    m.support = support;
    if (tp + fp == 0) {
        m.precision = 0.0;
        m.precision_zero_div = true;
    } else {
        m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
        m.recall = 0.0;
        m.recall_zero_div = true;
    } else {
        m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

// Metric cells are truncated, not rounded, to two decimals (46/49 prints 0.93).
std::string trunc2(double v) {
    const auto scaled = static_cast<long long>(v * 100.0 + 1e-9);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%02lld", scaled / 100, scaled % 100);
    return buf;
}

}  // namespace

ClassificationReport report(const ConfusionMatrix& cm) {
    if (cm.total() == 0)
        throw Error(Errc::empty_input, "empty confusion matrix");
    ClassificationReport rep;
    // The Low row treats Low as its own positive class.
    rep.high = class_metrics(cm.tp, cm.fp, cm.fn, cm.tp + cm.fn);
    rep.low = class_metrics(cm.tn, cm.fn, cm.fp, cm.tn + cm.fp);
    rep.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    return rep;
}

std::string format_report(const ClassificationReport& rep, const std::string& title) {
    std::string out;
    if (!title.empty()) out += title + "\n";
    char line[128];
    std::snprintf(line, sizeof(line), "%10s %10s %8s %9s %8s\n", "class", "precision",
                  "recall", "f1-score", "support");
    out += line;
    auto row = [&](const char* name, const ClassMetrics& m) {
        std::snprintf(line, sizeof(line), "%10s %10s %8s %9s %8llu\n", name,
                      trunc2(m.precision).c_str(), trunc2(m.recall).c_str(),
                      trunc2(m.f1).c_str(),
                      static_cast<unsigned long long>(m.support));
        out += line;
    };
    row("Low", rep.low);
    row("High", rep.high);
    std::snprintf(line, sizeof(line), "%10s %29s %8llu\n", "accuracy",
                  trunc2(rep.accuracy).c_str(),
                  static_cast<unsigned long long>(rep.low.support + rep.high.support));
    out += line;
    return out;
}

std::vector<ModelComparison> compare(
    const std::vector<std::pair<std::string, RecordPredictor>>& models,
    const std::vector<CoExecutionRecord>& eval_set) {
    if (eval_set.empty())
        throw Error(Errc::empty_input, "evaluation set is empty");
    std::vector<Label> truth;
    truth.reserve(eval_set.size());
    for (const auto& r : eval_set) truth.push_back(r.degradation.label);

    std::vector<ModelComparison> rows;
    for (const auto& [name, predictor] : models) {
        std::vector<Label> pred;
        pred.reserve(eval_set.size());
        for (const auto& r : eval_set) pred.push_back(predictor(r));
        ModelComparison row;
        row.name = name;
        row.cm = confusion(truth, pred);
        row.rep = report(row.cm);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ModelComparison& a, const ModelComparison& b) {
                         return a.rep.accuracy > b.rep.accuracy;
                     });
    return rows;
}

std::string format_comparison(const std::vector<ModelComparison>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += format_report(row.rep, "== " + row.name + " ==");
        char line[160];
        std::snprintf(line, sizeof(line),
                      "confusion (true Low/High x pred Low/High): [[%llu, %llu], [%llu, %llu]]\n\n",
                      static_cast<unsigned long long>(row.cm.tn),
                      static_cast<unsigned long long>(row.cm.fp),
                      static_cast<unsigned long long>(row.cm.fn),
                      static_cast<unsigned long long>(row.cm.tp));
        out += line;
    }
    return out;
}

void write_comparison_csv(const std::vector<ModelComparison>& rows, std::ostream& out) {
    out << "model,accuracy,precision_low,recall_low,f1_low,support_low,"
           "precision_high,recall_high,f1_high,support_high,tp,fp,tn,fn\n";
    for (const auto& r : rows) {
        out << r.name << ',' << detail::fmt_double(r.rep.accuracy) << ','
            << detail::fmt_double(r.rep.low.precision) << ','
            << detail::fmt_double(r.rep.low.recall) << ','
            << detail::fmt_double(r.rep.low.f1) << ',' << r.rep.low.support << ','
            << detail::fmt_double(r.rep.high.precision) << ','
            << detail::fmt_double(r.rep.high.recall) << ','
            << detail::fmt_double(r.rep.high.f1) << ',' << r.rep.high.support << ','
            << r.cm.tp << ',' << r.cm.fp << ',' << r.cm.tn << ',' << r.cm.fn << '\n';
    }
}

void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out) {
    out << "pred_low,pred_high\n";
    out << cm.tn << ',' << cm.fp << '\n';  // true Low
    out << cm.fn << ',' << cm.tp << '\n';  // true High
}

std::string scatter_export(const std::vector<CoExecutionRecord>& records,
                           const std::string& x_feature) {
    if (records.empty())
        throw Error(Errc::empty_input, "no records to export");
    std::string out = "x,degradation_pct,label\n";
    for (const auto& r : records) {
        out += detail::fmt_double(r.features.at(x_feature));
        out += ',';
        out += detail::fmt_double(r.degradation.pd_percent);
        out += ',';
        out += metrics::label_name(r.degradation.label);
        out += '\n';
    }
    return out;
}

}  // namespace colopred::eval
