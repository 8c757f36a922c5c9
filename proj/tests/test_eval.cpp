#include <doctest.h>

#include <sstream>

#include "colopred/eval.hpp"
#include "colopred/model.hpp"
#include "colopred/rng.hpp"
#include "test_util.hpp"

using namespace colopred;
using namespace colopred::eval;
using metrics::Label;

namespace {

metrics::CoExecutionRecord rec(const std::string& ve, double cpu_load, double pd) {
    metrics::CoExecutionRecord r;
    r.ve_name = ve;
    r.vh_name = "vh";
    r.t_solo_ve = 100.0;
    r.t_coloc_ve = 100.0 + pd;
    r.degradation = metrics::classify_degradation(r.t_solo_ve, r.t_coloc_ve);
    r.features.names = {"VH_cpu_load_mean"};
    r.features.values = {cpu_load};
    return r;
}

}  // namespace

TEST_CASE("confusion counts the four cells") {
    std::vector<Label> t = {Label::High, Label::Low, Label::High, Label::Low};
    auto all_right = confusion(t, t);
    CHECK(all_right.fp == 0);
    CHECK(all_right.fn == 0);
    CHECK(all_right.tp == 2);
    CHECK(all_right.tn == 2);

    std::vector<Label> flipped = {Label::Low, Label::High, Label::Low, Label::High};
    auto all_wrong = confusion(t, flipped);
    CHECK(all_wrong.tp == 0);
    CHECK(all_wrong.tn == 0);
    CHECK(all_wrong.fp == 2);
    CHECK(all_wrong.fn == 2);

    CHECK_ERRC(confusion(t, {Label::Low}), Errc::length_mismatch);
    CHECK_ERRC(confusion({}, {}), Errc::empty_input);
}

TEST_CASE("report on the 49-pair comparison counts") {
    // 10 High / 39 Low truth; 7 High hits, no Low misses.
    ConfusionMatrix cm{/*tp=*/7, /*fp=*/0, /*tn=*/39, /*fn=*/3};
    auto rep = report(cm);
    CHECK(rep.high.recall == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(rep.high.precision == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.accuracy == doctest::Approx(46.0 / 49.0).epsilon(1e-12));
    CHECK(rep.low.recall == doctest::Approx(1.0));
    CHECK(rep.high.support == 10);
    CHECK(rep.low.support == 39);

    // the text table truncates at two decimals
    auto text = format_report(rep);
    CHECK(text.find("0.93") != std::string::npos);   // accuracy cell
    CHECK(text.find("0.70") != std::string::npos);   // High recall
    CHECK(text.find("1.00") != std::string::npos);
}

TEST_CASE("report on the large holdout counts") {
    ConfusionMatrix cm{/*tp=*/98, /*fp=*/3, /*tn=*/868, /*fn=*/11};
    auto rep = report(cm);
    CHECK(rep.high.precision == doctest::Approx(98.0 / 101.0).epsilon(1e-12));
    CHECK(rep.high.recall == doctest::Approx(98.0 / 109.0).epsilon(1e-12));
    CHECK(std::abs(rep.high.precision - 0.97) < 0.005);
    CHECK(std::abs(rep.high.recall - 0.90) < 0.005);
    CHECK(rep.high.support == 109);
    CHECK(rep.low.support == 871);
    CHECK(rep.accuracy == doctest::Approx(966.0 / 980.0));

    ConfusionMatrix perfect{5, 0, 10, 0};
    auto all_one = report(perfect);
    CHECK(all_one.accuracy == 1.0);
    CHECK(all_one.high.f1 == 1.0);
    CHECK(all_one.low.f1 == 1.0);

    ConfusionMatrix no_pred_high{0, 0, 10, 2};
    auto degen = report(no_pred_high);
    CHECK(degen.high.precision == 0.0);
    CHECK(degen.high.precision_zero_div);
    CHECK_FALSE(degen.high.recall_zero_div);
    CHECK(degen.high.f1 == 0.0);
}

TEST_CASE("accuracy identity and joint-permutation invariance") {
    Rng rng(3);
    std::vector<Label> t, p;
    for (int i = 0; i < 200; ++i) {
        t.push_back(rng.next_below(4) == 0 ? Label::High : Label::Low);
        p.push_back(rng.next_below(3) == 0 ? Label::High : Label::Low);
    }
    auto cm = confusion(t, p);
    CHECK(report(cm).accuracy ==
          doctest::Approx(static_cast<double>(cm.tp + cm.tn) / 200.0).epsilon(1e-15));

    // permute pairs jointly
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const std::size_t j = i + rng.next_below(t.size() - i);
        std::swap(t[i], t[j]);
        std::swap(p[i], p[j]);
    }
    auto cm2 = confusion(t, p);
    CHECK(cm2.tp == cm.tp);
    CHECK(cm2.fp == cm.fp);
    CHECK(cm2.tn == cm.tn);
    CHECK(cm2.fn == cm.fn);
}

TEST_CASE("compare scores predictors, orders by accuracy, and keeps raw counts") {
    std::vector<metrics::CoExecutionRecord> set;
    // 6 records: 2 High driven by low-load contention, 4 Low with one high-load
    set.push_back(rec("a", 80.0, 150.0));   // High, load below threshold
    set.push_back(rec("b", 210.0, 180.0));  // High, load above
    set.push_back(rec("c", 150.0, 20.0));   // Low, load above (baseline trap)
    set.push_back(rec("d", 40.0, 10.0));
    set.push_back(rec("e", 50.0, 0.0));
    set.push_back(rec("f", 60.0, 30.0));

    RecordPredictor oracle_pred = [](const metrics::CoExecutionRecord& r) {
        return r.degradation.label;
    };
    model::BaselineModel b;
    RecordPredictor baseline = [b](const metrics::CoExecutionRecord& r) {
        return model::baseline_predict(b, r);
    };

    auto rows = compare({{"proposed", oracle_pred}, {"baseline", baseline}}, set);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].name == "proposed");
    CHECK(rows[0].rep.accuracy == 1.0);
    CHECK(rows[1].name == "baseline");
    // baseline: misses record a (fn) and flags c (fp)
    CHECK(rows[1].cm.fn == 1);
    CHECK(rows[1].cm.fp == 1);
    CHECK(rows[1].rep.accuracy == doctest::Approx(4.0 / 6.0));

    // counts re-derivable from raw predictions: no hidden filtering
    std::vector<Label> t, p;
    for (const auto& r : set) {
        t.push_back(r.degradation.label);
        p.push_back(baseline(r));
    }
    auto direct = confusion(t, p);
    CHECK(direct.fn == rows[1].cm.fn);
    CHECK(direct.fp == rows[1].cm.fp);

    // identical predictors produce identical rows
    auto twin = compare({{"m1", oracle_pred}, {"m2", oracle_pred}}, set);
    CHECK(twin[0].rep.accuracy == twin[1].rep.accuracy);
    CHECK(twin[0].cm.tp == twin[1].cm.tp);

    CHECK_ERRC(compare({{"m", oracle_pred}}, {}), Errc::empty_input);
}

TEST_CASE("comparison and confusion CSV shapes") {
    ConfusionMatrix cm{7, 0, 39, 3};
    std::ostringstream out;
    write_confusion_csv(cm, out);
    CHECK(out.str() == "pred_low,pred_high\n39,0\n3,7\n");

    ModelComparison row;
    row.name = "m";
    row.cm = cm;
    row.rep = report(cm);
    std::ostringstream c;
    write_comparison_csv({row}, c);
    CHECK(c.str().find("model,accuracy") == 0);
    CHECK(c.str().find("\nm,") != std::string::npos);
}

TEST_CASE("scatter export emits one row per record") {
    std::vector<metrics::CoExecutionRecord> set;
    for (int i = 0; i < 49; ++i)
        set.push_back(rec("w" + std::to_string(i), 10.0 * i, 5.0 * i));
    auto csv = scatter_export(set, "VH_cpu_load_mean");
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 50);  // header + 49 rows
    CHECK(csv.rfind("x,degradation_pct,label\n", 0) == 0);

    CHECK_ERRC(scatter_export(set, "nope"), Errc::missing_feature);
    CHECK_ERRC(scatter_export({}, "VH_cpu_load_mean"), Errc::empty_input);
}
