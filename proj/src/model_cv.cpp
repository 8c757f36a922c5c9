#include <algorithm>
#include <numeric>

#include "colopred/error.hpp"
#include "colopred/model.hpp"
#include "colopred/rng.hpp"

namespace colopred::model {

namespace {

// Per-class shuffle, then round-robin assignment keeps the class mix of every
// fold as close as integer counts allow.
std::vector<int> stratified_fold_of(const std::vector<Label>& y, int k, std::uint64_t seed) {
    std::vector<int> fold(y.size(), -1);
    for (Label cls : {Label::Low, Label::High}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) idx.push_back(i);
        Rng rng(derive_seed(seed, cls == Label::High ? 1 : 0));
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            const std::size_t j = i + rng.next_below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return fold;
}

double score_fold(const std::vector<Label>& truth, const std::vector<Label>& pred,
                  CvMetric metric) {
    if (metric == CvMetric::accuracy) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i] ? 1 : 0;
        return static_cast<double>(hits) / static_cast<double>(truth.size());
    }
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred[i] == Label::High && truth[i] == Label::High) ++tp;
        if (pred[i] == Label::High && truth[i] == Label::Low) ++fp;
        if (pred[i] == Label::Low && truth[i] == Label::High) ++fn;
    }
    if (tp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<Label>& y, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(Errc::bad_format, "test_fraction must lie in (0,1)");
    std::vector<std::size_t> train, test;
    for (Label cls : {Label::Low, Label::High}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) idx.push_back(i);
        Rng rng(derive_seed(seed, cls == Label::High ? 3 : 2));
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            const std::size_t j = i + rng.next_below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        const auto n_test = static_cast<std::size_t>(
            test_fraction * static_cast<double>(idx.size()) + 0.5);
        if (n_test == 0 || n_test == idx.size())
            throw Error(Errc::insufficient_data,
                        "a class would end up entirely on one side of the split");
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_test ? test : train).push_back(idx[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

CvResult cross_validate(const TrainFn& trainer, const FeatureMatrix& X,
                        const std::vector<Label>& y, int k, std::uint64_t seed,
                        CvMetric metric) {
    if (X.rows() != y.size())
        throw Error(Errc::length_mismatch, "X and y row counts differ");
    if (k < 2)
        throw Error(Errc::insufficient_data, "k must be >= 2");
    if (y.size() < static_cast<std::size_t>(k))
        throw Error(Errc::insufficient_data, "fewer rows than folds");
    for (Label cls : {Label::Low, Label::High}) {
        const auto cnt = std::count(y.begin(), y.end(), cls);
        if (cnt < k)
            throw Error(Errc::insufficient_data,
                        std::string("class ") + metrics::label_name(cls) +
                            " has fewer rows than folds");
    }

    const std::vector<int> fold = stratified_fold_of(y, k, seed);
    const std::size_t p = X.cols();

    CvResult result;
    for (int f = 0; f < k; ++f) {
        FeatureMatrix train;
        train.names = X.names;
        std::vector<Label> train_y;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (fold[i] == f) {
                test_rows.push_back(i);
            } else {
                train.row_ids.push_back(X.row_ids.empty() ? std::to_string(i)
                                                          : X.row_ids[i]);
                train.data.insert(train.data.end(), X.data.begin() + i * p,
                                  X.data.begin() + (i + 1) * p);
                train_y.push_back(y[i]);
            }
        }
        RowPredictor predictor = trainer(train, train_y, derive_seed(seed, 0xcf, f));
        std::vector<Label> truth, pred;
        truth.reserve(test_rows.size());
        pred.reserve(test_rows.size());
        for (std::size_t i : test_rows) {
            truth.push_back(y[i]);
            pred.push_back(predictor(X.row(i)));
        }
        result.fold_scores.push_back(score_fold(truth, pred, metric));
    }
    double sum = 0.0;
    for (double s : result.fold_scores) sum += s;
    result.mean_score = sum / static_cast<double>(result.fold_scores.size());
    return result;
}

}  // namespace colopred::model
