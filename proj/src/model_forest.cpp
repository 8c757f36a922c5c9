#include <algorithm>
#include <cmath>
#include <numeric>

#include "colopred/error.hpp"
#include "colopred/model.hpp"
#include "colopred/rng.hpp"

namespace colopred::model {

namespace {

void check_inputs(const FeatureMatrix& X, const std::vector<Label>& y) {
    if (X.rows() != y.size())
        throw Error(Errc::length_mismatch, "X and y row counts differ");
    if (X.rows() < 2)
        throw Error(Errc::degenerate_input, "need at least 2 training rows");
    for (double v : X.data)
        if (v != v)
            throw Error(Errc::missing_values, "training matrix contains missing values");
    const auto highs = static_cast<std::size_t>(
        std::count(y.begin(), y.end(), Label::High));
    if (highs == 0 || highs == y.size())
        throw Error(Errc::single_class_training, "training labels contain a single class");
}

double gini(std::size_t n_high, std::size_t n) {
    if (n == 0) return 0.0;
    const double ph = static_cast<double>(n_high) / static_cast<double>(n);
    return 2.0 * ph * (1.0 - ph);
}

struct CartBuilder {
    const FeatureMatrix& X;
    const std::vector<Label>& y;
    const ForestConfig& cfg;
    Rng rng;
    int mtry;
    Tree tree;

    CartBuilder(const FeatureMatrix& x, const std::vector<Label>& labels,
                const ForestConfig& c, std::uint64_t seed)
        : X(x), y(labels), cfg(c), rng(seed) {
        const int p = static_cast<int>(X.cols());
        mtry = cfg.mtry;
        if (mtry < 0) mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p))));
        if (mtry == 0 || mtry > p) mtry = p;
    }

    int build(std::vector<std::uint32_t>& rows, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});

        std::size_t n_high = 0;
        for (std::uint32_t r : rows) n_high += y[r] == Label::High ? 1 : 0;
        const std::size_t n = rows.size();
        const double node_gini = gini(n_high, n);

        auto make_leaf = [&] {
            tree.nodes[id].feature = -1;
            tree.nodes[id].leaf_value = static_cast<double>(n_high) / static_cast<double>(n);
        };
        if (depth >= cfg.max_depth || n < 2 * static_cast<std::size_t>(cfg.min_samples_leaf) ||
            node_gini == 0.0) {
            make_leaf();
            return id;
        }

        // Candidate features for this node (without replacement).
        std::vector<int> feats(X.cols());
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const std::size_t j = i + rng.next_below(feats.size() - i);
            std::swap(feats[i], feats[j]);
        }
        feats.resize(mtry);
        std::sort(feats.begin(), feats.end());  // evaluation order independent of draw order

        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::uint32_t> order(rows);
        for (int j : feats) {
            std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
                return X.at(a, j) < X.at(b, j);
            });
            std::size_t left_high = 0;
            for (std::size_t i = 1; i < n; ++i) {
                left_high += y[order[i - 1]] == Label::High ? 1 : 0;
                const double lo = X.at(order[i - 1], j);
                const double hi = X.at(order[i], j);
                if (!(hi > lo)) continue;
                if (i < static_cast<std::size_t>(cfg.min_samples_leaf) ||
                    n - i < static_cast<std::size_t>(cfg.min_samples_leaf))
                    continue;
                const double child =
                    (static_cast<double>(i) * gini(left_high, i) +
                     static_cast<double>(n - i) * gini(n_high - left_high, n - i)) /
                    static_cast<double>(n);
                const double gain = node_gini - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = j;
                    best_threshold = (lo + hi) / 2.0;
                }
            }
        }
        if (best_feature < 0) {
            make_leaf();
            return id;
        }

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t r : rows) {
            (X.at(r, best_feature) < best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        tree.nodes[id].feature = best_feature;
        tree.nodes[id].threshold = best_threshold;
        const int li = build(left, depth + 1);
        const int ri = build(right, depth + 1);
        tree.nodes[id].left = li;
        tree.nodes[id].right = ri;
        return id;
    }
};

Tree build_cart_on(const FeatureMatrix& X, const std::vector<Label>& y,
                   const ForestConfig& cfg, std::uint64_t seed,
                   std::vector<std::uint32_t> rows) {
    CartBuilder builder(X, y, cfg, seed);
    builder.build(rows, 0);
    return std::move(builder.tree);
}

}  // namespace

Tree train_cart(const FeatureMatrix& X, const std::vector<Label>& y,
                const ForestConfig& cfg, std::uint64_t seed) {
    check_inputs(X, y);
    std::vector<std::uint32_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0u);
    return build_cart_on(X, y, cfg, seed, std::move(rows));
}

ForestModel train_random_forest(const FeatureMatrix& X, const std::vector<Label>& y,
                                const ForestConfig& cfg) {
    check_inputs(X, y);
    if (cfg.n_trees < 1 || cfg.max_depth < 1 || cfg.min_samples_leaf < 1 ||
        !(cfg.subsample > 0.0 && cfg.subsample <= 1.0))
        throw Error(Errc::bad_format, "invalid forest configuration");

    const std::size_t n = X.rows();
    ForestModel model;
    model.feature_names = X.names;
    model.config = cfg;
    for (int t = 0; t < cfg.n_trees; ++t) {
        const std::uint64_t tree_seed = derive_seed(cfg.seed, 0xf0e, static_cast<std::uint64_t>(t));
        std::vector<std::uint32_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0u);
        if (cfg.subsample < 1.0) {
            const auto take = std::max<std::size_t>(
                2, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n)));
            Rng rng(derive_seed(tree_seed, 0xba6));
            for (std::size_t i = 0; i < take; ++i) {
                const std::size_t j = i + rng.next_below(n - i);
                std::swap(rows[i], rows[j]);
            }
            rows.resize(take);
            std::sort(rows.begin(), rows.end());
        }
        model.trees.push_back(build_cart_on(X, y, cfg, tree_seed, std::move(rows)));
    }
    return model;
}

double predict_proba(const ForestModel& model, std::span<const double> row) {
    std::size_t votes_high = 0;
    for (const Tree& t : model.trees)
        votes_high += t.value(row) > 0.5 ? 1 : 0;  // a tied leaf votes Low
    return static_cast<double>(votes_high) / static_cast<double>(model.trees.size());
}

}  // namespace colopred::model
