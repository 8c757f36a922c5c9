#include <algorithm>
#include <cmath>
#include <numeric>

#include "colopred/error.hpp"
#include "colopred/model.hpp"
#include "colopred/rng.hpp"

namespace colopred::model {

namespace {

double sigmoid(double s) {
    if (s >= 0.0) {
        const double e = std::exp(-s);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(s);
    return e / (1.0 + e);
}

void check_training_inputs(const FeatureMatrix& X, const std::vector<Label>& y) {
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

// Per-row instance weights; balanced gives each class equal total weight.
std::vector<double> class_weights(const std::vector<Label>& y, ClassWeight cw) {
    std::vector<double> w(y.size(), 1.0);
    if (cw == ClassWeight::balanced) {
        const double n = static_cast<double>(y.size());
        const double nh = static_cast<double>(std::count(y.begin(), y.end(), Label::High));
        const double w_high = n / (2.0 * nh);
        const double w_low = n / (2.0 * (n - nh));
        for (std::size_t i = 0; i < y.size(); ++i)
            w[i] = y[i] == Label::High ? w_high : w_low;
    }
    return w;
}

}  // namespace

double logistic_loss(double margin, double y, double weight) {
    // ln(1 + e^s) - y*s, evaluated stably.
    const double softplus = std::max(margin, 0.0) + std::log1p(std::exp(-std::abs(margin)));
    return weight * (softplus - y * margin);
}

double logistic_grad(double margin, double y, double weight) {
    return weight * (sigmoid(margin) - y);
}

double logistic_hess(double margin, [[maybe_unused]] double y, double weight) {
    const double p = sigmoid(margin);
    return weight * p * (1.0 - p);
}

double Tree::value(std::span<const double> row) const {
    int idx = 0;
    while (nodes[idx].feature >= 0) {
        const TreeNode& node = nodes[idx];
        idx = row[node.feature] < node.threshold ? node.left : node.right;
    }
    return nodes[idx].leaf_value;
}

double GbdtModel::margin(std::span<const double> row) const {
    double s = base_score;
    for (const Tree& t : trees) s += learning_rate * t.value(row);
    return s;
}

GbdtModel train_gbdt(const FeatureMatrix& X, const std::vector<Label>& y,
                     const TrainConfig& cfg) {
    check_training_inputs(X, y);
    if (cfg.n_trees < 1 || cfg.max_depth < 1 || !(cfg.learning_rate > 0.0) ||
        cfg.min_samples_leaf < 1 || !(cfg.l2_leaf_penalty >= 0.0) ||
        !(cfg.subsample > 0.0 && cfg.subsample <= 1.0))
        throw Error(Errc::bad_format, "invalid training configuration");

    const std::size_t n = X.rows(), p = X.cols();
    std::vector<double> yv(n);
    for (std::size_t i = 0; i < n; ++i) yv[i] = y[i] == Label::High ? 1.0 : 0.0;
    const std::vector<double> w = class_weights(y, cfg.class_weight);

    GbdtModel model;
    model.feature_names = X.names;
    model.learning_rate = cfg.learning_rate;
    model.config = cfg;

    // Prior: log-odds of the (weighted) High prevalence.
    double wsum = 0.0, wpos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wsum += w[i];
        wpos += w[i] * yv[i];
    }
    const double prev = std::clamp(wpos / wsum, 1e-12, 1.0 - 1e-12);
    model.base_score = std::log(prev / (1.0 - prev));

    // Rows presorted once per feature; ties stay in row order for determinism.
    std::vector<std::vector<std::uint32_t>> sorted(p);
    for (std::size_t j = 0; j < p; ++j) {
        sorted[j].resize(n);
        std::iota(sorted[j].begin(), sorted[j].end(), 0u);
        std::stable_sort(sorted[j].begin(), sorted[j].end(),
                         [&](std::uint32_t a, std::uint32_t b) {
                             return X.at(a, j) < X.at(b, j);
                         });
    }

    std::vector<double> margins(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<int> node_of(n);           // current node per row; -1 = out of sample
    const double lambda = cfg.l2_leaf_penalty;

    struct NodeStats {
        double g = 0.0, h = 0.0;
        std::size_t count = 0;
    };
    struct BestSplit {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
        double gl = 0.0, hl = 0.0;
    };

    for (int t = 0; t < cfg.n_trees; ++t) {
        // Row subsample for this tree (without replacement).
        std::fill(node_of.begin(), node_of.end(), -1);
        if (cfg.subsample >= 1.0) {
            std::fill(node_of.begin(), node_of.end(), 0);
        } else {
            const auto take = std::max<std::size_t>(
                2, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n)));
            std::vector<std::uint32_t> rows(n);
            std::iota(rows.begin(), rows.end(), 0u);
            Rng rng(derive_seed(cfg.seed, 0x5b5, static_cast<std::uint64_t>(t)));
            for (std::size_t i = 0; i < take; ++i) {
                const std::size_t j = i + rng.next_below(n - i);
                std::swap(rows[i], rows[j]);
                node_of[rows[i]] = 0;
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = logistic_grad(margins[i], yv[i], w[i]);
            hess[i] = logistic_hess(margins[i], yv[i], w[i]);
        }

        Tree tree;
        tree.nodes.push_back({});
        std::vector<int> level = {0};
        std::vector<NodeStats> stats(1);
        for (std::size_t i = 0; i < n; ++i) {
            if (node_of[i] != 0) continue;
            stats[0].g += grad[i];
            stats[0].h += hess[i];
            ++stats[0].count;
        }

        auto leaf_weight = [&](const NodeStats& s) { return -s.g / (s.h + lambda); };

        for (int depth = 0; depth < cfg.max_depth && !level.empty(); ++depth) {
            // Scan state per node id, reused feature by feature.
            std::vector<BestSplit> best(tree.nodes.size());
            std::vector<double> gl(tree.nodes.size()), hl(tree.nodes.size());
            std::vector<std::size_t> cl(tree.nodes.size());
            std::vector<double> prev(tree.nodes.size());
            std::vector<char> open(tree.nodes.size(), 0);
            for (int id : level) open[id] = 1;

            for (std::size_t j = 0; j < p; ++j) {
                for (int id : level) {
                    gl[id] = hl[id] = 0.0;
                    cl[id] = 0;
                }
                std::vector<char> started(tree.nodes.size(), 0);
                for (std::uint32_t r : sorted[j]) {
                    const int id = node_of[r];
                    if (id < 0 || !open[id]) continue;
                    const double v = X.at(r, j);
                    if (started[id] && v > prev[id] && cl[id] >= static_cast<std::size_t>(cfg.min_samples_leaf) &&
                        stats[id].count - cl[id] >= static_cast<std::size_t>(cfg.min_samples_leaf)) {
                        const double gr = stats[id].g - gl[id];
                        const double hr = stats[id].h - hl[id];
                        const double gain = 0.5 * (gl[id] * gl[id] / (hl[id] + lambda) +
                                                   gr * gr / (hr + lambda) -
                                                   stats[id].g * stats[id].g /
                                                       (stats[id].h + lambda));
                        // Zero-gain splits are admitted: symmetric interactions
                        // (an XOR-like pattern) have zero first-level gain and
                        // only become separable one level down. Negative gain
                        // still prunes (with the L2 penalty, uninformative
                        // splits score below zero). First candidate wins ties.
                        if (gain >= -1e-12 &&
                            (best[id].feature < 0 || gain > best[id].gain + 1e-12)) {
                            best[id] = {gain, static_cast<int>(j), (prev[id] + v) / 2.0,
                                        gl[id], hl[id]};
                        }
                    }
                    gl[id] += grad[r];
                    hl[id] += hess[r];
                    ++cl[id];
                    prev[id] = v;
                    started[id] = 1;
                }
            }

            std::vector<int> next_level;
            for (int id : level) {
                if (best[id].feature < 0) {
                    tree.nodes[id].feature = -1;
                    tree.nodes[id].leaf_value = leaf_weight(stats[id]);
                    continue;
                }
                const int li = static_cast<int>(tree.nodes.size());
                const int ri = li + 1;
                tree.nodes[id].feature = best[id].feature;
                tree.nodes[id].threshold = best[id].threshold;
                tree.nodes[id].left = li;
                tree.nodes[id].right = ri;
                tree.nodes.push_back({});
                tree.nodes.push_back({});
                NodeStats ls{best[id].gl, best[id].hl, 0};
                NodeStats rs{stats[id].g - ls.g, stats[id].h - ls.h, 0};
                stats.resize(tree.nodes.size());
                stats[li] = ls;
                stats[ri] = rs;
                next_level.push_back(li);
                next_level.push_back(ri);
            }
            if (next_level.empty()) break;

            for (std::size_t i = 0; i < n; ++i) {
                const int id = node_of[i];
                if (id < 0 || tree.nodes[id].feature < 0) continue;
                node_of[i] = X.at(i, tree.nodes[id].feature) < tree.nodes[id].threshold
                                 ? tree.nodes[id].left
                                 : tree.nodes[id].right;
            }
            for (int id : next_level)
                stats[id].count = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (node_of[i] >= 0) ++stats[node_of[i]].count;
            level = std::move(next_level);
        }
        // Any still-open node at max depth becomes a leaf.
        for (int id : level) {
            tree.nodes[id].feature = -1;
            tree.nodes[id].leaf_value = leaf_weight(stats[id]);
        }

        for (std::size_t i = 0; i < n; ++i)
            margins[i] += cfg.learning_rate * tree.value(X.row(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

double predict_proba(const GbdtModel& model, std::span<const double> row) {
    return sigmoid(model.margin(row));
}

namespace {

// Name-aligned row extraction shared by the FeatureVector entry points.
std::vector<double> aligned_row(const std::vector<std::string>& names,
                                const counters::FeatureVector& x) {
    std::vector<double> row(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (!x.has(names[j]))
            throw Error(Errc::schema_mismatch, "input lacks feature '" + names[j] + "'");
        row[j] = x.at(names[j]);
    }
    return row;
}

}  // namespace

double predict_proba(const GbdtModel& model, const counters::FeatureVector& x) {
    return predict_proba(model, std::span<const double>(aligned_row(model.feature_names, x)));
}

double predict_proba(const ForestModel& model, const counters::FeatureVector& x) {
    return predict_proba(model, std::span<const double>(aligned_row(model.feature_names, x)));
}

double predict_proba(const LinearModel& model, const counters::FeatureVector& x) {
    return predict_proba(model, std::span<const double>(aligned_row(model.feature_names, x)));
}

Label baseline_predict(const BaselineModel& b, const metrics::CoExecutionRecord& record) {
    const double v = record.features.at(b.cpu_load_feature);  // throws missing_feature
    return v >= b.cpu_load_threshold_percent ? Label::High : Label::Low;
}

}  // namespace colopred::model
