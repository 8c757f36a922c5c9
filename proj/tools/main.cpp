// colopred: co-location interference prediction toolkit.
//
// Subcommands cover the full pipeline: simulate (synthetic co-execution
// datasets), ingest (real counter CSV logs), featurize (PCA feature
// engineering), train / predict / evaluate (classifiers vs the CPU-load
// baseline), scatter (plot-ready export).
//
// Exit codes: 0 success, 1 input/validation error, 2 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "colopred/counters.hpp"
#include "colopred/error.hpp"
#include "colopred/eval.hpp"
#include "colopred/features.hpp"
#include "colopred/metrics.hpp"
#include "colopred/model.hpp"
#include "colopred/sim.hpp"
#include "detail_text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace colopred;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// small file helpers (write-to-temp, rename-on-success)
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::io_error, "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path() && !target.parent_path().empty() &&
        !fs::exists(target.parent_path()))
        throw Error(Errc::io_error,
                    "output directory '" + target.parent_path().string() + "' does not exist");
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Errc::io_error, "cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.good())
            throw Error(Errc::io_error, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(Errc::io_error, "cannot move output into place at '" + path + "'");
    }
}

void require_input(const std::string& path, const char* what) {
    if (!fs::exists(path))
        throw Error(Errc::io_error, std::string(what) + " file '" + path + "' not found");
}

// Every output gets a sibling manifest echoing the effective configuration.
void write_manifest(const std::string& out_path, const std::string& command,
                    const json& options) {
    json doc{{"tool", "colopred"},
             {"tool_version", kVersion},
             {"command", command},
             {"options", options}};
    write_file_atomic(out_path + ".manifest.json", doc.dump(2) + "\n");
}

std::vector<counters::Stat> parse_stats(const std::string& csv) {
    std::vector<counters::Stat> stats;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) stats.push_back(counters::stat_from_name(item));
    if (stats.empty())
        throw Error(Errc::bad_format, "empty statistic list");
    return stats;
}

std::vector<metrics::CoExecutionRecord> load_dataset(const std::string& path) {
    require_input(path, "dataset");
    std::istringstream in(slurp(path));
    return sim::read_dataset_csv(in);
}

// ---------------------------------------------------------------------------
// model file sniffing: every model JSON carries a "format" tag
// ---------------------------------------------------------------------------

struct AnyModel {
    std::string format;
    model::GbdtModel gbdt;
    model::ForestModel forest;
    model::LinearModel linear;

    double proba(const counters::FeatureVector& x) const {
        if (format == "gbdt") return model::predict_proba(gbdt, x);
        if (format == "forest") return model::predict_proba(forest, x);
        return model::predict_proba(linear, x);
    }
};

AnyModel load_any_model(const std::string& path) {
    require_input(path, "model");
    const std::string text = slurp(path);
    std::string format;
    try {
        format = json::parse(text).at("format").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(Errc::bad_model_file, std::string("cannot read model file: ") + e.what());
    }
    AnyModel m;
    m.format = format;
    std::istringstream in(text);
    if (format == "gbdt")
        m.gbdt = model::load_gbdt_json(in);
    else if (format == "forest")
        m.forest = model::load_forest_json(in);
    else if (format == "linear")
        m.linear = model::load_linear_json(in);
    else
        throw Error(Errc::bad_model_file, "unsupported model format '" + format + "'");
    return m;
}

// ---------------------------------------------------------------------------
// shared training-matrix assembly (column-first missing removal, row tracking)
// ---------------------------------------------------------------------------

struct TrainingData {
    features::FeatureMatrix X;
    std::vector<metrics::Label> y;
    std::vector<std::size_t> record_index;  // surviving record per matrix row
};

TrainingData build_training_data(const std::vector<metrics::CoExecutionRecord>& records,
                                 const std::vector<std::string>& feature_subset) {
    auto [full, labels] = features::make_feature_matrix(records);
    features::FeatureMatrix base =
        feature_subset.empty() ? std::move(full)
                               : features::select_columns(full, feature_subset);

    const std::size_t n = base.rows(), p = base.cols();
    std::vector<std::size_t> keep_cols;
    for (std::size_t j = 0; j < p; ++j) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            if (counters::is_missing(base.at(i, j))) ok = false;
        if (ok) keep_cols.push_back(j);
    }
    if (keep_cols.empty())
        throw Error(Errc::empty_result, "every feature column contains missing values");

    TrainingData out;
    for (std::size_t j : keep_cols) out.X.names.push_back(base.names[j]);
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = true;
        for (std::size_t j : keep_cols)
            if (counters::is_missing(base.at(i, j))) { ok = false; break; }
        if (!ok) continue;
        out.X.row_ids.push_back(base.row_ids[i]);
        for (std::size_t j : keep_cols) out.X.data.push_back(base.at(i, j));
        out.y.push_back(labels[i]);
        out.record_index.push_back(i);
    }
    if (out.X.rows() == 0)
        throw Error(Errc::empty_result, "every row contains missing values");
    return out;
}

features::FeatureMatrix subset_rows(const features::FeatureMatrix& X,
                                    const std::vector<std::size_t>& rows) {
    features::FeatureMatrix out;
    out.names = X.names;
    for (std::size_t i : rows) {
        out.row_ids.push_back(X.row_ids[i]);
        out.data.insert(out.data.end(), X.data.begin() + i * X.cols(),
                        X.data.begin() + (i + 1) * X.cols());
    }
    return out;
}

// ---------------------------------------------------------------------------
// subcommand options
// ---------------------------------------------------------------------------

struct CapOpts {
    double cpu = 16.0, mem = 100.0, io = 10.0, net = 12.5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--cap-cpu", cpu, "host cores")->capture_default_str();
        cmd->add_option("--cap-mem", mem, "memory bandwidth, GB/s")->capture_default_str();
        cmd->add_option("--cap-io", io, "I/O bandwidth, GB/s")->capture_default_str();
        cmd->add_option("--cap-net", net, "network bandwidth, GB/s")->capture_default_str();
    }
    sim::ResourceCapacity to_capacity() const {
        if (!(cpu > 0) || !(mem > 0) || !(io > 0) || !(net > 0))
            throw Error(Errc::bad_format, "capacities must be positive");
        return {cpu, mem, io, net};
    }
    json to_json() const {
        return {{"cap_cpu", cpu}, {"cap_mem", mem}, {"cap_io", io}, {"cap_net", net}};
    }
};

struct SimulateOpts {
    std::string profiles, out;
    bool scenario_suite = false;
    std::uint64_t seed = 0;
    double threshold = metrics::kDefaultThresholdPercent;
    std::string stats = "mean,std,min,max,p95";
    double interval = 1.0, noise_sigma = 0.05;
    int jobs = 1;
    CapOpts cap;
};

int run_simulate(const SimulateOpts& o) {
    std::vector<sim::WorkloadProfile> ves, vhs;
    if (o.scenario_suite) {
        std::tie(ves, vhs) = sim::scenario_suite();
    } else {
        require_input(o.profiles, "profiles");
        std::istringstream in(slurp(o.profiles));
        for (auto& p : sim::read_profiles_json(in))
            (p.side == counters::Source::VE ? ves : vhs).push_back(std::move(p));
        if (ves.empty() || vhs.empty())
            throw Error(Errc::empty_input,
                        "profiles file must contain at least one VE and one VH profile");
    }

    sim::DatasetConfig cfg;
    cfg.threshold_percent = o.threshold;
    cfg.stats = parse_stats(o.stats);
    cfg.synth.interval_s = o.interval;
    cfg.synth.noise_sigma = o.noise_sigma;
    cfg.jobs = o.jobs;
    if (!(o.threshold > 0)) throw Error(Errc::bad_format, "--threshold must be > 0");
    if (!(o.interval > 0)) throw Error(Errc::bad_format, "--interval must be > 0");
    if (o.jobs < 1) throw Error(Errc::bad_format, "--jobs must be >= 1");

    auto records = sim::generate_dataset(ves, vhs, o.cap.to_capacity(), o.seed, cfg);
    std::size_t high = 0;
    for (const auto& r : records) high += r.degradation.label == metrics::Label::High;

    std::ostringstream out;
    sim::write_dataset_csv(records, out);
    write_file_atomic(o.out, out.str());
    json opts = o.cap.to_json();
    opts.update({{"profiles", o.profiles},
                 {"scenario_suite", o.scenario_suite},
                 {"seed", o.seed},
                 {"threshold", o.threshold},
                 {"stats", o.stats},
                 {"interval", o.interval},
                 {"noise_sigma", o.noise_sigma},
                 {"jobs", o.jobs},
                 {"out", o.out}});
    write_manifest(o.out, "simulate", opts);

    std::cout << "pairs=" << records.size() << " high=" << high
              << " low=" << records.size() - high << "\n"
              << "wrote " << o.out << "\n";
    return 0;
}

struct IngestOpts {
    std::string ve_csv, vh_csv, out;
    std::string ve_name, vh_name;
    double t_solo = 0.0, t_coloc = 0.0;
    double threshold = metrics::kDefaultThresholdPercent;
    std::string stats = "mean,std,min,max,p95";
    bool append = false;
};

int run_ingest(const IngestOpts& o) {
    require_input(o.ve_csv, "VE counter");
    require_input(o.vh_csv, "VH counter");
    const auto stats = parse_stats(o.stats);

    std::istringstream vein(slurp(o.ve_csv));
    std::istringstream vhin(slurp(o.vh_csv));
    const std::string ve_name =
        o.ve_name.empty() ? fs::path(o.ve_csv).stem().string() : o.ve_name;
    const std::string vh_name =
        o.vh_name.empty() ? fs::path(o.vh_csv).stem().string() : o.vh_name;
    auto ve_trace = counters::parse_counter_csv(vein, counters::Source::VE, "ingest", ve_name);
    auto vh_trace = counters::parse_counter_csv(vhin, counters::Source::VH, "ingest", vh_name);

    metrics::CoExecutionRecord rec;
    rec.ve_name = ve_name;
    rec.vh_name = vh_name;
    rec.t_solo_ve = o.t_solo;
    rec.t_coloc_ve = o.t_coloc;
    rec.degradation = metrics::classify_degradation(o.t_solo, o.t_coloc, o.threshold);
    rec.features = counters::merge_pair_features(counters::aggregate_trace(ve_trace, stats),
                                                 counters::aggregate_trace(vh_trace, stats));

    std::vector<metrics::CoExecutionRecord> records;
    if (o.append && fs::exists(o.out)) {
        records = load_dataset(o.out);
        if (records.front().features.names != rec.features.names)
            throw Error(Errc::schema_mismatch,
                        "existing dataset at '" + o.out + "' has a different feature schema");
    }
    records.push_back(std::move(rec));

    std::ostringstream out;
    sim::write_dataset_csv(records, out);
    write_file_atomic(o.out, out.str());
    write_manifest(o.out, "ingest",
                   {{"ve", o.ve_csv},
                    {"vh", o.vh_csv},
                    {"ve_name", ve_name},
                    {"vh_name", vh_name},
                    {"t_solo", o.t_solo},
                    {"t_coloc", o.t_coloc},
                    {"threshold", o.threshold},
                    {"stats", o.stats},
                    {"append", o.append},
                    {"out", o.out}});
    std::cout << "degradation=" << records.back().degradation.pd_percent << "% label="
              << metrics::label_name(records.back().degradation.label) << "\n"
              << "wrote " << o.out << " (" << records.size() << " records)\n";
    return 0;
}

struct FeaturizeOpts {
    std::string dataset, out_model, out_matrix, out_features, loadings, correlation;
    int retain_k = 8;
    double retain_variance = -1.0;
    int per_component = 4;
    bool pc_scores = false;
};

int run_featurize(const FeaturizeOpts& o) {
    auto records = load_dataset(o.dataset);
    auto [matrix, labels] = features::make_feature_matrix(records);
    (void)labels;
    auto clean = features::drop_missing(matrix);
    if (clean.cols() < matrix.cols())
        std::cout << "dropped " << matrix.cols() - clean.cols()
                  << " feature column(s) with missing values\n";

    const features::Retain retain = o.retain_variance > 0.0
                                        ? features::Retain::by_variance(o.retain_variance)
                                        : features::Retain::by_k(o.retain_k);
    auto model = features::pca_fit(clean, retain);

    double cum = 0.0;
    for (std::size_t c = 0; c < model.n_components(); ++c) {
        cum += model.explained_variance_ratio[c];
        std::cout << "PC" << c + 1 << " variance_ratio=" << model.explained_variance_ratio[c]
                  << " cumulative=" << cum << "\n";
    }

    auto selected = features::top_loading_features(
        model, static_cast<std::size_t>(o.per_component));
    std::cout << "selected " << selected.size() << " feature(s):";
    for (const auto& s : selected) std::cout << ' ' << s;
    std::cout << "\n";

    std::ostringstream model_out;
    features::save_pca_json(model, model_out);
    write_file_atomic(o.out_model, model_out.str());

    const features::FeatureMatrix reduced =
        o.pc_scores ? features::pca_transform(model, clean)
                    : features::select_columns(clean, selected);
    std::ostringstream matrix_out;
    features::write_matrix_csv(reduced, matrix_out);
    write_file_atomic(o.out_matrix, matrix_out.str());

    if (!o.out_features.empty()) {
        std::string list;
        for (const auto& s : selected) list += s + "\n";
        write_file_atomic(o.out_features, list);
    }
    if (!o.correlation.empty()) {
        auto corr = features::correlation_matrix(clean);
        std::ostringstream cs;
        cs << "feature";
        for (const auto& n : clean.names) cs << ',' << n;
        cs << "\n";
        for (std::size_t a = 0; a < clean.cols(); ++a) {
            cs << clean.names[a];
            for (std::size_t b = 0; b < clean.cols(); ++b)
                cs << ',' << detail::fmt_double(corr[a * clean.cols() + b]);
            cs << "\n";
        }
        write_file_atomic(o.correlation, cs.str());
    }
    if (!o.loadings.empty()) {
        std::ostringstream ld;
        ld << "feature";
        for (std::size_t c = 0; c < model.n_components(); ++c) ld << ",PC" << c + 1;
        ld << "\n";
        for (std::size_t j = 0; j < model.n_features(); ++j) {
            ld << model.feature_names[j];
            for (std::size_t c = 0; c < model.n_components(); ++c)
                ld << ',' << model.components[c * model.n_features() + j];
            ld << "\n";
        }
        write_file_atomic(o.loadings, ld.str());
    }

    json opts{{"dataset", o.dataset},
              {"retain_k", o.retain_k},
              {"retain_variance", o.retain_variance},
              {"per_component", o.per_component},
              {"pc_scores", o.pc_scores},
              {"correlation", o.correlation},
              {"out_model", o.out_model},
              {"out_matrix", o.out_matrix},
              {"out_features", o.out_features},
              {"loadings", o.loadings}};
    write_manifest(o.out_model, "featurize", opts);
    std::cout << "components=" << model.n_components() << " cumulative_variance=" << cum
              << "\nwrote " << o.out_model << ", " << o.out_matrix << "\n";
    return 0;
}

struct TrainOpts {
    std::string dataset, out, features_from;
    std::string model_type = "gbdt";
    int cv = 0;
    std::string cv_metric = "accuracy";
    double holdout = 0.2;
    std::uint64_t seed = 0;
    // gbdt
    int trees = 200, depth = 4, min_leaf = 5;
    double learning_rate = 0.1, l2_leaf = 1.0, subsample = 1.0;
    std::string class_weight = "balanced";
    // forest
    int forest_trees = 100, forest_depth = 8, mtry = -1;
    // linear
    double l1 = 0.0, l2 = 0.0;
    int epochs = 2000;
};

std::vector<std::string> read_feature_list(const std::string& path) {
    require_input(path, "feature list");
    std::istringstream in(slurp(path));
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    if (names.empty())
        throw Error(Errc::empty_input, "feature list '" + path + "' is empty");
    return names;
}

int run_train(const TrainOpts& o) {
    auto records = load_dataset(o.dataset);
    std::vector<std::string> subset;
    if (!o.features_from.empty()) subset = read_feature_list(o.features_from);
    TrainingData data = build_training_data(records, subset);
    std::cout << "training matrix: " << data.X.rows() << " rows x " << data.X.cols()
              << " features\n";

    const auto cw = o.class_weight == "none" ? model::ClassWeight::none
                                             : model::ClassWeight::balanced;

    // One trainer closure per model type keeps CV and the final fit identical.
    model::TrainFn trainer;
    std::function<std::string(const features::FeatureMatrix&, const std::vector<metrics::Label>&)>
        fit_and_serialize;
    if (o.model_type == "gbdt") {
        model::TrainConfig cfg;
        cfg.n_trees = o.trees;
        cfg.max_depth = o.depth;
        cfg.learning_rate = o.learning_rate;
        cfg.min_samples_leaf = o.min_leaf;
        cfg.l2_leaf_penalty = o.l2_leaf;
        cfg.subsample = o.subsample;
        cfg.seed = o.seed;
        cfg.class_weight = cw;
        trainer = [cfg](const features::FeatureMatrix& X, const std::vector<metrics::Label>& y,
                        std::uint64_t seed) -> model::RowPredictor {
            auto c = cfg;
            c.seed = seed;
            auto m = model::train_gbdt(X, y, c);
            return [m](std::span<const double> row) {
                return model::predict_label(model::predict_proba(m, row));
            };
        };
        fit_and_serialize = [cfg](const features::FeatureMatrix& X,
                                  const std::vector<metrics::Label>& y) {
            std::ostringstream out;
            model::save_gbdt_json(model::train_gbdt(X, y, cfg), out);
            return out.str();
        };
    } else if (o.model_type == "forest") {
        model::ForestConfig cfg;
        cfg.n_trees = o.forest_trees;
        cfg.max_depth = o.forest_depth;
        cfg.min_samples_leaf = o.min_leaf;
        cfg.subsample = o.subsample;
        cfg.mtry = o.mtry;
        cfg.seed = o.seed;
        trainer = [cfg](const features::FeatureMatrix& X, const std::vector<metrics::Label>& y,
                        std::uint64_t seed) -> model::RowPredictor {
            auto c = cfg;
            c.seed = seed;
            auto m = model::train_random_forest(X, y, c);
            return [m](std::span<const double> row) {
                return model::predict_label(model::predict_proba(m, row));
            };
        };
        fit_and_serialize = [cfg](const features::FeatureMatrix& X,
                                  const std::vector<metrics::Label>& y) {
            std::ostringstream out;
            model::save_forest_json(model::train_random_forest(X, y, cfg), out);
            return out.str();
        };
    } else if (o.model_type == "linear" || o.model_type == "logistic") {
        const double l1 = o.model_type == "logistic" ? 0.0 : o.l1;
        const double l2 = o.model_type == "logistic" ? 0.0 : o.l2;
        const int epochs = o.epochs;
        trainer = [=](const features::FeatureMatrix& X, const std::vector<metrics::Label>& y,
                      std::uint64_t seed) -> model::RowPredictor {
            auto m = model::train_logistic_elasticnet(X, y, l1, l2, epochs, seed, cw);
            return [m](std::span<const double> row) {
                return model::predict_label(model::predict_proba(m, row));
            };
        };
        fit_and_serialize = [=](const features::FeatureMatrix& X,
                                const std::vector<metrics::Label>& y) {
            auto m = model::train_logistic_elasticnet(X, y, l1, l2, epochs, o.seed, cw);
            if (!m.converged)
                std::cout << "warning: gradient descent did not reach tolerance within "
                          << epochs << " epochs\n";
            std::ostringstream out;
            model::save_linear_json(m, out);
            return out.str();
        };
    } else {
        throw Error(Errc::bad_format, "unknown --model-type '" + o.model_type + "'");
    }

    // Holdout split for the printed report; the shipped model is the one the
    // report describes.
    features::FeatureMatrix train_X = data.X;
    std::vector<metrics::Label> train_y = data.y;
    std::vector<std::size_t> test_rows;
    if (o.holdout > 0.0) {
        auto [tr, te] = model::stratified_split(data.y, o.holdout, o.seed);
        train_X = subset_rows(data.X, tr);
        train_y.clear();
        for (auto i : tr) train_y.push_back(data.y[i]);
        test_rows = te;
    }

    json cv_json;
    if (o.cv >= 2) {
        const auto metric = o.cv_metric == "f1" ? model::CvMetric::f1_high
                                                : model::CvMetric::accuracy;
        auto cv = model::cross_validate(trainer, train_X, train_y, o.cv, o.seed, metric);
        std::cout << "cv_folds=" << o.cv << " metric=" << o.cv_metric << " scores=[";
        for (std::size_t i = 0; i < cv.fold_scores.size(); ++i)
            std::cout << (i ? "," : "") << cv.fold_scores[i];
        std::cout << "]\nmean CV score: " << cv.mean_score << "\n";
        cv_json = {{"fold_scores", cv.fold_scores}, {"mean_score", cv.mean_score}};
    }

    const std::string serialized = fit_and_serialize(train_X, train_y);
    write_file_atomic(o.out, serialized);

    if (!test_rows.empty()) {
        auto predictor = trainer(train_X, train_y, o.seed);
        std::vector<metrics::Label> truth, pred;
        for (auto i : test_rows) {
            truth.push_back(data.y[i]);
            pred.push_back(predictor(data.X.row(i)));
        }
        auto rep = eval::report(eval::confusion(truth, pred));
        std::cout << eval::format_report(rep, "holdout report (" +
                                                  std::to_string(test_rows.size()) +
                                                  " rows)");
    }

    json opts{{"dataset", o.dataset},       {"model_type", o.model_type},
              {"features_from", o.features_from}, {"cv", o.cv},
              {"cv_metric", o.cv_metric},   {"holdout", o.holdout},
              {"seed", o.seed},             {"trees", o.trees},
              {"depth", o.depth},           {"learning_rate", o.learning_rate},
              {"min_leaf", o.min_leaf},     {"l2_leaf", o.l2_leaf},
              {"subsample", o.subsample},   {"class_weight", o.class_weight},
              {"forest_trees", o.forest_trees}, {"forest_depth", o.forest_depth},
              {"mtry", o.mtry},             {"l1", o.l1},
              {"l2", o.l2},                 {"epochs", o.epochs},
              {"out", o.out}};
    if (!cv_json.is_null()) opts["cv_result"] = cv_json;
    write_manifest(o.out, "train", opts);
    std::cout << "wrote " << o.out << "\n";
    return 0;
}

struct PredictOpts {
    std::string model, dataset, out;
    double prob_threshold = 0.5;
};

int run_predict(const PredictOpts& o) {
    auto m = load_any_model(o.model);
    auto records = load_dataset(o.dataset);
    std::ostringstream out;
    out << "ve_name,vh_name,prob_high,pred_label,true_label\n";
    for (const auto& r : records) {
        const double p = m.proba(r.features);
        out << r.ve_name << ',' << r.vh_name << ',' << detail::fmt_double(p) << ','
            << metrics::label_name(model::predict_label(p, o.prob_threshold)) << ','
            << metrics::label_name(r.degradation.label) << '\n';
    }
    write_file_atomic(o.out, out.str());
    write_manifest(o.out, "predict",
                   {{"model", o.model},
                    {"dataset", o.dataset},
                    {"prob_threshold", o.prob_threshold},
                    {"out", o.out}});
    std::cout << "wrote " << o.out << " (" << records.size() << " predictions)\n";
    return 0;
}

struct EvaluateOpts {
    std::vector<std::string> models;
    std::string dataset, csv;
    std::string baseline;  // "cpu-load" enables the threshold baseline
    double baseline_threshold = 100.0;
    std::string baseline_feature = "VH_cpu_load_mean";
    double prob_threshold = 0.5;
};

int run_evaluate(const EvaluateOpts& o) {
    auto records = load_dataset(o.dataset);
    std::vector<std::pair<std::string, eval::RecordPredictor>> predictors;
    for (const auto& path : o.models) {
        auto m = std::make_shared<AnyModel>(load_any_model(path));
        const double thr = o.prob_threshold;
        predictors.emplace_back(fs::path(path).stem().string(),
                                [m, thr](const metrics::CoExecutionRecord& r) {
                                    return model::predict_label(m->proba(r.features), thr);
                                });
    }
    if (!o.baseline.empty()) {
        if (o.baseline != "cpu-load")
            throw Error(Errc::bad_format, "unknown baseline '" + o.baseline + "'");
        model::BaselineModel b;
        b.cpu_load_threshold_percent = o.baseline_threshold;
        b.cpu_load_feature = o.baseline_feature;
        predictors.emplace_back("baseline-cpu-load",
                                [b](const metrics::CoExecutionRecord& r) {
                                    return model::baseline_predict(b, r);
                                });
    }
    if (predictors.empty())
        throw Error(Errc::empty_input, "nothing to evaluate: pass --model and/or --baseline");

    auto rows = eval::compare(predictors, records);
    std::cout << eval::format_comparison(rows);

    if (!o.csv.empty()) {
        std::ostringstream cmp;
        eval::write_comparison_csv(rows, cmp);
        write_file_atomic(o.csv, cmp.str());
        for (const auto& row : rows) {
            std::ostringstream conf;
            eval::write_confusion_csv(row.cm, conf);
            const fs::path base(o.csv);
            fs::path conf_path = base.parent_path() /
                                 (base.stem().string() + "_confusion_" + row.name + ".csv");
            write_file_atomic(conf_path.string(), conf.str());
        }
        write_manifest(o.csv, "evaluate",
                       {{"dataset", o.dataset},
                        {"models", o.models},
                        {"baseline", o.baseline},
                        {"baseline_threshold", o.baseline_threshold},
                        {"baseline_feature", o.baseline_feature},
                        {"prob_threshold", o.prob_threshold},
                        {"csv", o.csv}});
    }
    return 0;
}

struct ScatterOpts {
    std::string dataset, out;
    std::string x = "VH_cpu_load_mean";
};

int run_scatter(const ScatterOpts& o) {
    auto records = load_dataset(o.dataset);
    write_file_atomic(o.out, eval::scatter_export(records, o.x));
    write_manifest(o.out, "scatter",
                   {{"dataset", o.dataset}, {"x", o.x}, {"out", o.out}});
    std::cout << "wrote " << o.out << " (" << records.size() << " points)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workload co-location interference prediction toolkit"};
    app.set_config("--config", "", "INI config file with default flag values")
        ->envname("COLOPRED_CONFIG");
    app.require_subcommand(1);

    SimulateOpts so;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a co-execution dataset");
    auto* prof_opt = sim_cmd->add_option("--profiles", so.profiles, "workload profiles JSON");
    sim_cmd->add_flag("--scenario-suite", so.scenario_suite, "use the built-in 7x7 suite")
        ->excludes(prof_opt);
    sim_cmd->add_option("--seed", so.seed, "RNG seed")->required();
    sim_cmd->add_option("--out", so.out, "output dataset CSV")->required();
    sim_cmd->add_option("--threshold", so.threshold, "High-label degradation threshold, %")
        ->capture_default_str();
    sim_cmd->add_option("--stats", so.stats, "per-counter statistics")->capture_default_str();
    sim_cmd->add_option("--interval", so.interval, "counter sampling interval, s")
        ->capture_default_str();
    sim_cmd->add_option("--noise-sigma", so.noise_sigma, "counter noise sigma")
        ->capture_default_str();
    sim_cmd->add_option("--jobs", so.jobs, "worker threads (output is jobs-independent)")
        ->capture_default_str();
    so.cap.attach(sim_cmd);

    IngestOpts io_;
    auto* ingest_cmd = app.add_subcommand("ingest", "build a dataset record from counter CSVs");
    ingest_cmd->add_option("--ve", io_.ve_csv, "VE-side counter CSV")->required();
    ingest_cmd->add_option("--vh", io_.vh_csv, "VH-side counter CSV")->required();
    ingest_cmd->add_option("--t-solo", io_.t_solo, "VE solo execution time, s")->required();
    ingest_cmd->add_option("--t-coloc", io_.t_coloc, "VE co-located execution time, s")
        ->required();
    ingest_cmd->add_option("--out", io_.out, "output dataset CSV")->required();
    ingest_cmd->add_option("--ve-name", io_.ve_name, "VE workload name");
    ingest_cmd->add_option("--vh-name", io_.vh_name, "VH workload name");
    ingest_cmd->add_option("--threshold", io_.threshold, "High-label threshold, %")
        ->capture_default_str();
    ingest_cmd->add_option("--stats", io_.stats, "per-counter statistics")
        ->capture_default_str();
    ingest_cmd->add_flag("--append", io_.append, "append to an existing dataset");

    FeaturizeOpts fo;
    auto* feat_cmd = app.add_subcommand("featurize", "clean features and fit PCA");
    feat_cmd->add_option("--dataset", fo.dataset, "input dataset CSV")->required();
    feat_cmd->add_option("--out-model", fo.out_model, "output PCA model JSON")->required();
    feat_cmd->add_option("--out-matrix", fo.out_matrix, "output reduced matrix CSV")
        ->required();
    feat_cmd->add_option("--out-features", fo.out_features,
                         "output selected-feature list (one name per line)");
    feat_cmd->add_option("--loadings", fo.loadings, "write the loading table CSV here");
    feat_cmd->add_option("--correlation", fo.correlation,
                         "write the feature correlation matrix CSV here");
    auto* rk = feat_cmd->add_option("--retain-k", fo.retain_k, "components to keep")
                   ->capture_default_str();
    feat_cmd->add_option("--retain-variance", fo.retain_variance,
                         "keep components reaching this cumulative variance")
        ->excludes(rk);
    feat_cmd->add_option("--per-component", fo.per_component,
                         "top loadings taken per component")
        ->capture_default_str();
    feat_cmd->add_flag("--pc-scores", fo.pc_scores,
                       "write PC scores instead of selected original features");

    TrainOpts to;
    auto* train_cmd = app.add_subcommand("train", "train a classifier");
    train_cmd->add_option("--dataset", to.dataset, "training dataset CSV")->required();
    train_cmd->add_option("--out", to.out, "output model JSON")->required();
    train_cmd->add_option("--model-type", to.model_type, "gbdt|forest|linear|logistic")
        ->capture_default_str();
    train_cmd->add_option("--features-from", to.features_from,
                          "restrict to the feature names listed in this file");
    train_cmd->add_option("--cv", to.cv, "stratified CV folds (0 = off)")
        ->capture_default_str();
    train_cmd->add_option("--cv-metric", to.cv_metric, "accuracy|f1")->capture_default_str();
    train_cmd->add_option("--holdout", to.holdout, "holdout fraction (0 = off)")
        ->capture_default_str();
    train_cmd->add_option("--seed", to.seed, "RNG seed")->required();
    train_cmd->add_option("--trees", to.trees, "boosting rounds")->capture_default_str();
    train_cmd->add_option("--depth", to.depth, "tree depth")->capture_default_str();
    train_cmd->add_option("--learning-rate", to.learning_rate, "shrinkage")
        ->capture_default_str();
    train_cmd->add_option("--min-leaf", to.min_leaf, "min rows per leaf")
        ->capture_default_str();
    train_cmd->add_option("--l2-leaf", to.l2_leaf, "L2 leaf penalty")->capture_default_str();
    train_cmd->add_option("--subsample", to.subsample, "row fraction per tree")
        ->capture_default_str();
    train_cmd->add_option("--class-weight", to.class_weight, "balanced|none")
        ->capture_default_str();
    train_cmd->add_option("--forest-trees", to.forest_trees, "forest size")
        ->capture_default_str();
    train_cmd->add_option("--forest-depth", to.forest_depth, "forest tree depth")
        ->capture_default_str();
    train_cmd->add_option("--mtry", to.mtry, "features per split (-1 = sqrt, 0 = all)")
        ->capture_default_str();
    train_cmd->add_option("--l1", to.l1, "elastic-net L1 penalty")->capture_default_str();
    train_cmd->add_option("--l2", to.l2, "elastic-net L2 penalty")->capture_default_str();
    train_cmd->add_option("--epochs", to.epochs, "gradient-descent epochs")
        ->capture_default_str();

    PredictOpts po;
    auto* pred_cmd = app.add_subcommand("predict", "score a dataset with a trained model");
    pred_cmd->add_option("--model", po.model, "model JSON")->required();
    pred_cmd->add_option("--dataset", po.dataset, "dataset CSV")->required();
    pred_cmd->add_option("--out", po.out, "output predictions CSV")->required();
    pred_cmd->add_option("--prob-threshold", po.prob_threshold, "High decision threshold")
        ->capture_default_str();

    EvaluateOpts eo;
    auto* eval_cmd = app.add_subcommand("evaluate", "compare models on a labeled dataset");
    eval_cmd->add_option("--dataset", eo.dataset, "evaluation dataset CSV")->required();
    eval_cmd->add_option("--model", eo.models, "model JSON (repeatable)");
    eval_cmd->add_option("--baseline", eo.baseline, "enable the 'cpu-load' baseline");
    eval_cmd->add_option("--baseline-threshold", eo.baseline_threshold,
                         "baseline CPU-load threshold, %")
        ->capture_default_str();
    eval_cmd->add_option("--baseline-feature", eo.baseline_feature, "baseline feature name")
        ->capture_default_str();
    eval_cmd->add_option("--csv", eo.csv, "write machine-readable results here");
    eval_cmd->add_option("--prob-threshold", eo.prob_threshold, "High decision threshold")
        ->capture_default_str();

    ScatterOpts sc;
    auto* scat_cmd = app.add_subcommand("scatter", "export x vs degradation for plotting");
    scat_cmd->add_option("--dataset", sc.dataset, "dataset CSV")->required();
    scat_cmd->add_option("--out", sc.out, "output CSV")->required();
    scat_cmd->add_option("--x", sc.x, "feature for the x axis")->capture_default_str();

    try {
        app.parse(argc, argv);
        if (sim_cmd->parsed()) {
            if (!so.scenario_suite && so.profiles.empty())
                throw Error(Errc::bad_format, "pass --profiles or --scenario-suite");
            return run_simulate(so);
        }
        if (ingest_cmd->parsed()) return run_ingest(io_);
        if (feat_cmd->parsed()) return run_featurize(fo);
        if (train_cmd->parsed()) return run_train(to);
        if (pred_cmd->parsed()) return run_predict(po);
        if (eval_cmd->parsed()) return run_evaluate(eo);
        if (scat_cmd->parsed()) return run_scatter(sc);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
