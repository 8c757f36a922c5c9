#include <istream>
#include <ostream>

#include <json.hpp>

#include "colopred/error.hpp"
#include "colopred/model.hpp"

namespace colopred::model {

using nlohmann::json;

namespace {

json trees_to_json(const std::vector<Tree>& trees) {
    json out = json::array();
    for (const Tree& t : trees) {
        json nodes = json::array();
        for (const TreeNode& n : t.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_value});
        out.push_back(std::move(nodes));
    }
    return out;
}

std::vector<Tree> trees_from_json(const json& arr, std::size_t n_features) {
    std::vector<Tree> trees;
    for (const auto& tj : arr) {
        Tree t;
        for (const auto& nj : tj) {
            if (!nj.is_array() || nj.size() != 5)
                throw Error(Errc::bad_model_file, "tree node must be a 5-element array");
            TreeNode n;
            n.feature = nj[0].get<int>();
            n.threshold = nj[1].get<double>();
            n.left = nj[2].get<int>();
            n.right = nj[3].get<int>();
            n.leaf_value = nj[4].get<double>();
            t.nodes.push_back(n);
        }
        if (t.nodes.empty())
            throw Error(Errc::bad_model_file, "empty tree");
        const int size = static_cast<int>(t.nodes.size());
        for (const TreeNode& n : t.nodes) {
            if (n.feature >= static_cast<int>(n_features))
                throw Error(Errc::bad_model_file,
                            "tree references feature index " + std::to_string(n.feature) +
                                " beyond the feature list");
            if (n.feature >= 0 &&
                (n.left < 0 || n.left >= size || n.right < 0 || n.right >= size))
                throw Error(Errc::bad_model_file, "tree child index out of range");
        }
        trees.push_back(std::move(t));
    }
    return trees;
}

json parse_json(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::bad_model_file, std::string("invalid JSON: ") + e.what());
    }
}

void check_header(const json& doc, const char* format) {
    if (!doc.contains("format") || doc.at("format") != format ||
        !doc.contains("version") || doc.at("version") != 1)
        throw Error(Errc::bad_model_file,
                    std::string("expected a version-1 '") + format + "' model file");
}

}  // namespace

void save_gbdt_json(const GbdtModel& model, std::ostream& out) {
    json doc{{"format", "gbdt"},
             {"version", 1},
             {"feature_names", model.feature_names},
             {"learning_rate", model.learning_rate},
             {"base_score", model.base_score},
             {"config",
              {{"n_trees", model.config.n_trees},
               {"max_depth", model.config.max_depth},
               {"learning_rate", model.config.learning_rate},
               {"min_samples_leaf", model.config.min_samples_leaf},
               {"l2_leaf_penalty", model.config.l2_leaf_penalty},
               {"subsample", model.config.subsample},
               {"seed", model.config.seed},
               {"class_weight",
                model.config.class_weight == ClassWeight::balanced ? "balanced" : "none"}}},
             {"trees", trees_to_json(model.trees)}};
    out << doc.dump(2) << '\n';
}

GbdtModel load_gbdt_json(std::istream& in) {
    json doc = parse_json(in);
    try {
        check_header(doc, "gbdt");
        GbdtModel m;
        m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        m.learning_rate = doc.at("learning_rate").get<double>();
        m.base_score = doc.at("base_score").get<double>();
        const auto& c = doc.at("config");
        m.config.n_trees = c.at("n_trees").get<int>();
        m.config.max_depth = c.at("max_depth").get<int>();
        m.config.learning_rate = c.at("learning_rate").get<double>();
        m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
        m.config.l2_leaf_penalty = c.at("l2_leaf_penalty").get<double>();
        m.config.subsample = c.at("subsample").get<double>();
        m.config.seed = c.at("seed").get<std::uint64_t>();
        m.config.class_weight = c.at("class_weight") == "balanced" ? ClassWeight::balanced
                                                                   : ClassWeight::none;
        m.trees = trees_from_json(doc.at("trees"), m.feature_names.size());
        return m;
    } catch (const json::exception& e) {
        throw Error(Errc::bad_model_file, std::string("malformed model file: ") + e.what());
    }
}

void save_forest_json(const ForestModel& model, std::ostream& out) {
    json doc{{"format", "forest"},
             {"version", 1},
             {"feature_names", model.feature_names},
             {"config",
              {{"n_trees", model.config.n_trees},
               {"max_depth", model.config.max_depth},
               {"min_samples_leaf", model.config.min_samples_leaf},
               {"subsample", model.config.subsample},
               {"mtry", model.config.mtry},
               {"seed", model.config.seed}}},
             {"trees", trees_to_json(model.trees)}};
    out << doc.dump(2) << '\n';
}

ForestModel load_forest_json(std::istream& in) {
    json doc = parse_json(in);
    try {
        check_header(doc, "forest");
        ForestModel m;
        m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        const auto& c = doc.at("config");
        m.config.n_trees = c.at("n_trees").get<int>();
        m.config.max_depth = c.at("max_depth").get<int>();
        m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
        m.config.subsample = c.at("subsample").get<double>();
        m.config.mtry = c.at("mtry").get<int>();
        m.config.seed = c.at("seed").get<std::uint64_t>();
        m.trees = trees_from_json(doc.at("trees"), m.feature_names.size());
        return m;
    } catch (const json::exception& e) {
        throw Error(Errc::bad_model_file, std::string("malformed model file: ") + e.what());
    }
}

void save_linear_json(const LinearModel& model, std::ostream& out) {
    json doc{{"format", "linear"},
             {"version", 1},
             {"feature_names", model.feature_names},
             {"weights", model.weights},
             {"bias", model.bias},
             {"l1", model.l1},
             {"l2", model.l2},
             {"converged", model.converged}};
    out << doc.dump(2) << '\n';
}

LinearModel load_linear_json(std::istream& in) {
    json doc = parse_json(in);
    try {
        check_header(doc, "linear");
        LinearModel m;
        m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        m.weights = doc.at("weights").get<std::vector<double>>();
        m.bias = doc.at("bias").get<double>();
        m.l1 = doc.at("l1").get<double>();
        m.l2 = doc.at("l2").get<double>();
        m.converged = doc.at("converged").get<bool>();
        if (m.weights.size() != m.feature_names.size())
            throw Error(Errc::bad_model_file, "weight/feature count mismatch");
        return m;
    } catch (const json::exception& e) {
        throw Error(Errc::bad_model_file, std::string("malformed model file: ") + e.what());
    }
}

}  // namespace colopred::model
