#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "colopred/features.hpp"
#include "colopred/model.hpp"
#include "colopred/sim.hpp"
#include "detail_text.hpp"

namespace fs = std::filesystem;
using namespace colopred;

namespace {

#ifndef COLOPRED_CLI_PATH
#define COLOPRED_CLI_PATH ""
#endif

const fs::path kDir = fs::temp_directory_path() / "colopred-cli-tests";

int run(const std::string& args) {
    const std::string cmd =
        std::string("\"") + COLOPRED_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workspace {
    Workspace() {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
    }
    std::string path(const std::string& name) const { return (kDir / name).string(); }
};

}  // namespace

TEST_CASE("simulate: reproducible output, manifest, and clean failure") {
    Workspace ws;
    const std::string d1 = ws.path("a.csv"), d2 = ws.path("b.csv");
    REQUIRE(run("simulate --scenario-suite --seed 7 --out " + d1) == 0);
    REQUIRE(run("simulate --scenario-suite --seed 7 --out " + d2) == 0);
    CHECK(slurp(d1) == slurp(d2));
    CHECK(fs::exists(d1 + ".manifest.json"));

    // an identical invocation reproduces the manifest byte for byte
    const std::string manifest_before = slurp(d1 + ".manifest.json");
    REQUIRE(run("simulate --scenario-suite --seed 7 --out " + d1) == 0);
    CHECK(slurp(d1 + ".manifest.json") == manifest_before);

    // missing profiles file: exit 1, no partial output
    const std::string d3 = ws.path("c.csv");
    CHECK(run("simulate --profiles " + ws.path("nope.json") + " --seed 1 --out " + d3) == 1);
    CHECK_FALSE(fs::exists(d3));
    CHECK_FALSE(fs::exists(d3 + ".tmp"));

    // unknown flag is an input error
    CHECK(run("simulate --scenario-suite --seed 1 --frobnicate --out " + d3) == 1);
}

TEST_CASE("simulate accepts a user profiles file") {
    Workspace ws;
    auto [ves, vhs] = sim::scenario_suite();
    std::vector<sim::WorkloadProfile> both(ves.begin(), ves.begin() + 2);
    both.insert(both.end(), vhs.begin(), vhs.begin() + 2);
    {
        std::ofstream out(ws.path("profiles.json"));
        sim::write_profiles_json(both, out);
    }
    const std::string d = ws.path("d.csv");
    REQUIRE(run("simulate --profiles " + ws.path("profiles.json") + " --seed 3 --out " + d) ==
            0);
    std::istringstream in(slurp(d));
    CHECK(sim::read_dataset_csv(in).size() == 4);
}

TEST_CASE("featurize: retention modes and idempotent reruns") {
    Workspace ws;
    const std::string data = ws.path("suite.csv");
    REQUIRE(run("simulate --scenario-suite --seed 11 --out " + data) == 0);

    const std::string pca = ws.path("pca.json"), red = ws.path("red.csv"),
                      feats = ws.path("feats.txt");
    REQUIRE(run("featurize --dataset " + data + " --retain-k 8 --out-model " + pca +
                " --out-matrix " + red + " --out-features " + feats) == 0);
    {
        std::istringstream in(slurp(pca));
        auto model = features::load_pca_json(in);
        CHECK(model.n_components() == 8);
    }

    // rerun is byte-identical
    const std::string pca2 = ws.path("pca2.json"), red2 = ws.path("red2.csv");
    REQUIRE(run("featurize --dataset " + data + " --retain-k 8 --out-model " + pca2 +
                " --out-matrix " + red2) == 0);
    CHECK(slurp(pca) == slurp(pca2));
    CHECK(slurp(red) == slurp(red2));

    // variance mode reaches the requested cumulative share
    const std::string pcav = ws.path("pcav.json");
    REQUIRE(run("featurize --dataset " + data + " --retain-variance 0.9864 --out-model " +
                pcav + " --out-matrix " + ws.path("redv.csv")) == 0);
    {
        std::istringstream in(slurp(pcav));
        auto model = features::load_pca_json(in);
        double cum = 0.0;
        for (double r : model.explained_variance_ratio) cum += r;
        CHECK(cum >= 0.9864 - 1e-9);
    }

    // failure leaves nothing behind
    const std::string ghost = ws.path("ghost.json");
    CHECK(run("featurize --dataset " + ws.path("absent.csv") + " --out-model " + ghost +
              " --out-matrix " + ws.path("gm.csv")) == 1);
    CHECK_FALSE(fs::exists(ghost));
}

TEST_CASE("train/predict: model file round-trips training-time predictions") {
    Workspace ws;
    const std::string data = ws.path("suite.csv");
    REQUIRE(run("simulate --scenario-suite --seed 13 --out " + data) == 0);

    const std::string mdl = ws.path("gbdt.json");
    REQUIRE(run("train --dataset " + data + " --seed 5 --trees 40 --holdout 0.2 --cv 3 "
                "--out " + mdl) == 0);
    REQUIRE(fs::exists(mdl));

    const std::string preds = ws.path("preds.csv");
    REQUIRE(run("predict --model " + mdl + " --dataset " + data + " --out " + preds) == 0);

    // the written probabilities equal in-process scoring of the loaded model
    std::istringstream min(slurp(mdl));
    auto model = model::load_gbdt_json(min);
    std::istringstream din(slurp(data));
    auto records = sim::read_dataset_csv(din);
    std::istringstream pin(slurp(preds));
    std::string line;
    std::getline(pin, line);
    CHECK(line == "ve_name,vh_name,prob_high,pred_label,true_label");
    std::size_t row = 0;
    while (std::getline(pin, line)) {
        auto cells = detail::split_csv_line(line);
        REQUIRE(cells.size() == 5);
        const double p = model::predict_proba(model, records[row].features);
        CHECK(detail::fmt_double(p) == cells[2]);
        ++row;
    }
    CHECK(row == records.size());

    // a second predict run is byte-identical
    const std::string preds2 = ws.path("preds2.csv");
    REQUIRE(run("predict --model " + mdl + " --dataset " + data + " --out " + preds2) == 0);
    CHECK(slurp(preds) == slurp(preds2));
}

TEST_CASE("train validates the model type") {
    Workspace ws;
    const std::string data = ws.path("suite.csv");
    REQUIRE(run("simulate --scenario-suite --seed 17 --out " + data) == 0);
    CHECK(run("train --dataset " + data + " --seed 1 --model-type svm --out " +
              ws.path("m.json")) == 1);
}

TEST_CASE("evaluate emits both confusion matrices with the documented header") {
    Workspace ws;
    const std::string data = ws.path("suite.csv");
    REQUIRE(run("simulate --scenario-suite --seed 19 --out " + data) == 0);
    const std::string mdl = ws.path("gbdt.json");
    REQUIRE(run("train --dataset " + data + " --seed 5 --trees 40 --holdout 0 --out " + mdl) ==
            0);

    const std::string cmp = ws.path("cmp.csv");
    REQUIRE(run("evaluate --dataset " + data + " --model " + mdl +
                " --baseline cpu-load --baseline-threshold 100 --csv " + cmp) == 0);
    CHECK(fs::exists(cmp));
    const std::string conf_model = ws.path("cmp_confusion_gbdt.csv");
    const std::string conf_base = ws.path("cmp_confusion_baseline-cpu-load.csv");
    REQUIRE(fs::exists(conf_model));
    REQUIRE(fs::exists(conf_base));
    CHECK(slurp(conf_model).rfind("pred_low,pred_high\n", 0) == 0);
    CHECK(slurp(cmp).rfind("model,accuracy", 0) == 0);
}

TEST_CASE("ingest builds a dataset row from counter CSV logs") {
    Workspace ws;
    // synthesize plausible logs through the simulator itself
    sim::ResourceCapacity cap;
    auto [ves, vhs] = sim::scenario_suite();
    auto out = sim::simulate_pair(ves[0], vhs[1], cap, 23);
    {
        std::ofstream f(ws.path("ve.csv"));
        counters::write_counter_csv(out.ve_trace, f);
    }
    {
        std::ofstream f(ws.path("vh.csv"));
        counters::write_counter_csv(out.vh_trace, f);
    }

    const std::string data = ws.path("ingested.csv");
    REQUIRE(run("ingest --ve " + ws.path("ve.csv") + " --vh " + ws.path("vh.csv") +
                " --t-solo 120 --t-coloc 241.2 --ve-name himeno-like --vh-name ior-like "
                "--out " + data) == 0);
    std::istringstream in(slurp(data));
    auto records = sim::read_dataset_csv(in);
    REQUIRE(records.size() == 1);
    CHECK(records[0].ve_name == "himeno-like");
    CHECK(records[0].degradation.pd_percent == doctest::Approx(101.0));
    CHECK(records[0].degradation.label == metrics::Label::High);
    CHECK(records[0].features.has("VH_cpu_load_mean"));

    // append accumulates records
    REQUIRE(run("ingest --ve " + ws.path("ve.csv") + " --vh " + ws.path("vh.csv") +
                " --t-solo 120 --t-coloc 130 --ve-name a --vh-name b --append --out " +
                data) == 0);
    std::istringstream in2(slurp(data));
    CHECK(sim::read_dataset_csv(in2).size() == 2);
}

TEST_CASE("scatter exports the plot-ready CSV") {
    Workspace ws;
    const std::string data = ws.path("suite.csv");
    REQUIRE(run("simulate --scenario-suite --seed 29 --out " + data) == 0);
    const std::string sc = ws.path("scatter.csv");
    REQUIRE(run("scatter --dataset " + data + " --out " + sc) == 0);
    CHECK(slurp(sc).rfind("x,degradation_pct,label\n", 0) == 0);
    CHECK(run("scatter --dataset " + data + " --x not_a_feature --out " +
              ws.path("s2.csv")) == 1);
}
