#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "fingraph/error.hpp"
#include "fingraph/pipeline.hpp"
#include "fingraph/rng.hpp"
#include "temp_dir.hpp"

using namespace fingraph;
using test_support::TempDir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json parse_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

/// Small synthetic universe + cheap training config: the whole pipeline in
/// well under a second.
RunConfig tiny_config(const fs::path& dir) {
    RunConfig cfg;
    cfg.out_dir = dir;
    cfg.cooc_path = dir / "cooc.csv";
    cfg.price_paths = {dir / "prices.csv"};
    cfg.labels_path = dir / "labels.csv";
    cfg.synth.n_companies = 18;
    cfg.synth.n_articles = 150;
    cfg.synth.n_days = 25;
    cfg.synth.k_planted = 3;
    cfg.synth.p_in = 0.6;
    cfg.synth.p_out = 0.05;
    cfg.synth.return_corr = 0.6;
    cfg.train.hidden_dims = {8};
    cfg.train.out_dim = 4;
    cfg.train.stop_window_n = 4;
    cfg.train.stop_threshold_epochs = 10;
    cfg.train.max_epochs = 15;
    cfg.cluster_k = 3;
    cfg.kmeans_restarts = 5;
    cfg.final_epochs = 12;
    cfg.cv_folds = 3;
    cfg.seed = 7;
    return cfg;
}

} // namespace

TEST_CASE("synth then build produce a coherent manifest") {
    TempDir dir("pipe_build");
    const RunConfig cfg = tiny_config(dir.path);
    REQUIRE(run_synth(cfg) == 0);
    REQUIRE(run_build(cfg) == 0);

    const nlohmann::json manifest = parse_json(dir.path / "manifest.json");
    CHECK(manifest.at("nodes").get<std::size_t>() == 18);
    CHECK(manifest.at("articles").get<std::size_t>() == 150);
    CHECK(manifest.at("dates").get<std::size_t>() == 25);
    CHECK(manifest.at("feature_days").get<std::size_t>() == 24);
    CHECK(manifest.at("possible_pairs").get<std::size_t>() == 18 * 17 / 2);
    CHECK(manifest.at("edges_after_threshold").get<std::size_t>() <= (18 * 17 / 2 + 1) / 2);
    CHECK(manifest.at("dropped_tickers").empty());
    CHECK(manifest.at("imputed_cells").get<std::size_t>() == 0);
    CHECK(manifest.at("mean_weight_pre_scaling").get<double>() > 0.0);

    for (const char* name : {"labels_aligned.csv", "finance_graph_edges.csv", "features_raw.csv",
                             "features_winsorized.csv", "features_normalized.csv"}) {
        CHECK(fs::exists(dir.path / name));
    }
}

TEST_CASE("missing input files exit with code 2 and name the path") {
    TempDir dir("pipe_missing");
    RunConfig cfg = tiny_config(dir.path);
    cfg.cooc_path = dir.path / "does_not_exist.csv";
    CHECK(run_build(cfg) == 2);
}

TEST_CASE("invalid data content exits with code 1") {
    TempDir dir("pipe_invalid");
    RunConfig cfg = tiny_config(dir.path);
    REQUIRE(run_synth(cfg) == 0);
    // corrupt the co-occurrence file with a non-binary entry
    std::ofstream out(cfg.cooc_path, std::ios::app);
    out << "ZZZ,2";
    for (std::size_t a = 1; a < cfg.synth.n_articles; ++a) out << ",0";
    out << "\n";
    out.close();
    CHECK(run_build(cfg) == 1);
}

TEST_CASE("cv then train-eval consume built artifacts and write reports") {
    TempDir dir("pipe_cv");
    const RunConfig cfg = tiny_config(dir.path);
    REQUIRE(run_synth(cfg) == 0);
    REQUIRE(run_build(cfg) == 0);
    REQUIRE(run_cv(cfg) == 0);

    const nlohmann::json report = parse_json(dir.path / "cv_report.json");
    CHECK(report.at("results").size() == 1); // single-config grid
    CHECK(report.at("results")[0].at("fold_ap").size() == 3);
    CHECK(report.at("best").at("mean_epochs").get<std::size_t>() >= 1);
    CHECK(report.at("nmi_normalization") == "geometric");

    REQUIRE(run_train_eval(cfg) == 0);
    const nlohmann::json metrics = parse_json(dir.path / "metrics.json");
    // train-eval must have picked up the CV result
    CHECK(metrics.at("epochs") == report.at("best").at("mean_epochs"));
    for (const char* name :
         {"metrics.json", "checkpoint.json", "history.csv", "clusters_gae.csv",
          "clusters_spectral.csv", "clusters_features.csv", "coords.csv",
          "sector_decomposition.json"}) {
        CHECK(fs::exists(dir.path / name));
    }
}

TEST_CASE("cv before build is an I/O error") {
    TempDir dir("pipe_order");
    const RunConfig cfg = tiny_config(dir.path);
    CHECK(run_cv(cfg) == 2);
    CHECK(run_train_eval(cfg) == 2);
}

TEST_CASE("metrics JSON schema is stable across ablation modes") {
    TempDir dir("pipe_modes");
    RunConfig cfg = tiny_config(dir.path);
    REQUIRE(run_synth(cfg) == 0);
    REQUIRE(run_build(cfg) == 0);

    std::set<std::string> key_sets;
    for (AblationMode mode :
         {AblationMode::full, AblationMode::edges_only, AblationMode::features_only}) {
        cfg.mode = mode;
        REQUIRE(run_train_eval(cfg) == 0);
        const nlohmann::json metrics = parse_json(dir.path / "metrics.json");
        CHECK(metrics.at("mode") == mode_name(mode));
        std::string keys;
        for (auto it = metrics.begin(); it != metrics.end(); ++it) keys += it.key() + ";";
        key_sets.insert(keys);
        CHECK(metrics.at("test_average_precision").is_number());
        CHECK(metrics.at("gae_kmeans").at("purity").is_number());
        CHECK(metrics.at("spectral_baseline").at("nmi").is_number());
        CHECK(metrics.at("feature_kmeans_baseline").at("purity").is_number());
    }
    CHECK(key_sets.size() == 1);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    TempDir dir_a("pipe_det_a");
    TempDir dir_b("pipe_det_b");
    for (const auto* dir : {&dir_a, &dir_b}) {
        const RunConfig cfg = tiny_config(dir->path);
        REQUIRE(run_synth(cfg) == 0);
        REQUIRE(run_build(cfg) == 0);
        REQUIRE(run_train_eval(cfg) == 0);
    }
    for (const char* name : {"cooc.csv", "prices.csv", "labels.csv", "manifest.json",
                             "finance_graph_edges.csv", "features_normalized.csv", "metrics.json",
                             "history.csv", "clusters_gae.csv", "coords.csv", "checkpoint.json"}) {
        CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
    }
}

TEST_CASE("randomize_edges keeps the weight multiset and count, moves the pairs") {
    WeightedGraph g;
    const std::size_t n = 10;
    g.adjacency = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) g.tickers.push_back("T" + std::to_string(i));
    Rng rng(3);
    std::multiset<double> weights;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < 0.4) {
                const double w = rng.uniform(0.5, 2.0);
                g.adjacency(i, j) = g.adjacency(j, i) = w;
                weights.insert(w);
            }
        }
    }
    g.stage = GraphStage::scaled;

    const WeightedGraph r = randomize_edges(g, 99);
    std::multiset<double> new_weights;
    std::size_t edges = 0;
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(r.adjacency(i, i) == 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            CHECK(r.adjacency(i, j) == r.adjacency(j, i));
            if (r.adjacency(i, j) != 0.0) {
                new_weights.insert(r.adjacency(i, j));
                ++edges;
            }
        }
    }
    CHECK(edges == weights.size());
    CHECK(new_weights == weights);
    CHECK(randomize_edges(g, 99).adjacency.data() == r.adjacency.data());
    CHECK(randomize_edges(g, 100).adjacency.data() != r.adjacency.data());
}

TEST_CASE("run config loads from JSON with overrides and validates") {
    TempDir dir("pipe_cfg");
    const auto cfg_path = dir.file("cfg.json", R"({
      "paths": {"cooc": "a.csv", "prices": ["p1.csv", "p2.csv"], "labels": "l.csv",
                "out_dir": "outdir"},
      "winsorize": {"lo": -0.2, "hi": 0.2},
      "split": {"test_fraction": 0.25, "val_fraction": 0.1},
      "train": {"hidden_dims": [32, 8], "out_dim": 4, "l2": 0.01, "lr": 0.02,
                "stop_window_n": 10, "stop_threshold_epochs": 40, "max_epochs": 100},
      "grid": [{"l2": 0.1}, {"l2": 0.001}],
      "cv_folds": 4,
      "final_epochs": 55,
      "cluster": {"k": 5, "kmeans_restarts": 7},
      "mode": "edges_only",
      "seed": 123,
      "synth": {"n_companies": 30, "k_planted": 5}
    })");
    const RunConfig cfg = load_run_config(cfg_path);
    CHECK(cfg.price_paths.size() == 2);
    CHECK(cfg.winsor_lo == -0.2);
    CHECK(cfg.test_fraction == 0.25);
    CHECK(cfg.train.hidden_dims == std::vector<std::size_t>{32, 8});
    REQUIRE(cfg.grid.size() == 2);
    CHECK(cfg.grid[0].l2 == 0.1);
    CHECK(cfg.grid[0].hidden_dims == cfg.train.hidden_dims); // grid entries inherit
    CHECK(cfg.cv_folds == 4);
    CHECK(cfg.final_epochs == 55);
    CHECK(cfg.cluster_k == 5);
    CHECK(cfg.mode == AblationMode::edges_only);
    CHECK(cfg.seed == 123);
    CHECK(cfg.synth.n_companies == 30);

    CHECK_THROWS_AS(load_run_config(dir.path / "missing.json"), FileError);
    const auto bad = dir.file("bad.json", "{ not json");
    CHECK_THROWS_AS(load_run_config(bad), ConfigError);
    const auto invalid = dir.file("invalid.json", R"({"mode": "bogus"})");
    CHECK_THROWS_AS(load_run_config(invalid), ConfigError);
}
