#include "fingraph/pipeline.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include <json.hpp>

#include "fingraph/cluster.hpp"
#include "fingraph/csv.hpp"
#include "fingraph/error.hpp"
#include "fingraph/features.hpp"
#include "fingraph/gae.hpp"
#include "fingraph/rng.hpp"

namespace fingraph {

AblationMode parse_mode(const std::string& s) {
    if (s == "full") return AblationMode::full;
    if (s == "edges_only") return AblationMode::edges_only;
    if (s == "features_only") return AblationMode::features_only;
    throw ConfigError("unknown mode '" + s + "', expected full|edges_only|features_only");
}

std::string mode_name(AblationMode mode) {
    switch (mode) {
        case AblationMode::full: return "full";
        case AblationMode::edges_only: return "edges_only";
        case AblationMode::features_only: return "features_only";
    }
    return "full";
}

void RunConfig::validate() const {
    if (!(winsor_lo < winsor_hi)) throw ConfigError("winsorize needs lo < hi");
    if (test_fraction <= 0.0 || val_fraction <= 0.0 || test_fraction + val_fraction >= 1.0) {
        throw ConfigError("split fractions must be positive and sum below 1");
    }
    if (cv_folds < 2) throw ConfigError("cv_folds must be at least 2");
    if (cluster_k == 0) throw ConfigError("cluster_k must be positive");
    if (kmeans_restarts == 0) throw ConfigError("kmeans_restarts must be positive");
    train.validate();
    for (const auto& g : grid) g.validate();
}

namespace {

using nlohmann::json;

TrainConfig train_config_from_json(const json& j, const TrainConfig& base) {
    TrainConfig cfg = base;
    if (j.contains("hidden_dims")) cfg.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    if (j.contains("out_dim")) cfg.out_dim = j.at("out_dim").get<std::size_t>();
    if (j.contains("l2")) cfg.l2 = j.at("l2").get<double>();
    if (j.contains("lr")) cfg.lr = j.at("lr").get<double>();
    if (j.contains("stop_window_n")) cfg.stop_window_n = j.at("stop_window_n").get<std::size_t>();
    if (j.contains("stop_threshold_epochs")) {
        cfg.stop_threshold_epochs = j.at("stop_threshold_epochs").get<std::size_t>();
    }
    if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<std::size_t>();
    if (j.contains("pos_weight")) cfg.pos_weight = j.at("pos_weight").get<double>();
    return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["hidden_dims"] = cfg.hidden_dims;
    j["out_dim"] = cfg.out_dim;
    j["l2"] = cfg.l2;
    j["lr"] = cfg.lr;
    j["stop_window_n"] = cfg.stop_window_n;
    j["stop_threshold_epochs"] = cfg.stop_threshold_epochs;
    j["max_epochs"] = cfg.max_epochs;
    j["pos_weight"] = cfg.pos_weight;
    return j;
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    csv::write_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open file: " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

struct BuiltArtifacts {
    GroundTruthLabels labels;
    WeightedGraph finance_graph; // A_F, scaled stage
    FeatureMatrix features;      // normalized stage
};

BuiltArtifacts load_artifacts(const RunConfig& cfg) {
    BuiltArtifacts out;
    out.labels = load_labels(cfg.out_dir / "labels_aligned.csv");
    out.finance_graph = read_edge_list(cfg.out_dir / "finance_graph_edges.csv",
                                       out.labels.tickers, GraphStage::scaled);
    out.features = read_feature_matrix(cfg.out_dir / "features_normalized.csv",
                                       FeatureStage::normalized);
    if (out.features.tickers != out.labels.tickers) {
        throw DataError("built artifacts disagree on the ticker universe; rerun build");
    }
    return out;
}

int guarded(const char* command, const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const FileError& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << command << ": unexpected error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    RunConfig cfg;
    try {
        if (j.contains("paths")) {
            const json& p = j.at("paths");
            if (p.contains("cooc")) cfg.cooc_path = p.at("cooc").get<std::string>();
            if (p.contains("prices")) {
                cfg.price_paths.clear();
                for (const auto& entry : p.at("prices")) {
                    cfg.price_paths.emplace_back(entry.get<std::string>());
                }
            }
            if (p.contains("labels")) cfg.labels_path = p.at("labels").get<std::string>();
            if (p.contains("out_dir")) cfg.out_dir = p.at("out_dir").get<std::string>();
        }
        if (j.contains("winsorize")) {
            cfg.winsor_lo = j.at("winsorize").value("lo", cfg.winsor_lo);
            cfg.winsor_hi = j.at("winsorize").value("hi", cfg.winsor_hi);
        }
        if (j.contains("split")) {
            cfg.test_fraction = j.at("split").value("test_fraction", cfg.test_fraction);
            cfg.val_fraction = j.at("split").value("val_fraction", cfg.val_fraction);
        }
        if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"), cfg.train);
        if (j.contains("grid")) {
            for (const auto& entry : j.at("grid")) {
                cfg.grid.push_back(train_config_from_json(entry, cfg.train));
            }
        }
        cfg.cv_folds = j.value("cv_folds", cfg.cv_folds);
        cfg.final_epochs = j.value("final_epochs", cfg.final_epochs);
        if (j.contains("cluster")) {
            cfg.cluster_k = j.at("cluster").value("k", cfg.cluster_k);
            cfg.kmeans_restarts = j.at("cluster").value("kmeans_restarts", cfg.kmeans_restarts);
        }
        if (j.contains("mode")) cfg.mode = parse_mode(j.at("mode").get<std::string>());
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("synth")) {
            const json& s = j.at("synth");
            cfg.synth.n_companies = s.value("n_companies", cfg.synth.n_companies);
            cfg.synth.n_articles = s.value("n_articles", cfg.synth.n_articles);
            cfg.synth.n_days = s.value("n_days", cfg.synth.n_days);
            cfg.synth.k_planted = s.value("k_planted", cfg.synth.k_planted);
            cfg.synth.p_in = s.value("p_in", cfg.synth.p_in);
            cfg.synth.p_out = s.value("p_out", cfg.synth.p_out);
            cfg.synth.return_corr = s.value("return_corr", cfg.synth.return_corr);
            cfg.synth.noise_sigma = s.value("noise_sigma", cfg.synth.noise_sigma);
        }
    } catch (const json::exception& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

WeightedGraph randomize_edges(const WeightedGraph& g, std::uint64_t seed) {
    const std::size_t n = g.size();
    std::vector<double> weights;
    for (const auto& [i, j] : positive_pairs(g.adjacency)) weights.push_back(g.adjacency(i, j));

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    Rng rng(seed);
    rng.shuffle(pairs);
    WeightedGraph out{g.tickers, Matrix(n, n, 0.0), g.stage};
    for (std::size_t e = 0; e < weights.size(); ++e) {
        const auto [i, j] = pairs[e];
        out.adjacency(i, j) = weights[e];
        out.adjacency(j, i) = weights[e];
    }
    return out;
}

int run_synth(const RunConfig& cfg) {
    return guarded("synth", [&] {
        cfg.validate();
        SynthConfig synth = cfg.synth;
        synth.seed = cfg.seed; // the run seed governs every stream
        const SynthData data = generate(synth);
        if (data.no_signal) {
            std::cerr << "synth: warning: p_in == p_out and return_corr == 0, "
                         "the generated data carries no group signal\n";
        }
        const SynthPaths paths = write_synth_dataset(data, cfg.out_dir);
        std::cout << "synth: wrote " << paths.cooc.string() << ", " << paths.prices.string()
                  << ", " << paths.labels.string() << "\n";
    });
}

int run_build(const RunConfig& cfg) {
    return guarded("build", [&] {
        cfg.validate();
        const CoocMatrix cooc = load_cooccurrence(cfg.cooc_path);
        const GroundTruthLabels labels = load_labels(cfg.labels_path);
        const PriceLoad prices = load_prices(cfg.price_paths, cooc.tickers);

        std::vector<std::string> unlabeled;
        {
            const std::set<std::string> labeled(labels.tickers.begin(), labels.tickers.end());
            for (const auto& t : prices.panel.tickers) {
                if (!labeled.contains(t)) unlabeled.push_back(t);
            }
        }

        AlignedUniverse aligned = align_universe(cooc, prices.panel, labels);
        const ImputeResult imputed = impute_missing(aligned.panel);

        const FeatureMatrix raw = pvclcl(imputed.panel);
        const WinsorizeResult winsorized = winsorize(raw, cfg.winsor_lo, cfg.winsor_hi);
        const FeatureMatrix normalized = daily_znorm(winsorized.features);

        const WeightedGraph cosine = build_cooccurrence_graph(aligned.cooc);
        const WeightedGraph thresholded = threshold_median(cosine);
        const double pre_scaling_mean = mean_edge_weight(thresholded);
        const WeightedGraph finance_graph = scale_mean(thresholded);

        const std::size_t n = aligned.cooc.tickers.size();
        nlohmann::json manifest;
        manifest["nodes"] = n;
        manifest["articles"] = aligned.cooc.articles;
        manifest["dates"] = imputed.panel.dates.size();
        manifest["feature_days"] = raw.days();
        manifest["dropped_tickers"] = prices.dropped_tickers;
        manifest["tickers_without_labels"] = unlabeled;
        manifest["imputed_cells"] = imputed.imputed_cells;
        manifest["possible_pairs"] = n * (n - 1) / 2;
        manifest["edges_raw_cosine"] = count_edges(cosine);
        manifest["edges_after_threshold"] = count_edges(thresholded);
        manifest["mean_weight_pre_scaling"] = pre_scaling_mean;
        manifest["winsorize"] = {{"lo", cfg.winsor_lo}, {"hi", cfg.winsor_hi}};
        manifest["clipped_entries"] = winsorized.clipped;
        manifest["feature_entries"] = raw.data.size();
        manifest["seed"] = cfg.seed;

        write_labels(aligned.labels, cfg.out_dir / "labels_aligned.csv");
        write_edge_list(finance_graph, cfg.out_dir / "finance_graph_edges.csv");
        write_feature_matrix(raw, cfg.out_dir / "features_raw.csv");
        write_feature_matrix(winsorized.features, cfg.out_dir / "features_winsorized.csv");
        write_feature_matrix(normalized, cfg.out_dir / "features_normalized.csv");
        write_json_file(manifest, cfg.out_dir / "manifest.json");

        std::cout << "build: " << n << " nodes, " << count_edges(cosine) << " -> "
                  << count_edges(thresholded) << " edges, mean weight pre-scaling "
                  << csv::format_double(pre_scaling_mean) << "\n";
    });
}

int run_cv(const RunConfig& cfg) {
    return guarded("cv", [&] {
        cfg.validate();
        const BuiltArtifacts artifacts = load_artifacts(cfg);

        std::vector<TrainConfig> grid = cfg.grid.empty() ? std::vector<TrainConfig>{cfg.train}
                                                         : cfg.grid;
        const CvReport report =
            kfold_cv(artifacts.finance_graph, artifacts.features.data, grid, cfg.cv_folds, cfg.seed);

        nlohmann::json j;
        j["nmi_normalization"] = "geometric";
        j["folds"] = cfg.cv_folds;
        j["seed"] = cfg.seed;
        j["results"] = nlohmann::json::array();
        for (std::size_t c = 0; c < report.configs.size(); ++c) {
            nlohmann::json entry;
            entry["config"] = train_config_to_json(report.configs[c]);
            entry["fold_ap"] = report.scores[c].fold_ap;
            entry["mean_ap"] = report.scores[c].mean_ap;
            entry["fold_epochs"] = report.scores[c].fold_epochs;
            entry["mean_epochs"] = report.scores[c].mean_epochs;
            j["results"].push_back(entry);
        }
        j["best"] = {{"index", report.best_index},
                     {"config", train_config_to_json(report.configs[report.best_index])},
                     {"mean_epochs", report.mean_epochs}};
        write_json_file(j, cfg.out_dir / "cv_report.json");

        std::cout << "cv: best config index " << report.best_index << ", mean val AP "
                  << csv::format_double(report.scores[report.best_index].mean_ap)
                  << ", mean epochs " << report.mean_epochs << "\n";
    });
}

int run_train_eval(const RunConfig& cfg) {
    return guarded("train-eval", [&] {
        cfg.validate();
        const BuiltArtifacts artifacts = load_artifacts(cfg);
        const std::size_t n = artifacts.labels.tickers.size();

        TrainConfig train_cfg = cfg.train;
        std::size_t epochs = cfg.final_epochs;
        const auto report_path = cfg.out_dir / "cv_report.json";
        if (std::filesystem::exists(report_path)) {
            const nlohmann::json report = read_json_file(report_path);
            try {
                train_cfg = train_config_from_json(report.at("best").at("config"), cfg.train);
                epochs = report.at("best").at("mean_epochs").get<std::size_t>();
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("malformed cv_report.json: " + std::string(e.what()));
            }
        }
        train_cfg.seed = cfg.seed;

        // Ablations swap out what the auto-encoder trains on; the baseline
        // clusterings below always see the original graph and features.
        WeightedGraph train_graph = artifacts.finance_graph;
        Matrix features = artifacts.features.data;
        if (cfg.mode == AblationMode::edges_only) {
            features = Matrix::identity(n);
        } else if (cfg.mode == AblationMode::features_only) {
            train_graph = randomize_edges(artifacts.finance_graph, derive_seed(cfg.seed, 0xab1a, 0));
        }

        const EdgeSplit split =
            split_edges(train_graph, cfg.test_fraction, cfg.val_fraction, cfg.seed);
        const FinalResult final =
            final_train_and_test(train_graph, features, split, train_cfg, epochs);

        // Training is over: the cluster read-out aggregates over the whole
        // graph the encoder was trained for, test edges included.
        const WeightedGraph a_norm = add_self_loops_and_normalize(train_graph);
        const auto forward = gcn_forward(a_norm, features, final.model);
        const Clustering gae_clusters =
            kmeans(forward.embedding.z, cfg.cluster_k, derive_seed(cfg.seed, 0xc1a5, 0),
                   cfg.kmeans_restarts, artifacts.labels.tickers);
        const Clustering spectral_clusters = spectral_cluster(
            artifacts.finance_graph, cfg.cluster_k, derive_seed(cfg.seed, 0x59ec, 0));
        const Clustering feature_clusters =
            kmeans(artifacts.features.data, cfg.cluster_k, derive_seed(cfg.seed, 0xfea7, 0),
                   cfg.kmeans_restarts, artifacts.labels.tickers);

        nlohmann::json metrics;
        metrics["mode"] = mode_name(cfg.mode);
        metrics["seed"] = cfg.seed;
        metrics["epochs"] = epochs;
        metrics["config"] = train_config_to_json(train_cfg);
        metrics["test_average_precision"] = final.test_ap;
        metrics["gae_kmeans"] = {{"purity", purity(gae_clusters, artifacts.labels)},
                                 {"nmi", nmi(gae_clusters, artifacts.labels)}};
        metrics["spectral_baseline"] = {{"purity", purity(spectral_clusters, artifacts.labels)},
                                        {"nmi", nmi(spectral_clusters, artifacts.labels)}};
        metrics["feature_kmeans_baseline"] = {
            {"purity", purity(feature_clusters, artifacts.labels)},
            {"nmi", nmi(feature_clusters, artifacts.labels)}};
        metrics["nmi_normalization"] = "geometric";

        write_json_file(metrics, cfg.out_dir / "metrics.json");
        save_checkpoint(final.model, train_cfg.seed, cfg.out_dir / "checkpoint.json");
        write_history(final.history, cfg.out_dir / "history.csv");
        write_clustering(gae_clusters, artifacts.labels, cfg.out_dir / "clusters_gae.csv");
        write_clustering(spectral_clusters, artifacts.labels,
                         cfg.out_dir / "clusters_spectral.csv");
        write_clustering(feature_clusters, artifacts.labels,
                         cfg.out_dir / "clusters_features.csv");
        write_coords(gae_clusters, pca2d(forward.embedding.z), cfg.out_dir / "coords.csv");
        write_sector_decomposition(gae_clusters, artifacts.labels,
                                   cfg.out_dir / "sector_decomposition.json");

        std::cout << "train-eval (" << mode_name(cfg.mode) << "): test AP "
                  << csv::format_double(final.test_ap) << ", purity "
                  << csv::format_double(purity(gae_clusters, artifacts.labels)) << ", nmi "
                  << csv::format_double(nmi(gae_clusters, artifacts.labels)) << "\n";
    });
}

} // namespace fingraph
