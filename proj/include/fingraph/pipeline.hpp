#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingraph/graph.hpp"
#include "fingraph/synth.hpp"
#include "fingraph/train.hpp"

namespace fingraph {

enum class AblationMode { full, edges_only, features_only };

AblationMode parse_mode(const std::string& s);
std::string mode_name(AblationMode mode);

/// Everything a pipeline command needs, loadable from a JSON config file;
/// every field has a default so an empty config is runnable against
/// synthetic data. CLI flags override individual fields.
struct RunConfig {
    std::filesystem::path cooc_path = "cooc.csv";
    std::vector<std::filesystem::path> price_paths{"prices.csv"};
    std::filesystem::path labels_path = "labels.csv";
    std::filesystem::path out_dir = "out";

    double winsor_lo = -0.1;
    double winsor_hi = 0.1;
    double test_fraction = 0.20;
    double val_fraction = 0.16;

    TrainConfig train;              // defaults are the tuned final values
    std::vector<TrainConfig> grid;  // empty means {train}
    std::size_t cv_folds = 5;
    std::size_t final_epochs = 82;  // used when no CV report is present

    std::size_t cluster_k = 9;
    std::size_t kmeans_restarts = 20;

    AblationMode mode = AblationMode::full;
    std::uint64_t seed = 7;

    SynthConfig synth;

    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Reassigns the edge-weight multiset to uniformly sampled distinct vertex
/// pairs (no self-loops, no duplicates): the structural ablation keeps the
/// edge count and weights but destroys who-connects-to-whom.
WeightedGraph randomize_edges(const WeightedGraph& g, std::uint64_t seed);

/// Pipeline commands. Each returns a process exit code: 0 success,
/// 1 numeric/validation failure, 2 I/O or config error.
int run_synth(const RunConfig& cfg);
int run_build(const RunConfig& cfg);
int run_cv(const RunConfig& cfg);
int run_train_eval(const RunConfig& cfg);

} // namespace fingraph
