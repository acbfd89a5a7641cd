#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingraph/gae.hpp"
#include "fingraph/graph.hpp"
#include "fingraph/matrix.hpp"

namespace fingraph {

/// Relation-prediction data split. The three positive sets partition the
/// edges of the finance graph; the two negative sets are fixed non-edge
/// samples of matching size, mutually disjoint.
struct EdgeSplit {
    std::vector<EdgePair> train_pos;
    std::vector<EdgePair> val_pos;
    std::vector<EdgePair> test_pos;
    std::vector<EdgePair> val_neg;
    std::vector<EdgePair> test_neg;
    std::uint64_t permutation_seed = 0;
};

struct TrainConfig {
    std::vector<std::size_t> hidden_dims{64, 16};
    std::size_t out_dim = 8;
    double l2 = 0.005;
    double lr = 0.01;
    std::size_t stop_window_n = 30;
    std::size_t stop_threshold_epochs = 80;
    std::size_t max_epochs = 300;
    double pos_weight = 0.0; // <= 0 means #neg/#pos of each batch
    std::uint64_t seed = 0;

    std::vector<std::size_t> layer_dims(std::size_t input_dim) const;
    void validate() const;
};

/// Adam moment estimates, one pair of matrices per weight matrix.
struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::size_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_model(const GaeModel& model);
};

struct EpochRecord {
    double train_loss = 0.0;
    double val_loss = 0.0; // NaN when the run has no validation set
    double val_ap = 0.0;   // likewise
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;

    std::size_t size() const { return epochs.size(); }
};

/// The seeded permutation of the graph's positive edges that every split
/// and every CV fold is cut from. Sharing it is what guarantees a test
/// edge can never resurface in a train or validation fold.
std::vector<EdgePair> permuted_positive_edges(const WeightedGraph& g, std::uint64_t seed);

/// Cuts the permuted edges into test/val/train by round-to-nearest
/// fractions (remainder to train), then samples the fixed negative sets.
EdgeSplit split_edges(const WeightedGraph& g, double test_frac, double val_frac,
                      std::uint64_t seed);

/// Uniform sample, without replacement, of unordered non-self pairs with
/// zero weight, disjoint from `exclude`.
std::vector<EdgePair> sample_negatives(const WeightedGraph& g, std::size_t count,
                                       const std::vector<EdgePair>& exclude, std::uint64_t seed);

/// One bias-corrected Adam update, in place; increments state.t.
void adam_step(GaeModel& model, const std::vector<Matrix>& grads, AdamState& state, double lr);

/// Rolling-average early stopping: never fires before
/// max(threshold_epochs, 2n) epochs; afterwards fires when the mean
/// validation loss of the last n epochs has failed to drop below the mean
/// of the n epochs before those.
bool early_stop(const TrainHistory& history, std::size_t n, std::size_t threshold_epochs);

/// Area under the precision-recall step curve of the score-descending
/// ranking, ties broken by stable input order. Errors with no positives.
double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels);

struct TrainResult {
    GaeModel model;
    TrainHistory history;
};

/// Message-passing operator over a subset of the graph's edges: the
/// adjacency restricted to `edges`, self-looped and normalized. Training
/// aggregates over training edges only; aggregating over the full graph
/// would let held-out edges steer the embeddings and inflate every
/// evaluation (a high-capacity model then scores a perfect test AP purely
/// by construction).
WeightedGraph training_operator(const WeightedGraph& g, const std::vector<EdgePair>& edges);

/// Full training loop on the finance graph g: per epoch, resample train
/// negatives (one per train positive, epoch-seeded, avoiding the held-out
/// negative sets), forward over the train-edge operator, BCE + L2 loss,
/// backward, Adam step; record train loss, validation loss and validation
/// AP; stop on early_stop or max_epochs. Returns the final-epoch model.
TrainResult train_gae(const WeightedGraph& g, const Matrix& features, const EdgeSplit& split,
                      const TrainConfig& cfg);

struct FoldScore {
    std::vector<double> fold_ap;
    std::vector<std::size_t> fold_epochs;
    double mean_ap = 0.0;
    double mean_epochs = 0.0;
};

struct CvReport {
    std::vector<TrainConfig> configs;
    std::vector<FoldScore> scores;
    std::size_t best_index = 0;
    std::size_t mean_epochs = 0; // of the best config, rounded
};

/// 5-fold cross-validation over the grid: one seeded permutation defines
/// the test cut and k contiguous validation folds of the non-test edges;
/// each config trains once per fold (aggregating over that fold's train
/// edges only); the best config has the highest mean validation AP and its
/// rounded mean epoch count feeds final training.
CvReport kfold_cv(const WeightedGraph& g, const Matrix& features,
                  const std::vector<TrainConfig>& grid, std::size_t k, std::uint64_t seed);

struct FinalResult {
    GaeModel model;
    TrainHistory history; // val fields are NaN: no validation set here
    double test_ap = 0.0;
};

/// Trains on train+val positives for exactly `epochs` epochs (no early
/// stopping), then scores AP on the held-out test pairs. The operator
/// aggregates over train+val edges; the test edges stay out of it.
FinalResult final_train_and_test(const WeightedGraph& g, const Matrix& features,
                                 const EdgeSplit& split, const TrainConfig& cfg,
                                 std::size_t epochs);

/// History export, CSV "epoch,train_loss,val_loss,val_ap".
void write_history(const TrainHistory& history, const std::filesystem::path& path);

} // namespace fingraph
