#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingraph/graph.hpp"
#include "fingraph/matrix.hpp"

namespace fingraph {

/// Encoder weights, one matrix per layer. layer_dims = [D_0, ..., D_L];
/// weights[k] has shape D_k x D_{k+1}. Hidden layers apply ReLU, the final
/// layer is linear: a ReLU output would confine embeddings to the
/// nonnegative orthant and cripple the inner-product decoder.
struct GaeModel {
    std::vector<std::size_t> layer_dims;
    std::vector<Matrix> weights;

    std::size_t layer_count() const { return weights.size(); }
    std::size_t out_dim() const { return layer_dims.back(); }
};

struct LatentEmbedding {
    std::vector<std::string> tickers;
    Matrix z; // N x d_out
};

struct EdgePair {
    std::size_t i = 0, j = 0; // i < j

    bool operator==(const EdgePair&) const = default;
};

/// Relation-prediction targets: vertex pairs with a binary label, 1 when
/// the pair is an edge of the finance graph, 0 for a sampled non-edge.
struct EdgeBatch {
    std::vector<EdgePair> pairs;
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return pairs.size(); }
    std::size_t positives() const;
};

/// Everything the backward pass needs from one forward evaluation: the
/// normalized adjacency, per-layer aggregated inputs P_k = A~* H^(k),
/// pre-activations and post-activations.
struct ForwardCache {
    Matrix a_norm;
    std::vector<Matrix> aggregated;      // P_k, one per layer
    std::vector<Matrix> pre_activations; // A~* H^(k) W^(k), one per layer
    std::vector<Matrix> activations;     // H^(0) .. H^(L)
};

struct ForwardResult {
    LatentEmbedding embedding;
    ForwardCache cache;
};

/// Full-graph encoder pass: H^(k+1) = sigma(A~* H^(k) W^(k)), ReLU on
/// hidden layers, identity on the final one. The graph must already be
/// self-looped and normalized.
ForwardResult gcn_forward(const WeightedGraph& a_norm, const Matrix& features,
                          const GaeModel& model);

/// Inner-product decoder: sigmoid(z_i . z_j), the reconstructed edge
/// probability for one vertex pair.
double decode_pair(std::span<const double> z_i, std::span<const double> z_j);

/// Decoder scores for each pair of the batch, order-preserving.
std::vector<double> reconstruction_scores(const LatentEmbedding& z, const EdgeBatch& batch);

/// When pos_weight <= 0 it defaults to #negatives / #positives of the batch.
double default_pos_weight(const EdgeBatch& batch);

/// Mean over pairs of -[pos_weight * y * ln s + (1-y) * ln(1-s)], scores
/// clamped into [1e-12, 1 - 1e-12]. Errors on an empty batch.
double bce_loss(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                double pos_weight);

/// d(bce)/d(logit) for one pair before averaging: the factor that is zero
/// exactly when the score equals the label.
double bce_logit_grad(double score, std::uint8_t label, double pos_weight);

/// Exact gradients of bce_loss(batch) + (l2/2) * sum_k |W^(k)|_F^2 with
/// respect to every weight matrix. An empty batch is allowed and exercises
/// the pure ridge path (gradient l2 * W). Throws on a cache that does not
/// match the model.
std::vector<Matrix> backward(const ForwardCache& cache, const EdgeBatch& batch,
                             const GaeModel& model, double l2, double pos_weight);

/// Glorot-uniform initialization, seeded and bit-deterministic.
GaeModel init_weights(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

/// Checkpoint: JSON with layer_dims, row-major flattened weights and the
/// seed; round-trips bit-exactly.
void save_checkpoint(const GaeModel& model, std::uint64_t seed,
                     const std::filesystem::path& path);

struct Checkpoint {
    GaeModel model;
    std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

void validate_batch(const EdgeBatch& batch, std::size_t n_vertices);

} // namespace fingraph
