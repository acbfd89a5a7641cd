#include "fingraph/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fingraph/csv.hpp"
#include "fingraph/error.hpp"
#include "fingraph/rng.hpp"

namespace fingraph {

std::vector<std::size_t> TrainConfig::layer_dims(std::size_t input_dim) const {
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(out_dim);
    return dims;
}

void TrainConfig::validate() const {
    if (out_dim == 0) throw ConfigError("out_dim must be positive");
    for (std::size_t d : hidden_dims)
        if (d == 0) throw ConfigError("hidden dims must be positive");
    if (l2 < 0.0) throw ConfigError("l2 must be nonnegative");
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (stop_window_n == 0) throw ConfigError("stop_window_n must be positive");
    if (stop_threshold_epochs == 0) throw ConfigError("stop_threshold_epochs must be positive");
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
}

AdamState AdamState::for_model(const GaeModel& model) {
    AdamState state;
    for (const Matrix& w : model.weights) {
        state.m.emplace_back(w.rows(), w.cols(), 0.0);
        state.v.emplace_back(w.rows(), w.cols(), 0.0);
    }
    return state;
}

std::vector<EdgePair> permuted_positive_edges(const WeightedGraph& g, std::uint64_t seed) {
    std::vector<EdgePair> edges;
    for (const auto& [i, j] : positive_pairs(g.adjacency)) edges.push_back({i, j});
    Rng rng(seed);
    rng.shuffle(edges);
    return edges;
}

namespace {

std::vector<EdgePair> non_edges(const WeightedGraph& g) {
    std::vector<EdgePair> out;
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (g.adjacency(i, j) == 0.0) out.push_back({i, j});
    return out;
}

} // namespace

EdgeSplit split_edges(const WeightedGraph& g, double test_frac, double val_frac,
                      std::uint64_t seed) {
    std::vector<EdgePair> edges = permuted_positive_edges(g, seed);
    const std::size_t total = edges.size();
    if (total < 10) {
        throw DomainError("split_edges needs at least 10 edges, got " + std::to_string(total));
    }
    const auto n_test = static_cast<std::size_t>(std::lround(test_frac * static_cast<double>(total)));
    const auto n_val = static_cast<std::size_t>(std::lround(val_frac * static_cast<double>(total)));
    if (n_test + n_val >= total) throw DomainError("split fractions leave no training edges");

    EdgeSplit split;
    split.permutation_seed = seed;
    split.test_pos.assign(edges.begin(), edges.begin() + n_test);
    split.val_pos.assign(edges.begin() + n_test, edges.begin() + n_test + n_val);
    split.train_pos.assign(edges.begin() + n_test + n_val, edges.end());

    // Fixed negatives for the two evaluation sets, one shuffle for both so
    // they cannot overlap.
    std::vector<EdgePair> negatives = non_edges(g);
    if (negatives.size() < n_test + n_val) {
        throw DomainError("not enough non-edges for evaluation sets: need " +
                          std::to_string(n_test + n_val) + ", have " +
                          std::to_string(negatives.size()));
    }
    Rng neg_rng(derive_seed(seed, 0x4e65, 0));
    neg_rng.shuffle(negatives);
    split.test_neg.assign(negatives.begin(), negatives.begin() + n_test);
    split.val_neg.assign(negatives.begin() + n_test, negatives.begin() + n_test + n_val);
    return split;
}

std::vector<EdgePair> sample_negatives(const WeightedGraph& g, std::size_t count,
                                       const std::vector<EdgePair>& exclude, std::uint64_t seed) {
    std::set<std::pair<std::size_t, std::size_t>> banned;
    for (const auto& p : exclude) banned.insert({p.i, p.j});
    std::vector<EdgePair> pool;
    for (const auto& p : non_edges(g)) {
        if (!banned.contains({p.i, p.j})) pool.push_back(p);
    }
    if (pool.size() < count) {
        throw DomainError("cannot sample " + std::to_string(count) + " negatives from " +
                          std::to_string(pool.size()) + " available non-edges");
    }
    Rng rng(seed);
    rng.shuffle(pool);
    pool.resize(count);
    return pool;
}

void adam_step(GaeModel& model, const std::vector<Matrix>& grads, AdamState& state, double lr) {
    if (grads.size() != model.weights.size() || state.m.size() != model.weights.size()) {
        throw ShapeError("adam_step: gradient/state count does not match the model");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        if (!grads[k].same_shape(model.weights[k])) {
            throw ShapeError("adam_step: gradient " + std::to_string(k) + " shape mismatch");
        }
        auto& w = model.weights[k].data();
        auto& m = state.m[k].data();
        auto& v = state.v[k].data();
        const auto& grad = grads[k].data();
        for (std::size_t idx = 0; idx < w.size(); ++idx) {
            m[idx] = state.beta1 * m[idx] + (1.0 - state.beta1) * grad[idx];
            v[idx] = state.beta2 * v[idx] + (1.0 - state.beta2) * grad[idx] * grad[idx];
            const double m_hat = m[idx] / bc1;
            const double v_hat = v[idx] / bc2;
            w[idx] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

bool early_stop(const TrainHistory& history, std::size_t n, std::size_t threshold_epochs) {
    const std::size_t epochs = history.size();
    if (n == 0 || epochs < std::max(threshold_epochs, 2 * n)) return false;
    double recent = 0.0, prior = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        recent += history.epochs[epochs - 1 - k].val_loss;
        prior += history.epochs[epochs - 1 - n - k].val_loss;
    }
    return recent >= prior;
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("average_precision: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t n_pos =
        static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                               [](std::uint8_t y) { return y != 0; }));
    if (n_pos == 0) throw DomainError("average_precision needs at least one positive label");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Recall only moves at positives, by 1/n_pos each time, so AP is the
    // mean of the precisions measured there.
    double ap = 0.0;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]]) {
            ++tp;
            ap += static_cast<double>(tp) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(n_pos);
}

namespace {

EdgeBatch make_batch(const std::vector<EdgePair>& positives,
                     const std::vector<EdgePair>& negatives) {
    EdgeBatch batch;
    batch.pairs.reserve(positives.size() + negatives.size());
    batch.labels.reserve(positives.size() + negatives.size());
    for (const auto& p : positives) {
        batch.pairs.push_back(p);
        batch.labels.push_back(1);
    }
    for (const auto& p : negatives) {
        batch.pairs.push_back(p);
        batch.labels.push_back(0);
    }
    return batch;
}

double config_pos_weight(const TrainConfig& cfg, const EdgeBatch& batch) {
    return cfg.pos_weight > 0.0 ? cfg.pos_weight : default_pos_weight(batch);
}

struct EpochStep {
    double train_loss = 0.0;
    LatentEmbedding embedding;
};

std::size_t negatives_available(const WeightedGraph& g, const std::vector<EdgePair>& exclude) {
    std::set<std::pair<std::size_t, std::size_t>> banned;
    for (const auto& p : exclude) banned.insert({p.i, p.j});
    std::size_t count = 0;
    for (const auto& p : non_edges(g)) {
        if (!banned.contains({p.i, p.j})) ++count;
    }
    return count;
}

/// One optimization epoch: fresh train negatives, forward over the
/// train-edge operator, loss, backward, Adam. Returns the pre-step loss
/// and embedding (used for validation).
///
/// Negatives come from the non-edges of the finance graph g, never from
/// the operator (whose zeros also cover held-out positives). The held-out
/// negative sets are excluded from the pool: with node-identifying
/// features the model would otherwise learn to score those exact pairs
/// near zero and every evaluation would come out perfect. When the
/// exclusion leaves slightly fewer non-edges than positives (odd pair
/// counts), the batch runs that much short and the default pos_weight
/// rebalances the loss.
EpochStep run_epoch(const WeightedGraph& op, const WeightedGraph& g, const Matrix& features,
                    GaeModel& model, AdamState& adam, const std::vector<EdgePair>& train_pos,
                    const std::vector<EdgePair>& held_out_negs, const TrainConfig& cfg,
                    std::size_t epoch) {
    const std::size_t want = std::min(train_pos.size(), negatives_available(g, held_out_negs));
    const auto train_neg =
        sample_negatives(g, want, held_out_negs, derive_seed(cfg.seed, 0x7e90, epoch));
    const EdgeBatch batch = make_batch(train_pos, train_neg);
    const double pos_weight = config_pos_weight(cfg, batch);

    auto forward = gcn_forward(op, features, model);
    const auto scores = reconstruction_scores(forward.embedding, batch);
    const double loss = bce_loss(scores, batch.labels, pos_weight) +
                        0.5 * cfg.l2 *
                            std::accumulate(model.weights.begin(), model.weights.end(), 0.0,
                                            [](double acc, const Matrix& w) {
                                                return acc + frobenius_norm_sq(w);
                                            });
    const auto grads = backward(forward.cache, batch, model, cfg.l2, pos_weight);
    adam_step(model, grads, adam, cfg.lr);
    return {loss, std::move(forward.embedding)};
}

} // namespace

WeightedGraph training_operator(const WeightedGraph& g, const std::vector<EdgePair>& edges) {
    // An edge subset keeps no mean-weight contract, so it carries the
    // thresholded stage tag until normalization.
    WeightedGraph restricted{g.tickers, Matrix(g.size(), g.size(), 0.0), GraphStage::thresholded};
    for (const auto& p : edges) {
        restricted.adjacency(p.i, p.j) = g.adjacency(p.i, p.j);
        restricted.adjacency(p.j, p.i) = g.adjacency(p.j, p.i);
    }
    return add_self_loops_and_normalize(restricted);
}

TrainResult train_gae(const WeightedGraph& g, const Matrix& features, const EdgeSplit& split,
                      const TrainConfig& cfg) {
    cfg.validate();
    TrainResult out;
    out.model = init_weights(cfg.layer_dims(features.cols()), derive_seed(cfg.seed, 0x1417, 0));
    AdamState adam = AdamState::for_model(out.model);

    const WeightedGraph op = training_operator(g, split.train_pos);
    const EdgeBatch val_batch = make_batch(split.val_pos, split.val_neg);
    const double val_pos_weight = config_pos_weight(cfg, val_batch);

    std::vector<EdgePair> held_out = split.val_neg;
    held_out.insert(held_out.end(), split.test_neg.begin(), split.test_neg.end());

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        EpochStep step =
            run_epoch(op, g, features, out.model, adam, split.train_pos, held_out, cfg, epoch);
        EpochRecord record;
        record.train_loss = step.train_loss;
        const auto val_scores = reconstruction_scores(step.embedding, val_batch);
        record.val_loss = bce_loss(val_scores, val_batch.labels, val_pos_weight);
        record.val_ap = average_precision(val_scores, val_batch.labels);
        out.history.epochs.push_back(record);
        if (early_stop(out.history, cfg.stop_window_n, cfg.stop_threshold_epochs)) break;
    }
    return out;
}

CvReport kfold_cv(const WeightedGraph& g, const Matrix& features,
                  const std::vector<TrainConfig>& grid, std::size_t k, std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("cross-validation grid is empty");
    if (k < 2) throw ConfigError("kfold_cv needs k >= 2");

    // The identical permutation and test cut as split_edges(seed): the test
    // edges stay out of every fold.
    const std::vector<EdgePair> edges = permuted_positive_edges(g, seed);
    const auto n_test =
        static_cast<std::size_t>(std::lround(0.20 * static_cast<double>(edges.size())));
    const std::vector<EdgePair> pool(edges.begin() + n_test, edges.end());
    if (pool.size() < k) throw DomainError("not enough non-test edges for k folds");

    // Contiguous folds, sizes as equal as possible, remainder to the front.
    std::vector<std::vector<EdgePair>> folds(k);
    const std::size_t base = pool.size() / k;
    const std::size_t extra = pool.size() % k;
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        folds[f].assign(pool.begin() + cursor, pool.begin() + cursor + len);
        cursor += len;
    }

    // Per-fold fixed validation negatives, shared by every config.
    std::vector<std::vector<EdgePair>> fold_negs(k);
    for (std::size_t f = 0; f < k; ++f) {
        fold_negs[f] = sample_negatives(g, folds[f].size(), {}, derive_seed(seed, 0xf01d, f));
    }

    CvReport report;
    report.configs = grid;
    report.scores.resize(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        FoldScore& score = report.scores[c];
        for (std::size_t f = 0; f < k; ++f) {
            EdgeSplit split;
            split.permutation_seed = seed;
            split.test_pos.assign(edges.begin(), edges.begin() + n_test);
            split.val_pos = folds[f];
            split.val_neg = fold_negs[f];
            for (std::size_t other = 0; other < k; ++other) {
                if (other == f) continue;
                split.train_pos.insert(split.train_pos.end(), folds[other].begin(),
                                       folds[other].end());
            }
            TrainConfig cfg = grid[c];
            cfg.seed = derive_seed(seed, 0xcf60 + c, f);
            const TrainResult result = train_gae(g, features, split, cfg);
            score.fold_ap.push_back(result.history.epochs.back().val_ap);
            score.fold_epochs.push_back(result.history.size());
        }
        score.mean_ap = std::accumulate(score.fold_ap.begin(), score.fold_ap.end(), 0.0) /
                        static_cast<double>(k);
        score.mean_epochs =
            std::accumulate(score.fold_epochs.begin(), score.fold_epochs.end(), 0.0) /
            static_cast<double>(k);
    }

    report.best_index = 0;
    for (std::size_t c = 1; c < grid.size(); ++c) {
        if (report.scores[c].mean_ap > report.scores[report.best_index].mean_ap) {
            report.best_index = c;
        }
    }
    report.mean_epochs = static_cast<std::size_t>(
        std::lround(report.scores[report.best_index].mean_epochs));
    return report;
}

FinalResult final_train_and_test(const WeightedGraph& g, const Matrix& features,
                                 const EdgeSplit& split, const TrainConfig& cfg,
                                 std::size_t epochs) {
    cfg.validate();
    FinalResult out;
    out.model = init_weights(cfg.layer_dims(features.cols()), derive_seed(cfg.seed, 0x1417, 0));
    AdamState adam = AdamState::for_model(out.model);

    std::vector<EdgePair> train_pos = split.train_pos;
    train_pos.insert(train_pos.end(), split.val_pos.begin(), split.val_pos.end());
    const WeightedGraph op = training_operator(g, train_pos);

    // Only the test negatives stay held out here; the validation set is
    // part of the training data now.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        EpochStep step =
            run_epoch(op, g, features, out.model, adam, train_pos, split.test_neg, cfg, epoch);
        out.history.epochs.push_back({step.train_loss, nan, nan});
    }

    const EdgeBatch test_batch = make_batch(split.test_pos, split.test_neg);
    const auto forward = gcn_forward(op, features, out.model);
    const auto scores = reconstruction_scores(forward.embedding, test_batch);
    out.test_ap = average_precision(scores, test_batch.labels);
    return out;
}

void write_history(const TrainHistory& history, const std::filesystem::path& path) {
    std::string buf = "epoch,train_loss,val_loss,val_ap\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        const EpochRecord& r = history.epochs[e];
        buf += std::to_string(e + 1) + "," + csv::format_double(r.train_loss) + "," +
               csv::format_double(r.val_loss) + "," + csv::format_double(r.val_ap) + "\n";
    }
    csv::write_file(path, buf);
}

} // namespace fingraph
