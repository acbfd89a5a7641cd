#include "fingraph/gae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "fingraph/error.hpp"
#include "fingraph/rng.hpp"

namespace fingraph {

std::size_t EdgeBatch::positives() const {
    std::size_t p = 0;
    for (auto y : labels) p += y ? 1 : 0;
    return p;
}

void validate_batch(const EdgeBatch& batch, std::size_t n_vertices) {
    if (batch.pairs.size() != batch.labels.size()) {
        throw ShapeError("edge batch has " + std::to_string(batch.pairs.size()) + " pairs but " +
                         std::to_string(batch.labels.size()) + " labels");
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& p : batch.pairs) {
        if (p.i >= p.j) throw DomainError("edge batch pair must have i < j");
        if (p.j >= n_vertices) throw DomainError("edge batch pair index out of range");
        if (!seen.insert({p.i, p.j}).second) throw DomainError("duplicate pair in edge batch");
    }
}

namespace {

void validate_model(const GaeModel& model) {
    if (model.layer_dims.size() < 2) throw DomainError("model needs at least input and output dims");
    if (model.weights.size() != model.layer_dims.size() - 1) {
        throw ShapeError("model has " + std::to_string(model.weights.size()) +
                         " weight matrices for " + std::to_string(model.layer_dims.size()) +
                         " layer dims");
    }
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
        const Matrix& w = model.weights[k];
        if (w.rows() != model.layer_dims[k] || w.cols() != model.layer_dims[k + 1]) {
            throw ShapeError("weight " + std::to_string(k) + " is " + std::to_string(w.rows()) +
                             "x" + std::to_string(w.cols()) + ", expected " +
                             std::to_string(model.layer_dims[k]) + "x" +
                             std::to_string(model.layer_dims[k + 1]));
        }
        if (!w.all_finite()) throw DomainError("non-finite weight entry in layer " + std::to_string(k));
    }
}

} // namespace

ForwardResult gcn_forward(const WeightedGraph& a_norm, const Matrix& features,
                          const GaeModel& model) {
    validate_model(model);
    if (a_norm.stage != GraphStage::self_looped_normalized) {
        throw DomainError("gcn_forward needs a self-looped, normalized graph");
    }
    const std::size_t n = a_norm.size();
    if (features.rows() != n) {
        throw ShapeError("feature rows " + std::to_string(features.rows()) +
                         " != graph size " + std::to_string(n));
    }
    if (features.cols() != model.layer_dims.front()) {
        throw ShapeError("feature cols " + std::to_string(features.cols()) + " != input dim " +
                         std::to_string(model.layer_dims.front()));
    }

    ForwardResult out;
    out.cache.a_norm = a_norm.adjacency;
    out.cache.activations.push_back(features);
    const std::size_t layers = model.layer_count();
    for (std::size_t k = 0; k < layers; ++k) {
        Matrix aggregated = matmul(a_norm.adjacency, out.cache.activations.back());
        Matrix pre = matmul(aggregated, model.weights[k]);
        Matrix post = (k + 1 < layers) ? map_elementwise(pre, Elementwise::relu) : pre;
        out.cache.aggregated.push_back(std::move(aggregated));
        out.cache.pre_activations.push_back(std::move(pre));
        out.cache.activations.push_back(std::move(post));
    }
    out.embedding.tickers = a_norm.tickers;
    out.embedding.z = out.cache.activations.back();
    return out;
}

double decode_pair(std::span<const double> z_i, std::span<const double> z_j) {
    return sigmoid(dot(z_i, z_j));
}

std::vector<double> reconstruction_scores(const LatentEmbedding& z, const EdgeBatch& batch) {
    validate_batch(batch, z.z.rows());
    std::vector<double> scores;
    scores.reserve(batch.size());
    for (const auto& p : batch.pairs) scores.push_back(decode_pair(z.z.row(p.i), z.z.row(p.j)));
    return scores;
}

double default_pos_weight(const EdgeBatch& batch) {
    const std::size_t pos = batch.positives();
    if (pos == 0 || pos == batch.size()) return 1.0;
    return static_cast<double>(batch.size() - pos) / static_cast<double>(pos);
}

double bce_loss(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                double pos_weight) {
    if (scores.size() != labels.size()) {
        throw ShapeError("bce_loss: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
    }
    if (scores.empty()) throw DomainError("bce_loss of an empty batch");
    constexpr double kEps = 1e-12;
    double total = 0.0;
    for (std::size_t p = 0; p < scores.size(); ++p) {
        const double s = std::clamp(scores[p], kEps, 1.0 - kEps);
        total += labels[p] ? -pos_weight * std::log(s) : -std::log(1.0 - s);
    }
    return total / static_cast<double>(scores.size());
}

double bce_logit_grad(double score, std::uint8_t label, double pos_weight) {
    return label ? -pos_weight * (1.0 - score) : score;
}

std::vector<Matrix> backward(const ForwardCache& cache, const EdgeBatch& batch,
                             const GaeModel& model, double l2, double pos_weight) {
    validate_model(model);
    const std::size_t layers = model.layer_count();
    if (cache.activations.size() != layers + 1 || cache.pre_activations.size() != layers ||
        cache.aggregated.size() != layers) {
        throw DomainError("forward cache does not match the model's layer count");
    }
    for (std::size_t k = 0; k <= layers; ++k) {
        if (cache.activations[k].cols() != model.layer_dims[k]) {
            throw ShapeError("forward cache layer " + std::to_string(k) + " width " +
                             std::to_string(cache.activations[k].cols()) + " != model dim " +
                             std::to_string(model.layer_dims[k]));
        }
    }
    const Matrix& z = cache.activations.back();
    const std::size_t n = z.rows();
    validate_batch(batch, n);

    // dL/dZ from the decoder: each pair contributes through s = sigmoid(z_i . z_j).
    Matrix grad_h(n, model.out_dim(), 0.0);
    if (!batch.pairs.empty()) {
        const double inv_count = 1.0 / static_cast<double>(batch.pairs.size());
        for (std::size_t p = 0; p < batch.pairs.size(); ++p) {
            const auto [i, j] = batch.pairs[p];
            const double s = decode_pair(z.row(i), z.row(j));
            const double g = bce_logit_grad(s, batch.labels[p], pos_weight) * inv_count;
            auto gi = grad_h.row(i);
            auto gj = grad_h.row(j);
            const auto zi = z.row(i);
            const auto zj = z.row(j);
            for (std::size_t c = 0; c < grad_h.cols(); ++c) {
                gi[c] += g * zj[c];
                gj[c] += g * zi[c];
            }
        }
    }

    const Matrix a_norm_t = transpose(cache.a_norm);
    std::vector<Matrix> grads(layers);
    for (std::size_t k = layers; k-- > 0;) {
        // Hidden layers pass through the ReLU mask; the final layer is linear.
        Matrix grad_pre =
            (k + 1 < layers)
                ? hadamard(grad_h, map_elementwise(cache.pre_activations[k], Elementwise::relu_grad))
                : std::move(grad_h);
        grads[k] = add(matmul(transpose(cache.aggregated[k]), grad_pre),
                       scaled(model.weights[k], l2));
        if (k > 0) grad_h = matmul(a_norm_t, matmul(grad_pre, transpose(model.weights[k])));
    }
    return grads;
}

GaeModel init_weights(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw DomainError("init_weights needs at least [D_in, D_out]");
    for (std::size_t d : layer_dims) {
        if (d == 0) throw DomainError("zero layer dimension");
    }
    GaeModel model;
    model.layer_dims = layer_dims;
    Rng rng(seed);
    for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
        const std::size_t fan_in = layer_dims[k];
        const std::size_t fan_out = layer_dims[k + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (double& v : w.data()) v = rng.uniform(-limit, limit);
        model.weights.push_back(std::move(w));
    }
    return model;
}

void save_checkpoint(const GaeModel& model, std::uint64_t seed,
                     const std::filesystem::path& path) {
    validate_model(model);
    nlohmann::json j;
    j["layer_dims"] = model.layer_dims;
    j["seed"] = seed;
    j["weights"] = nlohmann::json::array();
    for (const Matrix& w : model.weights) j["weights"].push_back(w.data());

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open checkpoint for writing: " + path.string());
    out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open checkpoint: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid checkpoint JSON in " + path.string() + ": " + e.what());
    }
    Checkpoint out;
    try {
        out.model.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
        out.seed = j.at("seed").get<std::uint64_t>();
        const auto& weights = j.at("weights");
        for (std::size_t k = 0; k + 1 < out.model.layer_dims.size(); ++k) {
            Matrix w(out.model.layer_dims[k], out.model.layer_dims[k + 1]);
            w.data() = weights.at(k).get<std::vector<double>>();
            if (w.data().size() != out.model.layer_dims[k] * out.model.layer_dims[k + 1]) {
                throw ParseError("checkpoint weight " + std::to_string(k) + " has wrong size");
            }
            out.model.weights.push_back(std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    validate_model(out.model);
    return out;
}

} // namespace fingraph
