#include "fingraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fingraph/csv.hpp"
#include "fingraph/error.hpp"

namespace fingraph {

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine_distance length mismatch: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    }
    const double nu = std::sqrt(dot(u, u));
    const double nv = std::sqrt(dot(v, v));
    if (nu == 0.0 || nv == 0.0) throw DomainError("cosine_distance of a zero vector");
    return dot(u, v) / (nu * nv);
}

WeightedGraph build_cooccurrence_graph(const CoocMatrix& m) {
    const std::size_t n = m.tickers.size();
    if (n < 2) throw DomainError("graph build needs at least 2 companies, got " + std::to_string(n));

    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) norms[i] = std::sqrt(dot(m.data.row(i), m.data.row(i)));

    WeightedGraph g{m.tickers, Matrix(n, n, 0.0), GraphStage::raw_cosine};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double w = 0.0;
            if (norms[i] != 0.0 && norms[j] != 0.0) {
                w = dot(m.data.row(i), m.data.row(j)) / (norms[i] * norms[j]);
            }
            g.adjacency(i, j) = w;
            g.adjacency(j, i) = w;
        }
    }
    return g;
}

WeightedGraph threshold_median(const WeightedGraph& g) {
    if (g.stage != GraphStage::raw_cosine) {
        throw DomainError("threshold_median expects a raw cosine graph");
    }
    const std::size_t n = g.size();
    struct PairW {
        std::size_t i, j;
        double w;
    };
    std::vector<PairW> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j, g.adjacency(i, j)});

    // Heaviest half survives; stable sort keeps the ascending (i, j)
    // enumeration order among equal weights, which is the tie-break.
    const std::size_t keep = (pairs.size() + 1) / 2;
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const PairW& a, const PairW& b) { return a.w > b.w; });

    WeightedGraph out{g.tickers, Matrix(n, n, 0.0), GraphStage::thresholded};
    for (std::size_t k = 0; k < keep && k < pairs.size(); ++k) {
        out.adjacency(pairs[k].i, pairs[k].j) = pairs[k].w;
        out.adjacency(pairs[k].j, pairs[k].i) = pairs[k].w;
    }
    return out;
}

std::size_t count_edges(const WeightedGraph& g) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j)
            if (g.adjacency(i, j) != 0.0) ++count;
    return count;
}

double mean_edge_weight(const WeightedGraph& g) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (g.adjacency(i, j) != 0.0) {
                total += g.adjacency(i, j);
                ++count;
            }
        }
    }
    if (count == 0) throw DomainError("graph has no edges");
    return total / static_cast<double>(count);
}

WeightedGraph scale_mean(const WeightedGraph& g) {
    if (g.stage != GraphStage::thresholded) {
        throw DomainError("scale_mean expects a thresholded graph");
    }
    const double mu = mean_edge_weight(g); // throws on an all-zero graph
    WeightedGraph out{g.tickers, scaled(g.adjacency, 1.0 / mu), GraphStage::scaled};
    return out;
}

WeightedGraph add_self_loops_and_normalize(const WeightedGraph& g) {
    if (g.stage == GraphStage::self_looped_normalized) {
        throw DomainError("graph is already self-looped and normalized");
    }
    const std::size_t n = g.size();
    Matrix a_tilde = add(g.adjacency, Matrix::identity(n));
    std::vector<double> inv_sqrt_degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += a_tilde(i, j);
        inv_sqrt_degree[i] = 1.0 / std::sqrt(deg); // deg >= 1 thanks to the self-loop
    }
    WeightedGraph out{g.tickers, Matrix(n, n), GraphStage::self_looped_normalized};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.adjacency(i, j) = a_tilde(i, j) * inv_sqrt_degree[i] * inv_sqrt_degree[j];
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> positive_pairs(const Matrix& adjacency) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < adjacency.rows(); ++i)
        for (std::size_t j = i + 1; j < adjacency.cols(); ++j)
            if (adjacency(i, j) != 0.0) out.emplace_back(i, j);
    return out;
}

void write_edge_list(const WeightedGraph& g, const std::filesystem::path& path) {
    std::string buf = "ticker_i,ticker_j,weight\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (g.adjacency(i, j) == 0.0) continue;
            buf += g.tickers[i] + "," + g.tickers[j] + "," + csv::format_double(g.adjacency(i, j)) +
                   "\n";
        }
    }
    csv::write_file(path, buf);
}

WeightedGraph read_edge_list(const std::filesystem::path& path,
                             const std::vector<std::string>& tickers, GraphStage stage) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() ||
        csv::split(lines[0]) != std::vector<std::string>{"ticker_i", "ticker_j", "weight"}) {
        throw ParseError("edge list " + path.string() +
                         " must start with header 'ticker_i,ticker_j,weight'");
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < tickers.size(); ++i) index[tickers[i]] = i;

    WeightedGraph g{tickers, Matrix(tickers.size(), tickers.size(), 0.0), stage};
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r]);
        const std::string context = path.string() + ":" + std::to_string(r + 1);
        if (fields.size() != 3) throw ParseError("expected 3 fields at " + context);
        const auto it_i = index.find(fields[0]);
        const auto it_j = index.find(fields[1]);
        if (it_i == index.end() || it_j == index.end()) {
            throw DataError("edge references unknown ticker at " + context);
        }
        if (it_i->second == it_j->second) throw DataError("self-loop edge at " + context);
        const double w = csv::parse_double(fields[2], context);
        if (w < 0.0) throw DataError("negative edge weight at " + context);
        g.adjacency(it_i->second, it_j->second) = w;
        g.adjacency(it_j->second, it_i->second) = w;
    }
    return g;
}

} // namespace fingraph
