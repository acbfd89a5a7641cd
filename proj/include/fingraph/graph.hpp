#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fingraph/ingest.hpp"
#include "fingraph/matrix.hpp"

namespace fingraph {

enum class GraphStage { raw_cosine, thresholded, scaled, self_looped_normalized };

/// Symmetric nonnegative weighted graph over the company universe. The
/// stage tracks where the adjacency sits in the build pipeline; every stage
/// before self_looped_normalized keeps a zero diagonal.
struct WeightedGraph {
    std::vector<std::string> tickers;
    Matrix adjacency; // N x N
    GraphStage stage = GraphStage::raw_cosine;

    std::size_t size() const { return tickers.size(); }
};

/// Cosine of the angle between two vectors: (u.v)/(|u||v|). In [0, 1] for
/// binary inputs. Throws DomainError on a zero vector.
double cosine_distance(std::span<const double> u, std::span<const double> v);

/// Pairwise cosine weights over the occurrence rows. A company mentioned in
/// no article gets weight 0 to everyone (an isolated vertex, not an error).
WeightedGraph build_cooccurrence_graph(const CoocMatrix& m);

/// Keeps exactly ceil(N(N-1)/4) of the N(N-1)/2 unordered pair values -- the
/// heaviest half, zeros included in the ranking -- and zeroes the rest.
/// Ties break by ascending (i, j) pair order, lower pair kept first, so the
/// survivor count is exact even on all-equal weights.
WeightedGraph threshold_median(const WeightedGraph& g);

/// Divides every entry by the mean of the nonzero off-diagonal weights
/// (each unordered edge counted once), making that mean exactly 1. Without
/// this the unit self-loops added next would drown the message passing.
WeightedGraph scale_mean(const WeightedGraph& g);

/// A~ = A + I, D = diag(row sums of A~), output D^{-1/2} A~ D^{-1/2}: each
/// edge normalized by the geometric mean of its endpoint weighted degrees.
/// Self-loops keep degrees >= 1, so isolated vertices stay well-defined.
WeightedGraph add_self_loops_and_normalize(const WeightedGraph& g);

std::size_t count_edges(const WeightedGraph& g);

/// Mean of nonzero off-diagonal weights, unordered edges counted once.
double mean_edge_weight(const WeightedGraph& g);

/// Positive-pair list (i < j, nonzero weight) in ascending pair order.
std::vector<std::pair<std::size_t, std::size_t>> positive_pairs(const Matrix& adjacency);

/// Edge list CSV "ticker_i,ticker_j,weight", upper triangle, nonzero only.
void write_edge_list(const WeightedGraph& g, const std::filesystem::path& path);

/// Rebuilds a graph from the edge-list CSV; the ticker universe has to be
/// supplied because isolated vertices never appear in the file.
WeightedGraph read_edge_list(const std::filesystem::path& path,
                             const std::vector<std::string>& tickers, GraphStage stage);

} // namespace fingraph
