#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingraph/graph.hpp"
#include "fingraph/ingest.hpp"
#include "fingraph/matrix.hpp"

namespace fingraph {

struct Clustering {
    std::vector<std::string> tickers;
    std::vector<std::size_t> assignment; // cluster id per ticker, in [0, k)
    std::size_t k = 0;
};

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending, eigenvectors as the matching columns. Converges
/// when the off-diagonal Frobenius norm drops under 1e-10 (relative to the
/// matrix scale); more than 100 sweeps is a NumericError.
struct EigenDecomposition {
    std::vector<double> values;
    Matrix vectors; // column c pairs with values[c]
};

EigenDecomposition jacobi_eigen(const Matrix& symmetric);

struct KmeansRun {
    std::vector<std::size_t> assignment;
    double inertia = 0.0;
    std::vector<double> inertia_trace; // one entry per Lloyd iteration
};

/// One seeded Lloyd run with k-means++ seeding. Stops when assignments are
/// unchanged or after 300 iterations; an emptied cluster is re-seeded with
/// the point currently farthest from its own centroid.
KmeansRun kmeans_run(const Matrix& points, std::size_t k, std::uint64_t seed);

/// Restarted k-means; keeps the lowest inertia, ties to the earliest
/// restart. Tickers are attached to the result when supplied.
Clustering kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                  std::size_t restarts = 20, std::vector<std::string> tickers = {});

/// Ng-Jordan-Weiss spectral clustering: L_sym = I - D^{-1/2} A D^{-1/2}
/// (isolated vertices get identity rows), bottom-k eigenvectors,
/// row-normalized, then k-means on the rows.
Clustering spectral_cluster(const WeightedGraph& g, std::size_t k, std::uint64_t seed);

/// Fraction of points whose cluster's plurality ground-truth class matches
/// their own; ticker sets must agree.
double purity(const Clustering& pred, const GroundTruthLabels& truth);

/// Mutual information normalized by the geometric mean of the two
/// entropies (natural log); 0 by convention when either entropy is 0.
double nmi(const Clustering& pred, const GroundTruthLabels& truth);

/// Centers the columns and projects onto the top-2 principal directions.
/// Sign convention: the largest-magnitude coordinate of each output column
/// is positive. Rank-deficient input gives a zero second column.
Matrix pca2d(const Matrix& points);

void write_clustering(const Clustering& c, const GroundTruthLabels& truth,
                      const std::filesystem::path& path);

void write_coords(const Clustering& c, const Matrix& coords, const std::filesystem::path& path);

/// Per-cluster sector composition, JSON.
void write_sector_decomposition(const Clustering& c, const GroundTruthLabels& truth,
                                const std::filesystem::path& path);

} // namespace fingraph
