#include "fingraph/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "fingraph/csv.hpp"
#include "fingraph/error.hpp"
#include "fingraph/rng.hpp"

namespace fingraph {

EigenDecomposition jacobi_eigen(const Matrix& symmetric) {
    const std::size_t n = symmetric.rows();
    if (n == 0 || symmetric.cols() != n) {
        throw ShapeError("jacobi_eigen needs a nonempty square matrix, got " +
                         std::to_string(symmetric.rows()) + "x" +
                         std::to_string(symmetric.cols()));
    }
    Matrix a = symmetric;
    Matrix v = Matrix::identity(n);

    const auto off_norm = [&a, n]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    const double tol = 1e-10 * std::max(1.0, std::sqrt(frobenius_norm_sq(a)));

    bool converged = off_norm() <= tol;
    for (std::size_t sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                // Smaller-angle root of t^2 + 2*theta*t - 1 = 0.
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a(p, j);
                    const double aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
        converged = off_norm() <= tol;
    }
    if (!converged) throw NumericError("jacobi_eigen failed to converge within 100 sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&a](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, c) = v(i, order[c]);
    }
    return out;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// k-means++ seeding: each next center drawn with probability proportional
/// to the squared distance from the nearest already-chosen center.
std::vector<std::size_t> kmeanspp_seed(const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows();
    std::vector<std::size_t> centers;
    centers.push_back(static_cast<std::size_t>(rng.below(n)));
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
    while (centers.size() < k) {
        for (std::size_t i = 0; i < n; ++i) {
            min_sq[i] = std::min(min_sq[i], sq_dist(points.row(i), points.row(centers.back())));
        }
        const double total = std::accumulate(min_sq.begin(), min_sq.end(), 0.0);
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = static_cast<std::size_t>(rng.below(n)); // all points already covered
        } else {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += min_sq[i];
                if (cumulative > target) {
                    chosen = i;
                    break;
                }
            }
        }
        centers.push_back(chosen);
    }
    return centers;
}

} // namespace

KmeansRun kmeans_run(const Matrix& points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    if (k == 0 || k > n) {
        throw DomainError("kmeans needs 1 <= k <= N, got k=" + std::to_string(k) +
                          ", N=" + std::to_string(n));
    }
    Rng rng(seed);
    Matrix centroids(k, d);
    {
        const auto seeds = kmeanspp_seed(points, k, rng);
        for (std::size_t c = 0; c < k; ++c) {
            const auto src = points.row(seeds[c]);
            std::copy(src.begin(), src.end(), centroids.row(c).begin());
        }
    }

    KmeansRun run;
    run.assignment.assign(n, 0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t iter = 0; iter < 300; ++iter) {
        // Assignment step; nearest centroid, ties to the lowest id.
        bool changed = iter == 0;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq_dist(points.row(i), centroids.row(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double dd = sq_dist(points.row(i), centroids.row(c));
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (run.assignment[i] != best) changed = true;
            run.assignment[i] = best;
            inertia += best_d;
        }
        run.inertia_trace.push_back(inertia);
        run.inertia = inertia;
        if (!changed) break;

        // Update step.
        std::fill(centroids.data().begin(), centroids.data().end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto c = centroids.row(run.assignment[i]);
            const auto p = points.row(i);
            for (std::size_t j = 0; j < d; ++j) c[j] += p[j];
            ++counts[run.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) centroids(c, j) /= static_cast<double>(counts[c]);
        }
        // Re-seed each emptied cluster with the point farthest from its own
        // centroid, so k stays fixed.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t farthest = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[run.assignment[i]] <= 1) continue; // don't empty another cluster
                const double dd = sq_dist(points.row(i), centroids.row(run.assignment[i]));
                if (dd > far_d) {
                    far_d = dd;
                    farthest = i;
                }
            }
            const auto p = points.row(farthest);
            std::copy(p.begin(), p.end(), centroids.row(c).begin());
            --counts[run.assignment[farthest]];
            run.assignment[farthest] = c;
            counts[c] = 1;
        }
    }
    return run;
}

Clustering kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                  std::vector<std::string> tickers) {
    if (restarts == 0) throw DomainError("kmeans needs at least one restart");
    KmeansRun best;
    bool have_best = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        KmeansRun run = kmeans_run(points, k, derive_seed(seed, 0x63a2, r));
        if (!have_best || run.inertia < best.inertia) {
            best = std::move(run);
            have_best = true;
        }
    }
    Clustering out;
    out.tickers = std::move(tickers);
    out.assignment = std::move(best.assignment);
    out.k = k;
    return out;
}

Clustering spectral_cluster(const WeightedGraph& g, std::size_t k, std::uint64_t seed) {
    const std::size_t n = g.size();
    if (k == 0 || k > n) {
        throw DomainError("spectral_cluster needs 1 <= k <= N, got k=" + std::to_string(k));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (g.adjacency(i, i) != 0.0) throw DomainError("spectral_cluster needs a zero diagonal");
        for (std::size_t j = 0; j < n; ++j) {
            if (g.adjacency(i, j) < 0.0) throw DomainError("spectral_cluster needs nonnegative weights");
        }
    }

    // L_sym = I - D^{-1/2} A D^{-1/2}; a degree-0 vertex keeps an identity row.
    std::vector<double> inv_sqrt_degree(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += g.adjacency(i, j);
        if (deg > 0.0) inv_sqrt_degree[i] = 1.0 / std::sqrt(deg);
    }
    Matrix laplacian = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                laplacian(i, j) = -g.adjacency(i, j) * inv_sqrt_degree[i] * inv_sqrt_degree[j];

    const EigenDecomposition eig = jacobi_eigen(laplacian);
    Matrix embedding(n, k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i = 0; i < n; ++i) embedding(i, c) = eig.vectors(i, c);

    for (std::size_t i = 0; i < n; ++i) {
        const double norm = std::sqrt(dot(embedding.row(i), embedding.row(i)));
        if (norm == 0.0) continue;
        for (std::size_t c = 0; c < k; ++c) embedding(i, c) /= norm;
    }
    return kmeans(embedding, k, seed, 20, g.tickers);
}

namespace {

/// Cluster-by-class contingency counts keyed on shared tickers.
std::vector<std::vector<std::size_t>> contingency(const Clustering& pred,
                                                  const GroundTruthLabels& truth,
                                                  std::size_t& n_classes) {
    if (pred.tickers.size() != truth.tickers.size()) {
        throw DataError("clustering and labels cover different universes");
    }
    std::map<std::string, std::string> sector_of;
    for (std::size_t i = 0; i < truth.tickers.size(); ++i) {
        sector_of[truth.tickers[i]] = truth.sectors[i];
    }
    std::map<std::string, std::size_t> class_id;
    for (const auto& [t, s] : sector_of) {
        class_id.try_emplace(s, class_id.size());
    }
    n_classes = class_id.size();

    std::vector<std::vector<std::size_t>> table(pred.k,
                                                std::vector<std::size_t>(n_classes, 0));
    for (std::size_t i = 0; i < pred.tickers.size(); ++i) {
        const auto it = sector_of.find(pred.tickers[i]);
        if (it == sector_of.end()) {
            throw DataError("ticker " + pred.tickers[i] + " has no ground-truth label");
        }
        table[pred.assignment[i]][class_id[it->second]] += 1;
    }
    return table;
}

} // namespace

double purity(const Clustering& pred, const GroundTruthLabels& truth) {
    std::size_t n_classes = 0;
    const auto table = contingency(pred, truth, n_classes);
    std::size_t agree = 0;
    for (const auto& row : table) agree += *std::max_element(row.begin(), row.end());
    return static_cast<double>(agree) / static_cast<double>(pred.tickers.size());
}

double nmi(const Clustering& pred, const GroundTruthLabels& truth) {
    std::size_t n_classes = 0;
    const auto table = contingency(pred, truth, n_classes);
    const double n = static_cast<double>(pred.tickers.size());

    std::vector<double> cluster_totals(table.size(), 0.0);
    std::vector<double> class_totals(n_classes, 0.0);
    for (std::size_t c = 0; c < table.size(); ++c) {
        for (std::size_t s = 0; s < n_classes; ++s) {
            cluster_totals[c] += static_cast<double>(table[c][s]);
            class_totals[s] += static_cast<double>(table[c][s]);
        }
    }

    double mutual = 0.0;
    for (std::size_t c = 0; c < table.size(); ++c) {
        for (std::size_t s = 0; s < n_classes; ++s) {
            const double joint = static_cast<double>(table[c][s]);
            if (joint == 0.0) continue;
            mutual += (joint / n) * std::log(n * joint / (cluster_totals[c] * class_totals[s]));
        }
    }
    double h_pred = 0.0, h_truth = 0.0;
    for (double t : cluster_totals)
        if (t > 0.0) h_pred -= (t / n) * std::log(t / n);
    for (double t : class_totals)
        if (t > 0.0) h_truth -= (t / n) * std::log(t / n);

    if (h_pred == 0.0 || h_truth == 0.0) return 0.0;
    return std::clamp(mutual / std::sqrt(h_pred * h_truth), 0.0, 1.0);
}

Matrix pca2d(const Matrix& points) {
    const std::size_t n = points.rows();
    if (n < 2) throw DomainError("pca2d needs at least 2 points");

    Matrix centered = points;
    const auto mu = column_mean(points);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < points.cols(); ++j) centered(i, j) -= mu[j];

    // Eigenvectors of the N x N Gram matrix give the projections directly:
    // the c-th principal coordinate column is sqrt(lambda_c) * u_c.
    const Matrix gram = matmul(centered, transpose(centered));
    const EigenDecomposition eig = jacobi_eigen(gram);

    Matrix coords(n, 2, 0.0);
    const double lambda_top = std::max(eig.values[n - 1], 0.0);
    for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t idx = n - 1 - c; // eigenvalues ascending; take the top two
        double lambda = std::max(eig.values[idx], 0.0);
        // eigenvalues buried in the solver's rounding noise are rank
        // deficiency, not structure; zero the column instead of amplifying it
        if (lambda < lambda_top * 1e-12) lambda = 0.0;
        const double scale = std::sqrt(lambda);
        for (std::size_t i = 0; i < n; ++i) coords(i, c) = scale * eig.vectors(i, idx);

        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(coords(i, c)) > std::abs(coords(arg, c))) arg = i;
        }
        if (coords(arg, c) < 0.0) {
            for (std::size_t i = 0; i < n; ++i) coords(i, c) = -coords(i, c);
        }
    }
    return coords;
}

void write_clustering(const Clustering& c, const GroundTruthLabels& truth,
                      const std::filesystem::path& path) {
    std::map<std::string, std::string> sector_of;
    for (std::size_t i = 0; i < truth.tickers.size(); ++i)
        sector_of[truth.tickers[i]] = truth.sectors[i];
    std::string buf = "ticker,cluster_id,sector\n";
    for (std::size_t i = 0; i < c.tickers.size(); ++i) {
        buf += c.tickers[i] + "," + std::to_string(c.assignment[i]) + "," +
               sector_of[c.tickers[i]] + "\n";
    }
    csv::write_file(path, buf);
}

void write_coords(const Clustering& c, const Matrix& coords, const std::filesystem::path& path) {
    std::string buf = "ticker,x,y,cluster_id\n";
    for (std::size_t i = 0; i < c.tickers.size(); ++i) {
        buf += c.tickers[i] + "," + csv::format_double(coords(i, 0)) + "," +
               csv::format_double(coords(i, 1)) + "," + std::to_string(c.assignment[i]) + "\n";
    }
    csv::write_file(path, buf);
}

void write_sector_decomposition(const Clustering& c, const GroundTruthLabels& truth,
                                const std::filesystem::path& path) {
    std::map<std::string, std::string> sector_of;
    for (std::size_t i = 0; i < truth.tickers.size(); ++i)
        sector_of[truth.tickers[i]] = truth.sectors[i];

    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t cluster = 0; cluster < c.k; ++cluster) {
        std::map<std::string, std::size_t> counts;
        for (std::size_t i = 0; i < c.tickers.size(); ++i) {
            if (c.assignment[i] == cluster) counts[sector_of[c.tickers[i]]] += 1;
        }
        nlohmann::json entry;
        entry["cluster"] = cluster;
        entry["sectors"] = counts;
        clusters.push_back(entry);
    }
    nlohmann::json j;
    j["clusters"] = clusters;
    csv::write_file(path, j.dump(2) + "\n");
}

} // namespace fingraph
