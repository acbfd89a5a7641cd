#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "fingraph/ingest.hpp"
#include "fingraph/matrix.hpp"

namespace fingraph {

enum class FeatureStage { raw_pvclcl, winsorized, normalized };

/// N x D vertex-feature matrix moving through the cleaning pipeline.
struct FeatureMatrix {
    std::vector<std::string> tickers;
    Matrix data; // tickers x days
    FeatureStage stage = FeatureStage::raw_pvclcl;

    std::size_t days() const { return data.cols(); }
};

/// Previous-close-to-close linear return: entry (i, j) is
/// (c_{i,j+1} - c_{i,j}) / c_{i,j}, so D dates give D-1 feature columns.
/// Requires a fully imputed panel with at least two dates.
FeatureMatrix pvclcl(const PricePanel& panel);

struct WinsorizeResult {
    FeatureMatrix features;
    std::size_t clipped = 0;
};

/// Hard-clips every entry into [lo, hi]; with the default symmetric window
/// this is sign(x) * min(|x|, hi). Reports how many entries moved.
WinsorizeResult winsorize(const FeatureMatrix& x, double lo, double hi);

/// Standardizes each column (day) by its own mean and population standard
/// deviation. A numerically constant column carries no cross-sectional
/// signal and maps to all-zeros instead of erroring.
FeatureMatrix daily_znorm(const FeatureMatrix& x);

/// Heatmap-friendly export: one row per ticker, "TICKER,v1,v2,...".
void write_feature_matrix(const FeatureMatrix& x, const std::filesystem::path& path);

FeatureMatrix read_feature_matrix(const std::filesystem::path& path, FeatureStage stage);

} // namespace fingraph
