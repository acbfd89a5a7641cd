#include "fingraph/features.hpp"

#include <algorithm>
#include <cmath>

#include "fingraph/csv.hpp"
#include "fingraph/error.hpp"

namespace fingraph {

FeatureMatrix pvclcl(const PricePanel& panel) {
    if (!panel.fully_present()) {
        throw DataError("pvclcl requires a fully imputed price panel");
    }
    if (panel.dates.size() < 2) {
        throw DomainError("pvclcl needs at least 2 dates, got " +
                          std::to_string(panel.dates.size()));
    }
    const std::size_t n = panel.tickers.size();
    const std::size_t d = panel.dates.size() - 1;
    FeatureMatrix out{panel.tickers, Matrix(n, d), FeatureStage::raw_pvclcl};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double prev = panel.close(i, j);
            if (prev == 0.0) throw DomainError("zero close price for " + panel.tickers[i]);
            out.data(i, j) = (panel.close(i, j + 1) - prev) / prev;
        }
    }
    return out;
}

WinsorizeResult winsorize(const FeatureMatrix& x, double lo, double hi) {
    if (!(lo < hi)) {
        throw DomainError("winsorize needs lo < hi, got [" + csv::format_double(lo) + ", " +
                          csv::format_double(hi) + "]");
    }
    if (x.stage != FeatureStage::raw_pvclcl) {
        throw DomainError("winsorize expects raw pvclcl features");
    }
    WinsorizeResult out{{x.tickers, Matrix(x.data.rows(), x.data.cols()), FeatureStage::winsorized},
                        0};
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double v = x.data.data()[i];
        const double clamped = std::clamp(v, lo, hi);
        if (clamped != v) ++out.clipped;
        out.features.data.data()[i] = clamped;
    }
    return out;
}

FeatureMatrix daily_znorm(const FeatureMatrix& x) {
    if (x.stage != FeatureStage::winsorized) {
        throw DomainError("daily_znorm expects winsorized features");
    }
    FeatureMatrix out{x.tickers, Matrix(x.data.rows(), x.data.cols()), FeatureStage::normalized};
    const auto mu = column_mean(x.data);
    const auto sigma = column_std(x.data);
    for (std::size_t j = 0; j < x.data.cols(); ++j) {
        // Numerically constant columns would blow up under division by a
        // rounding-noise sigma; they carry no signal, so zero them.
        const bool flat = sigma[j] < 1e-12;
        for (std::size_t i = 0; i < x.data.rows(); ++i) {
            out.data(i, j) = flat ? 0.0 : (x.data(i, j) - mu[j]) / sigma[j];
        }
    }
    return out;
}

void write_feature_matrix(const FeatureMatrix& x, const std::filesystem::path& path) {
    std::string buf;
    for (std::size_t i = 0; i < x.tickers.size(); ++i) {
        buf += x.tickers[i];
        for (std::size_t j = 0; j < x.data.cols(); ++j) {
            buf += ',';
            buf += csv::format_double(x.data(i, j));
        }
        buf += '\n';
    }
    csv::write_file(path, buf);
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path, FeatureStage stage) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw ParseError("feature file has no rows: " + path.string());
    FeatureMatrix out;
    out.stage = stage;
    std::size_t cols = 0;
    std::vector<double> entries;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r]);
        if (fields.size() < 2) {
            throw ParseError("feature row " + std::to_string(r + 1) + " needs values");
        }
        if (r == 0) {
            cols = fields.size() - 1;
        } else if (fields.size() - 1 != cols) {
            throw ParseError("ragged feature row " + std::to_string(r + 1));
        }
        out.tickers.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            entries.push_back(
                csv::parse_double(fields[c], path.string() + ":" + std::to_string(r + 1)));
        }
    }
    out.data = Matrix(out.tickers.size(), cols);
    out.data.data() = std::move(entries);
    return out;
}

} // namespace fingraph
