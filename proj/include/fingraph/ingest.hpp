#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingraph/matrix.hpp"

namespace fingraph {

/// Binary company-by-article occurrence matrix. Entry (i, j) is 1 when
/// company i appears in article j.
struct CoocMatrix {
    std::vector<std::string> tickers;
    std::size_t articles = 0;
    Matrix data; // tickers x articles, entries in {0, 1}
};

/// Ticker-by-date close prices with a parallel present mask. Dates are
/// strictly increasing YYYY-MM-DD strings; present closes are > 0.
struct PricePanel {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;
    Matrix close;                      // tickers x dates
    std::vector<std::uint8_t> present; // row-major, parallel to close

    bool is_present(std::size_t i, std::size_t j) const {
        return present[i * dates.size() + j] != 0;
    }
    bool fully_present() const;
};

struct GroundTruthLabels {
    std::vector<std::string> tickers;
    std::vector<std::string> sectors; // one label per ticker
};

/// Co-occurrence file: CSV, each row "TICKER,0,1,...", UTF-8, no header.
/// Rejects non-binary entries (naming row/column), ragged rows, duplicate
/// tickers and empty files.
CoocMatrix load_cooccurrence(const std::filesystem::path& path);

void write_cooccurrence(const CoocMatrix& m, const std::filesystem::path& path);

struct PriceLoad {
    PricePanel panel;
    std::vector<std::string> dropped_tickers; // requested but found in no file
};

/// Merges (ticker,date,close) records from several CSV files (header
/// "ticker,date,close") into one panel over the union of dates, restricted
/// to the requested universe. Cells with no record are flagged missing.
/// Identical duplicate records merge silently; conflicting ones are a
/// DataError, as is any close <= 0.
PriceLoad load_prices(const std::vector<std::filesystem::path>& paths,
                      const std::vector<std::string>& universe);

void write_prices(const PricePanel& panel, const std::filesystem::path& path);

/// Labels file: CSV with header "ticker,sector".
GroundTruthLabels load_labels(const std::filesystem::path& path);

void write_labels(const GroundTruthLabels& labels, const std::filesystem::path& path);

struct ImputeResult {
    PricePanel panel;
    std::size_t imputed_cells = 0;
};

/// Fills every internal missing run by linear interpolation between the
/// nearest present neighbours; a single missing day becomes the arithmetic
/// mean of its neighbours. Missing values at the first or last date are an
/// error naming the ticker and date: extrapolating there would fabricate
/// returns. Idempotent.
ImputeResult impute_missing(const PricePanel& panel);

struct AlignedUniverse {
    CoocMatrix cooc;
    PricePanel panel;
    GroundTruthLabels labels;
};

/// Restricts all three inputs to their common tickers, reordered into the
/// canonical ascending-ticker order. Errors on an empty intersection.
AlignedUniverse align_universe(const CoocMatrix& cooc, const PricePanel& panel,
                               const GroundTruthLabels& labels);

} // namespace fingraph
