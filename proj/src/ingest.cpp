#include "fingraph/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "fingraph/csv.hpp"
#include "fingraph/error.hpp"

namespace fingraph {

bool PricePanel::fully_present() const {
    return std::all_of(present.begin(), present.end(), [](std::uint8_t p) { return p != 0; });
}

CoocMatrix load_cooccurrence(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw ParseError("co-occurrence file has no rows: " + path.string());

    CoocMatrix out;
    std::set<std::string> seen;
    std::size_t articles = 0;
    std::vector<double> entries;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r]);
        if (fields.size() < 2 || fields[0].empty()) {
            throw ParseError("co-occurrence row " + std::to_string(r + 1) +
                             " needs a ticker and at least one entry");
        }
        if (r == 0) {
            articles = fields.size() - 1;
        } else if (fields.size() - 1 != articles) {
            throw ParseError("ragged co-occurrence row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(articles) + " entries, got " +
                             std::to_string(fields.size() - 1));
        }
        if (!seen.insert(fields[0]).second) {
            throw ParseError("duplicate ticker '" + fields[0] + "' in co-occurrence file");
        }
        out.tickers.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c] == "0") {
                entries.push_back(0.0);
            } else if (fields[c] == "1") {
                entries.push_back(1.0);
            } else {
                throw ParseError("non-binary entry '" + fields[c] + "' at row " +
                                 std::to_string(r + 1) + ", column " + std::to_string(c));
            }
        }
    }
    out.articles = articles;
    out.data = Matrix(out.tickers.size(), articles);
    out.data.data() = std::move(entries);
    return out;
}

void write_cooccurrence(const CoocMatrix& m, const std::filesystem::path& path) {
    std::string buf;
    buf.reserve(m.tickers.size() * (m.articles * 2 + 8));
    for (std::size_t i = 0; i < m.tickers.size(); ++i) {
        buf += m.tickers[i];
        for (std::size_t j = 0; j < m.articles; ++j) {
            buf += m.data(i, j) != 0.0 ? ",1" : ",0";
        }
        buf += '\n';
    }
    csv::write_file(path, buf);
}

namespace {

bool valid_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

} // namespace

PriceLoad load_prices(const std::vector<std::filesystem::path>& paths,
                      const std::vector<std::string>& universe) {
    const std::set<std::string> wanted(universe.begin(), universe.end());
    // (ticker, date) -> close; identical duplicates merge, conflicts throw.
    std::map<std::pair<std::string, std::string>, double> records;
    std::set<std::string> dates;

    for (const auto& path : paths) {
        const auto lines = csv::read_lines(path);
        if (lines.empty() || csv::split(lines[0]) != std::vector<std::string>{"ticker", "date", "close"}) {
            throw ParseError("price file " + path.string() +
                             " must start with header 'ticker,date,close'");
        }
        for (std::size_t r = 1; r < lines.size(); ++r) {
            const auto fields = csv::split(lines[r]);
            const std::string context = path.string() + ":" + std::to_string(r + 1);
            if (fields.size() != 3) throw ParseError("expected 3 fields at " + context);
            const std::string& ticker = fields[0];
            const std::string& date = fields[1];
            if (!valid_date(date)) throw ParseError("invalid date '" + date + "' at " + context);
            const double close = csv::parse_double(fields[2], context);
            if (close <= 0.0) {
                throw DataError("non-positive close " + fields[2] + " for " + ticker + " at " +
                                context);
            }
            if (!wanted.contains(ticker)) continue;
            const auto key = std::make_pair(ticker, date);
            auto [it, inserted] = records.try_emplace(key, close);
            if (!inserted && it->second != close) {
                throw DataError("conflicting close for " + ticker + " on " + date + ": " +
                                csv::format_double(it->second) + " vs " + fields[2]);
            }
            dates.insert(date);
        }
    }

    PriceLoad out;
    std::set<std::string> covered;
    for (const auto& [key, close] : records) covered.insert(key.first);
    for (const auto& t : universe) {
        if (covered.contains(t)) {
            out.panel.tickers.push_back(t);
        } else {
            out.dropped_tickers.push_back(t);
        }
    }
    out.panel.dates.assign(dates.begin(), dates.end()); // set order = ascending = chronological

    const std::size_t n = out.panel.tickers.size();
    const std::size_t d = out.panel.dates.size();
    out.panel.close = Matrix(n, d, 0.0);
    out.panel.present.assign(n * d, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            auto it = records.find({out.panel.tickers[i], out.panel.dates[j]});
            if (it != records.end()) {
                out.panel.close(i, j) = it->second;
                out.panel.present[i * d + j] = 1;
            }
        }
    }
    return out;
}

void write_prices(const PricePanel& panel, const std::filesystem::path& path) {
    std::string buf = "ticker,date,close\n";
    for (std::size_t i = 0; i < panel.tickers.size(); ++i) {
        for (std::size_t j = 0; j < panel.dates.size(); ++j) {
            if (!panel.is_present(i, j)) continue;
            buf += panel.tickers[i];
            buf += ',';
            buf += panel.dates[j];
            buf += ',';
            buf += csv::format_double(panel.close(i, j));
            buf += '\n';
        }
    }
    csv::write_file(path, buf);
}

GroundTruthLabels load_labels(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || csv::split(lines[0]) != std::vector<std::string>{"ticker", "sector"}) {
        throw ParseError("labels file " + path.string() + " must start with header 'ticker,sector'");
    }
    GroundTruthLabels out;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r]);
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
            throw ParseError("expected 'ticker,sector' at " + path.string() + ":" +
                             std::to_string(r + 1));
        }
        if (!seen.insert(fields[0]).second) {
            throw DataError("ticker '" + fields[0] + "' labeled more than once");
        }
        out.tickers.push_back(fields[0]);
        out.sectors.push_back(fields[1]);
    }
    if (out.tickers.empty()) throw ParseError("labels file has no rows: " + path.string());
    return out;
}

void write_labels(const GroundTruthLabels& labels, const std::filesystem::path& path) {
    std::string buf = "ticker,sector\n";
    for (std::size_t i = 0; i < labels.tickers.size(); ++i) {
        buf += labels.tickers[i] + "," + labels.sectors[i] + "\n";
    }
    csv::write_file(path, buf);
}

ImputeResult impute_missing(const PricePanel& panel) {
    ImputeResult out{panel, 0};
    PricePanel& p = out.panel;
    const std::size_t d = p.dates.size();
    if (d == 0) return out;

    for (std::size_t i = 0; i < p.tickers.size(); ++i) {
        std::size_t present_count = 0;
        for (std::size_t j = 0; j < d; ++j) present_count += p.is_present(i, j) ? 1 : 0;
        if (present_count == 0) {
            throw DataError("all close prices missing for ticker " + p.tickers[i]);
        }
        if (!p.is_present(i, 0)) {
            throw DataError("missing close at panel boundary: " + p.tickers[i] + " on " +
                            p.dates.front());
        }
        if (!p.is_present(i, d - 1)) {
            throw DataError("missing close at panel boundary: " + p.tickers[i] + " on " +
                            p.dates.back());
        }
        if (present_count < 2 && d >= 2) {
            throw DataError("ticker " + p.tickers[i] + " has fewer than 2 present prices");
        }

        std::size_t j = 0;
        while (j < d) {
            if (p.is_present(i, j)) {
                ++j;
                continue;
            }
            // Missing run [j, k); both endpoints present by the boundary check.
            std::size_t k = j;
            while (!p.is_present(i, k)) ++k;
            const double a = p.close(i, j - 1);
            const double b = p.close(i, k);
            const double run = static_cast<double>(k - (j - 1));
            for (std::size_t m = j; m < k; ++m) {
                const double t = static_cast<double>(m - (j - 1)) / run;
                p.close(i, m) = a + (b - a) * t;
                p.present[i * d + m] = 1;
                ++out.imputed_cells;
            }
            j = k + 1;
        }
    }
    return out;
}

AlignedUniverse align_universe(const CoocMatrix& cooc, const PricePanel& panel,
                               const GroundTruthLabels& labels) {
    std::map<std::string, std::size_t> cooc_idx, panel_idx, label_idx;
    for (std::size_t i = 0; i < cooc.tickers.size(); ++i) cooc_idx[cooc.tickers[i]] = i;
    for (std::size_t i = 0; i < panel.tickers.size(); ++i) panel_idx[panel.tickers[i]] = i;
    for (std::size_t i = 0; i < labels.tickers.size(); ++i) label_idx[labels.tickers[i]] = i;

    std::vector<std::string> common;
    for (const auto& [t, idx] : cooc_idx) {
        if (panel_idx.contains(t) && label_idx.contains(t)) common.push_back(t);
    }
    if (common.empty()) throw DataError("ticker universes have an empty intersection");
    // std::map iteration already gives ascending ticker order.

    AlignedUniverse out;
    const std::size_t n = common.size();

    out.cooc.tickers = common;
    out.cooc.articles = cooc.articles;
    out.cooc.data = Matrix(n, cooc.articles);
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = cooc.data.row(cooc_idx[common[i]]);
        std::copy(src.begin(), src.end(), out.cooc.data.row(i).begin());
    }

    out.panel.tickers = common;
    out.panel.dates = panel.dates;
    const std::size_t d = panel.dates.size();
    out.panel.close = Matrix(n, d);
    out.panel.present.assign(n * d, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = panel_idx[common[i]];
        for (std::size_t j = 0; j < d; ++j) {
            out.panel.close(i, j) = panel.close(src, j);
            out.panel.present[i * d + j] = panel.present[src * d + j];
        }
    }

    out.labels.tickers = common;
    for (const auto& t : common) out.labels.sectors.push_back(labels.sectors[label_idx[t]]);
    return out;
}

} // namespace fingraph
