#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "fingraph/csv.hpp"
#include "fingraph/error.hpp"
#include "fingraph/ingest.hpp"
#include "temp_dir.hpp"

using namespace fingraph;
using test_support::TempDir;

TEST_CASE("load_cooccurrence parses a small binary file") {
    TempDir dir("ingest");
    const auto p = dir.file("cooc.csv", "AAA,1,0,1\nBBB,0,0,1\n");
    const CoocMatrix m = load_cooccurrence(p);
    CHECK(m.tickers == std::vector<std::string>{"AAA", "BBB"});
    CHECK(m.articles == 3);
    CHECK(m.data(0, 0) == 1.0);
    CHECK(m.data(0, 1) == 0.0);
    CHECK(m.data(1, 2) == 1.0);
}

TEST_CASE("load_cooccurrence rejects non-binary entries with position") {
    TempDir dir("ingest");
    const auto p = dir.file("cooc.csv", "AAA,1,0\nBBB,0,2\n");
    CHECK_THROWS_WITH_AS(load_cooccurrence(p), doctest::Contains("row 2"), ParseError);
}

TEST_CASE("load_cooccurrence rejects empty and ragged files") {
    TempDir dir("ingest");
    CHECK_THROWS_WITH_AS(load_cooccurrence(dir.file("empty.csv", "")),
                         doctest::Contains("no rows"), ParseError);
    CHECK_THROWS_AS(load_cooccurrence(dir.file("ragged.csv", "AAA,1,0\nBBB,1\n")), ParseError);
    CHECK_THROWS_AS(load_cooccurrence(dir.file("dup.csv", "AAA,1\nAAA,0\n")), ParseError);
}

TEST_CASE("cooccurrence write/load round-trips exactly") {
    TempDir dir("ingest");
    const auto p = dir.file("cooc.csv", "AAA,1,0,1,0\nBBB,0,0,1,1\nCCC,1,1,1,0\n");
    const CoocMatrix m = load_cooccurrence(p);
    write_cooccurrence(m, dir.path / "again.csv");
    const CoocMatrix m2 = load_cooccurrence(dir.path / "again.csv");
    CHECK(m.tickers == m2.tickers);
    CHECK(m.articles == m2.articles);
    CHECK(m.data.data() == m2.data.data());
}

TEST_CASE("load_prices merges files over disjoint tickers") {
    TempDir dir("ingest");
    const auto a = dir.file("a.csv", "ticker,date,close\nAAA,2007-01-01,10\nAAA,2007-01-02,11\n");
    const auto b = dir.file("b.csv", "ticker,date,close\nBBB,2007-01-01,20\nBBB,2007-01-02,21\n");
    const PriceLoad load = load_prices({a, b}, {"AAA", "BBB"});
    CHECK(load.dropped_tickers.empty());
    CHECK(load.panel.tickers == std::vector<std::string>{"AAA", "BBB"});
    CHECK(load.panel.dates == std::vector<std::string>{"2007-01-01", "2007-01-02"});
    CHECK(load.panel.close(0, 1) == 11.0);
    CHECK(load.panel.close(1, 0) == 20.0);
    CHECK(load.panel.fully_present());
}

TEST_CASE("load_prices drops and reports tickers found in no file") {
    TempDir dir("ingest");
    const auto a = dir.file("a.csv", "ticker,date,close\nAAA,2007-01-01,10\n");
    const PriceLoad load = load_prices({a}, {"AAA", "ZZZ"});
    CHECK(load.dropped_tickers == std::vector<std::string>{"ZZZ"});
    CHECK(load.panel.tickers == std::vector<std::string>{"AAA"});
}

TEST_CASE("load_prices dedupes identical records and rejects conflicts") {
    TempDir dir("ingest");
    const auto dup = dir.file("dup.csv",
                              "ticker,date,close\nAAA,2007-01-01,10\nAAA,2007-01-01,10\n");
    CHECK(load_prices({dup}, {"AAA"}).panel.close(0, 0) == 10.0);

    const auto conflict = dir.file(
        "conflict.csv", "ticker,date,close\nAAA,2007-01-01,10\nAAA,2007-01-01,10.5\n");
    CHECK_THROWS_AS(load_prices({conflict}, {"AAA"}), DataError);
}

TEST_CASE("load_prices rejects non-positive closes") {
    TempDir dir("ingest");
    const auto p = dir.file("bad.csv", "ticker,date,close\nAAA,2007-01-01,0\n");
    CHECK_THROWS_AS(load_prices({p}, {"AAA"}), DataError);
    const auto neg = dir.file("neg.csv", "ticker,date,close\nAAA,2007-01-01,-3\n");
    CHECK_THROWS_AS(load_prices({neg}, {"AAA"}), DataError);
}

TEST_CASE("load_prices marks dates absent for one ticker as missing cells") {
    TempDir dir("ingest");
    const auto p = dir.file("gaps.csv",
                            "ticker,date,close\n"
                            "AAA,2007-01-01,10\nAAA,2007-01-02,11\nAAA,2007-01-03,12\n"
                            "BBB,2007-01-01,20\nBBB,2007-01-03,22\n");
    const PriceLoad load = load_prices({p}, {"AAA", "BBB"});
    CHECK(load.panel.is_present(0, 1));
    CHECK(!load.panel.is_present(1, 1));
}

TEST_CASE("impute_missing: single gap becomes the mean of its neighbours") {
    PricePanel panel;
    panel.tickers = {"AAA"};
    panel.dates = {"2007-01-01", "2007-01-02", "2007-01-03"};
    panel.close = Matrix{{100, 0, 110}};
    panel.present = {1, 0, 1};
    const ImputeResult r = impute_missing(panel);
    CHECK(r.imputed_cells == 1);
    CHECK(r.panel.close(0, 1) == doctest::Approx(105.0));
    CHECK(r.panel.fully_present());
}

TEST_CASE("impute_missing: longer runs interpolate linearly") {
    PricePanel panel;
    panel.tickers = {"AAA"};
    panel.dates = {"2007-01-01", "2007-01-02", "2007-01-03", "2007-01-04", "2007-01-05"};
    panel.close = Matrix{{100, 0, 0, 0, 120}};
    panel.present = {1, 0, 0, 0, 1};
    const ImputeResult r = impute_missing(panel);
    CHECK(r.panel.close(0, 1) == doctest::Approx(105.0));
    CHECK(r.panel.close(0, 2) == doctest::Approx(110.0));
    CHECK(r.panel.close(0, 3) == doctest::Approx(115.0));
}

TEST_CASE("impute_missing is a no-op on complete panels and idempotent") {
    PricePanel panel;
    panel.tickers = {"AAA", "BBB"};
    panel.dates = {"2007-01-01", "2007-01-02", "2007-01-03"};
    panel.close = Matrix{{100, 0, 110}, {50, 51, 52}};
    panel.present = {1, 0, 1, 1, 1, 1};

    const ImputeResult once = impute_missing(panel);
    const ImputeResult twice = impute_missing(once.panel);
    CHECK(twice.imputed_cells == 0);
    CHECK(once.panel.close.data() == twice.panel.close.data());
}

TEST_CASE("impute_missing rejects boundary gaps naming ticker and date") {
    PricePanel panel;
    panel.tickers = {"AAA"};
    panel.dates = {"2007-01-01", "2007-01-02"};
    panel.close = Matrix{{0, 110}};
    panel.present = {0, 1};
    CHECK_THROWS_WITH_AS(impute_missing(panel), doctest::Contains("AAA"), DataError);
    CHECK_THROWS_WITH_AS(impute_missing(panel), doctest::Contains("2007-01-01"), DataError);
}

TEST_CASE("impute_missing rejects an all-missing ticker") {
    PricePanel panel;
    panel.tickers = {"AAA"};
    panel.dates = {"2007-01-01", "2007-01-02"};
    panel.close = Matrix{{0, 0}};
    panel.present = {0, 0};
    CHECK_THROWS_AS(impute_missing(panel), DataError);
}

namespace {

PricePanel tiny_panel(const std::vector<std::string>& tickers) {
    PricePanel panel;
    panel.tickers = tickers;
    panel.dates = {"2007-01-01", "2007-01-02"};
    panel.close = Matrix(tickers.size(), 2, 100.0);
    panel.present.assign(tickers.size() * 2, 1);
    return panel;
}

GroundTruthLabels tiny_labels(const std::vector<std::string>& tickers) {
    GroundTruthLabels labels;
    labels.tickers = tickers;
    labels.sectors.assign(tickers.size(), "S");
    return labels;
}

CoocMatrix tiny_cooc(const std::vector<std::string>& tickers) {
    CoocMatrix m;
    m.tickers = tickers;
    m.articles = 2;
    m.data = Matrix(tickers.size(), 2, 1.0);
    return m;
}

} // namespace

TEST_CASE("align_universe intersects and reorders ascending") {
    const CoocMatrix cooc = tiny_cooc({"DDD", "BBB", "AAA"});
    const PricePanel panel = tiny_panel({"AAA", "CCC", "DDD"});
    const GroundTruthLabels labels = tiny_labels({"DDD", "AAA", "EEE"});
    const AlignedUniverse aligned = align_universe(cooc, panel, labels);
    const std::vector<std::string> expected{"AAA", "DDD"};
    CHECK(aligned.cooc.tickers == expected);
    CHECK(aligned.panel.tickers == expected);
    CHECK(aligned.labels.tickers == expected);
}

TEST_CASE("align_universe on identical universes normalizes order only") {
    const std::vector<std::string> shuffled{"BBB", "AAA", "CCC"};
    const AlignedUniverse aligned =
        align_universe(tiny_cooc(shuffled), tiny_panel(shuffled), tiny_labels(shuffled));
    const std::vector<std::string> expected{"AAA", "BBB", "CCC"};
    CHECK(aligned.cooc.tickers == expected);
    CHECK(aligned.panel.tickers == expected);
    CHECK(aligned.labels.tickers == expected);
}

TEST_CASE("align_universe permutes co-occurrence rows with their tickers") {
    CoocMatrix cooc = tiny_cooc({"BBB", "AAA"});
    cooc.data = Matrix{{1, 0}, {0, 1}};
    const AlignedUniverse aligned =
        align_universe(cooc, tiny_panel({"AAA", "BBB"}), tiny_labels({"AAA", "BBB"}));
    CHECK(aligned.cooc.data(0, 0) == 0.0); // AAA's row

    CHECK(aligned.cooc.data(1, 0) == 1.0); // BBB's row
}

TEST_CASE("align_universe allows a singleton intersection and rejects an empty one") {
    CHECK_NOTHROW(align_universe(tiny_cooc({"AAA", "BBB"}), tiny_panel({"AAA"}),
                                 tiny_labels({"AAA", "CCC"})));
    CHECK_THROWS_AS(
        align_universe(tiny_cooc({"AAA"}), tiny_panel({"BBB"}), tiny_labels({"CCC"})),
        DataError);
}

TEST_CASE("labels round-trip through their CSV format") {
    TempDir dir("ingest");
    const GroundTruthLabels labels = tiny_labels({"AAA", "BBB"});
    write_labels(labels, dir.path / "labels.csv");
    const GroundTruthLabels again = load_labels(dir.path / "labels.csv");
    CHECK(again.tickers == labels.tickers);
    CHECK(again.sectors == labels.sectors);
}

TEST_CASE("prices round-trip through their CSV format") {
    TempDir dir("ingest");
    PricePanel panel = tiny_panel({"AAA", "BBB"});
    panel.close(0, 0) = 101.25;
    write_prices(panel, dir.path / "prices.csv");
    const PriceLoad again = load_prices({dir.path / "prices.csv"}, panel.tickers);
    CHECK(again.panel.tickers == panel.tickers);
    CHECK(again.panel.dates == panel.dates);
    CHECK(again.panel.close.data() == panel.close.data());
}

TEST_CASE("missing files raise FileError naming the path") {
    CHECK_THROWS_WITH_AS(load_cooccurrence("/nonexistent/cooc.csv"),
                         doctest::Contains("/nonexistent/cooc.csv"), FileError);
}
