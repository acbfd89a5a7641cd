#include "fingraph/synth.hpp"

#include <algorithm>
#include <cmath>

#include "fingraph/error.hpp"
#include "fingraph/rng.hpp"

namespace fingraph {

void SynthConfig::validate() const {
    if (n_companies < 2) throw ConfigError("synth needs at least 2 companies");
    if (n_articles == 0) throw ConfigError("synth needs at least 1 article");
    if (n_days < 2) throw ConfigError("synth needs at least 2 days");
    if (k_planted == 0 || k_planted > n_companies) {
        throw ConfigError("synth needs 1 <= k_planted <= n_companies");
    }
    if (p_out < 0.0 || p_in > 1.0 || p_out > p_in) {
        throw ConfigError("synth needs 0 <= p_out <= p_in <= 1");
    }
    if (return_corr < 0.0 || return_corr >= 1.0) {
        throw ConfigError("synth needs 0 <= return_corr < 1");
    }
    if (noise_sigma <= 0.0) throw ConfigError("synth needs noise_sigma > 0");
}

namespace {

std::string zero_padded(std::size_t value, std::size_t width) {
    std::string s = std::to_string(value);
    return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

/// Calendar dates starting 2007-01-01; trading-day realism is irrelevant,
/// the loaders only need valid, strictly increasing YYYY-MM-DD strings.
std::vector<std::string> calendar_dates(std::size_t count) {
    const auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
    const auto days_in = [&leap](int y, int m) {
        static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        return m == 2 && leap(y) ? 29 : lengths[m - 1];
    };
    std::vector<std::string> out;
    out.reserve(count);
    int y = 2007, m = 1, d = 1;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(zero_padded(static_cast<std::size_t>(y), 4) + "-" +
                      zero_padded(static_cast<std::size_t>(m), 2) + "-" +
                      zero_padded(static_cast<std::size_t>(d), 2));
        if (++d > days_in(y, m)) {
            d = 1;
            if (++m > 12) {
                m = 1;
                ++y;
            }
        }
    }
    return out;
}

} // namespace

SynthData generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthData out;
    out.no_signal = cfg.p_in == cfg.p_out && cfg.return_corr == 0.0;

    const std::size_t n = cfg.n_companies;
    const std::size_t k = cfg.k_planted;
    const std::size_t width = std::max<std::size_t>(2, std::to_string(n - 1).size());

    // Groups as equal as possible, remainder to the first groups. Tickers
    // sort in generation order, so the canonical ascending order downstream
    // keeps labels aligned.
    std::vector<std::size_t> group_of(n);
    std::vector<std::string> tickers(n);
    {
        const std::size_t base = n / k;
        const std::size_t extra = n % k;
        std::size_t idx = 0;
        for (std::size_t g = 0; g < k; ++g) {
            const std::size_t len = base + (g < extra ? 1 : 0);
            for (std::size_t m = 0; m < len; ++m, ++idx) {
                group_of[idx] = g;
                tickers[idx] = "C" + zero_padded(idx, width);
            }
        }
    }

    out.labels.tickers = tickers;
    for (std::size_t i = 0; i < n; ++i) {
        out.labels.sectors.push_back("G" + std::to_string(group_of[i]));
    }

    Rng article_rng(derive_seed(cfg.seed, 0xa271, 0));
    out.cooc.tickers = tickers;
    out.cooc.articles = cfg.n_articles;
    out.cooc.data = Matrix(n, cfg.n_articles, 0.0);
    for (std::size_t a = 0; a < cfg.n_articles; ++a) {
        const std::size_t home = static_cast<std::size_t>(article_rng.below(k));
        for (std::size_t i = 0; i < n; ++i) {
            const double p = group_of[i] == home ? cfg.p_in : cfg.p_out;
            if (article_rng.uniform() < p) out.cooc.data(i, a) = 1.0;
        }
    }

    // Geometric walks: r_it = sigma * (sqrt(rho) f_gt + sqrt(1-rho) e_it),
    // clipped at +-0.5, applied as log-returns so prices stay positive.
    Rng price_rng(derive_seed(cfg.seed, 0x9a1c, 0));
    const double common_loading = std::sqrt(cfg.return_corr);
    const double idio_loading = std::sqrt(1.0 - cfg.return_corr);
    out.prices.tickers = tickers;
    out.prices.dates = calendar_dates(cfg.n_days);
    out.prices.close = Matrix(n, cfg.n_days, 0.0);
    out.prices.present.assign(n * cfg.n_days, 1);
    for (std::size_t i = 0; i < n; ++i) out.prices.close(i, 0) = 100.0;
    std::vector<double> factor(k);
    for (std::size_t t = 1; t < cfg.n_days; ++t) {
        for (std::size_t g = 0; g < k; ++g) factor[g] = price_rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double log_return = cfg.noise_sigma * (common_loading * factor[group_of[i]] +
                                                   idio_loading * price_rng.normal());
            log_return = std::clamp(log_return, -0.5, 0.5);
            out.prices.close(i, t) = out.prices.close(i, t - 1) * std::exp(log_return);
        }
    }
    return out;
}

SynthPaths write_synth_dataset(const SynthData& data, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    SynthPaths paths{out_dir / "cooc.csv", out_dir / "prices.csv", out_dir / "labels.csv"};
    write_cooccurrence(data.cooc, paths.cooc);
    write_prices(data.prices, paths.prices);
    write_labels(data.labels, paths.labels);
    return paths;
}

} // namespace fingraph
