#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "fingraph/ingest.hpp"

namespace fingraph {

/// Planted-partition generator configuration. Articles mention in-group
/// companies with probability p_in and out-group companies with p_out;
/// daily log-returns of one group share a common factor with loading
/// sqrt(return_corr) on top of idiosyncratic noise.
struct SynthConfig {
    std::size_t n_companies = 72;
    std::size_t n_articles = 2000;
    std::size_t n_days = 251;
    std::size_t k_planted = 9;
    double p_in = 0.3;
    double p_out = 0.02;
    double return_corr = 0.7;
    double noise_sigma = 0.02;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthData {
    CoocMatrix cooc;
    PricePanel prices;
    GroundTruthLabels labels;
    /// True when p_in == p_out and return_corr == 0: the config is legal
    /// but contains nothing for the pipeline to recover.
    bool no_signal = false;
};

/// Deterministic under seed. Group sizes as equal as possible (remainder
/// spread over the first groups); prices are geometric walks from 100 with
/// log-returns clipped at +-0.5 so they stay positive.
SynthData generate(const SynthConfig& cfg);

/// Writes cooc.csv, prices.csv and labels.csv in the exact formats the
/// loaders read, so synthetic runs exercise the real ingest path.
struct SynthPaths {
    std::filesystem::path cooc;
    std::filesystem::path prices;
    std::filesystem::path labels;
};

SynthPaths write_synth_dataset(const SynthData& data, const std::filesystem::path& out_dir);

} // namespace fingraph
