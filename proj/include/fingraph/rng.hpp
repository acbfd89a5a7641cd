#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fingraph {

/// Seeded random stream with hand-rolled draw methods.
///
/// The standard distributions are implementation-defined, so sampling goes
/// through the raw mt19937_64 word stream only. Identical seeds therefore
/// give bit-identical sequences on every platform, which the determinism
/// guarantees of the artifact rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1), 53 bits of the next engine word.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller; consumes two engine words per call.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates with our own index draws.
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

/// Derives an independent child seed from a root seed and stream indices.
/// Stable hash, so (config, fold) style substreams never collide by accident.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0);

} // namespace fingraph
