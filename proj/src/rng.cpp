#include "aedp/rng.hpp"

namespace aedp {

Rng::Rng(std::uint64_t seed, std::uint64_t skip) : engine_(seed), seed_(seed) {
    engine_.discard(skip);
    draws_ = skip;
}

double Rng::uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    // Rounding left u above the final partial sum; fall back to the last
    // outcome with non-zero mass.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
}

}  // namespace aedp
