#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace aedp {

// Seeded 64-bit Mersenne Twister that counts every engine draw, so a stream
// can be resumed exactly from (seed, draws).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t skip = 0);

    // Uniform on [0, 1) with 53 random bits; consumes exactly one draw.
    double uniform();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return draws_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
};

// Inverse-CDF draw from normalized probabilities (one uniform).
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

}  // namespace aedp
