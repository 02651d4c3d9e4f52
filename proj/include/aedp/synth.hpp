#pragma once

// Synthetic AE surrogates: exponentially decaying sinusoids in Gaussian noise.

#include <cstdint>
#include <vector>

#include "aedp/io.hpp"
#include "aedp/windowing.hpp"

namespace aedp {

struct BurstSpec {
    double onset = 0.0;         // s
    double amplitude = 1.0;     // V, peak of the envelope
    double decay_tau = 1e-3;    // s
    double carrier_freq = 1e5;  // Hz
    int family = 1;
    double rise_time = 0.0;  // s, linear envelope ramp before the decay
};

struct SynthSpec {
    double duration = 0.1;  // s
    double sample_rate = 1e6;
    double noise_sigma = 1e-3;
    std::vector<BurstSpec> bursts;

    std::size_t length() const;  // samples
    void validate() const;
};

struct BurstAnnotation {
    std::size_t start = 0;  // onset sample
    std::size_t end = 0;    // exclusive; envelope falls below noise_sigma
    int family = 0;
};

struct SynthResult {
    Waveform waveform;
    std::vector<BurstAnnotation> annotations;
};

SynthResult synthesize(const SynthSpec& spec, std::uint64_t seed);

// Sample span of one burst's annotation over a signal of `length` samples.
BurstAnnotation annotate(const BurstSpec& burst, double sample_rate, double noise_sigma, std::size_t length);

// Two pencil-lead-break-like bursts of ~4096-sample span at 1 MHz; onsets fixed at
// samples 20000 and 60000, only the noise depends on the seed.
SynthSpec lead_break_spec();

// Journal-bearing-like bursts, 1 MHz, 0.5 s: eight events of one family, or with
// `with_low_family` eight more of a lower-amplitude, lower-frequency family
// interleaved. Intended for a fixed threshold near 2.5 noise sigma (2.5 mV).
SynthSpec journal_bearing_spec(bool with_low_family = false);

// Hit-stream generator for the online monitor.
struct HitFamily {
    int id = 0;
    double amplitude = 0.02;  // V
    double amplitude_jitter = 0.15;  // relative, uniform
    double decay_tau = 100e-6;  // s
    double carrier_freq = 150e3;
    double weight = 1.0;          // relative emission rate
    std::size_t first_hit = 0;    // hits before this ordinal never come from this family
};

struct HitStreamSpec {
    std::size_t hits = 10000;
    HitFileHeader header{2e6, 2048, 500, 5};
    double noise_sigma = 1e-3;
    double mean_interval = 1.0;  // s between triggers, exponential
    std::vector<HitFamily> families;

    void validate() const;
};

struct HitStream {
    HitFileHeader header;
    std::vector<HitRecord> records;
    std::vector<int> families;  // ground truth per record
};

HitStream synthesize_hits(const HitStreamSpec& spec, std::uint64_t seed);

// Two benign families, then a damage family of 50x the energy of the weaker
// one injected from hit `damage_start` at 10% of the emission rate.
HitStreamSpec landing_gear_spec(std::size_t hits = 10000, std::size_t damage_start = 6000);

}  // namespace aedp
