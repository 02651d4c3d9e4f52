#include "aedp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace aedp {

namespace {

// Envelope-times-carrier at time t (s) after onset.
double burst_value(const BurstSpec& b, double t) {
    double envelope = 0.0;
    if (t < b.rise_time) {
        envelope = b.amplitude * t / b.rise_time;
    } else {
        envelope = b.amplitude * std::exp(-(t - b.rise_time) / b.decay_tau);
    }
    return envelope * std::sin(2.0 * std::numbers::pi * b.carrier_freq * t);
}

void validate_burst(const BurstSpec& b) {
    if (!(b.amplitude > 0.0)) throw std::domain_error("burst amplitude must be positive");
    if (!(b.decay_tau > 0.0)) throw std::domain_error("burst decay_tau must be positive");
    if (!(b.carrier_freq >= 0.0)) throw std::domain_error("burst carrier_freq must be non-negative");
    if (!(b.rise_time >= 0.0)) throw std::domain_error("burst rise_time must be non-negative");
}

}  // namespace

std::size_t SynthSpec::length() const {
    return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

void SynthSpec::validate() const {
    if (!(sample_rate > 0.0)) throw std::domain_error("sample_rate must be positive");
    if (!(duration > 0.0) || length() == 0) throw std::domain_error("duration must cover at least one sample");
    if (!(noise_sigma >= 0.0)) throw std::domain_error("noise_sigma must be non-negative");
    for (const auto& b : bursts) {
        validate_burst(b);
        if (!(b.onset >= 0.0 && b.onset < duration)) throw std::domain_error("burst onset outside the signal");
    }
}

BurstAnnotation annotate(const BurstSpec& burst, double sample_rate, double noise_sigma, std::size_t length) {
    const auto start = std::min(length, static_cast<std::size_t>(std::ceil(burst.onset * sample_rate)));
    double span = burst.rise_time;
    if (noise_sigma <= 0.0) {
        span = std::numeric_limits<double>::infinity();
    } else if (burst.amplitude > noise_sigma) {
        span += burst.decay_tau * std::log(burst.amplitude / noise_sigma);
    }
    const double end_time = burst.onset + span;
    std::size_t end = length;
    if (std::isfinite(end_time) && end_time * sample_rate < static_cast<double>(length)) {
        end = std::max(start, static_cast<std::size_t>(std::ceil(end_time * sample_rate)));
    }
    return {start, end, burst.family};
}

SynthResult synthesize(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t n = spec.length();
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> samples(n);
    for (double& v : samples) v = spec.noise_sigma * noise(engine);

    SynthResult out;
    const double dt = 1.0 / spec.sample_rate;
    for (const auto& b : spec.bursts) {
        out.annotations.push_back(annotate(b, spec.sample_rate, spec.noise_sigma, n));
        // Stop once the envelope is far below anything representable in the noise.
        const double tail = b.rise_time + b.decay_tau * (std::log(b.amplitude / (spec.noise_sigma + 1e-300)) + 30.0);
        const auto first = static_cast<std::size_t>(std::ceil(b.onset * spec.sample_rate));
        for (std::size_t i = first; i < n; ++i) {
            const double t = static_cast<double>(i) * dt - b.onset;
            if (t > tail) break;
            samples[i] += burst_value(b, t);
        }
    }
    out.waveform = Waveform(std::move(samples), spec.sample_rate);
    return out;
}

SynthSpec lead_break_spec() {
    SynthSpec s;
    s.duration = 0.1;
    s.sample_rate = 1e6;
    s.noise_sigma = 1e-3;
    const double amplitude = 20.0 * s.noise_sigma;
    const double tau = 4096.0 / std::log(20.0) / s.sample_rate;
    s.bursts = {
        {0.020, amplitude, tau, 150e3, 1, 0.0},
        {0.060, amplitude, tau, 150e3, 1, 0.0},
    };
    return s;
}

SynthSpec journal_bearing_spec(bool with_low_family) {
    SynthSpec s;
    s.duration = 0.5;
    s.sample_rate = 1e6;
    s.noise_sigma = 1e-3;
    const double period = 0.0625;
    for (int i = 0; i < 8; ++i) {
        // irregular sub-window offsets so bursts do not all align with the windows
        const double onset = 0.02 + period * i + 137e-6 * ((i * 37) % 11);
        s.bursts.push_back({onset, 20.0 * s.noise_sigma, 2e-3, 150e3, 2, 100e-6});
        if (with_low_family) s.bursts.push_back({onset + period / 2, 6.0 * s.noise_sigma, 2e-3, 60e3, 1, 100e-6});
    }
    return s;
}

void HitStreamSpec::validate() const {
    header.validate();
    if (families.empty()) throw std::domain_error("hit stream needs at least one family");
    if (!(noise_sigma >= 0.0)) throw std::domain_error("noise_sigma must be non-negative");
    if (!(mean_interval > 0.0)) throw std::domain_error("mean_interval must be positive");
    bool any_from_start = false;
    for (const auto& f : families) {
        if (!(f.amplitude > 0.0 && f.decay_tau > 0.0 && f.weight > 0.0)) {
            throw std::domain_error("hit family needs positive amplitude, decay_tau and weight");
        }
        if (!(f.amplitude_jitter >= 0.0 && f.amplitude_jitter < 1.0)) {
            throw std::domain_error("amplitude_jitter must be in [0, 1)");
        }
        any_from_start = any_from_start || f.first_hit == 0;
    }
    if (!any_from_start) throw std::domain_error("some family must be active from the first hit");
}

HitStream synthesize_hits(const HitStreamSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> gap(1.0 / spec.mean_interval);

    HitStream out;
    out.header = spec.header;
    const std::size_t len = spec.header.record_length;
    const double dt = 1.0 / spec.header.sample_rate;
    double clock = 0.0;
    for (std::size_t h = 0; h < spec.hits; ++h) {
        clock += gap(engine);
        double total = 0.0;
        for (const auto& f : spec.families)
            if (f.first_hit <= h) total += f.weight;
        double pick = unit(engine) * total;
        std::size_t chosen = 0;
        for (std::size_t k = 0; k < spec.families.size(); ++k) {
            const auto& f = spec.families[k];
            if (f.first_hit > h) continue;
            chosen = k;
            pick -= f.weight;
            if (pick < 0.0) break;
        }
        const HitFamily& fam = spec.families[chosen];
        const double amplitude = fam.amplitude * (1.0 + fam.amplitude_jitter * (2.0 * unit(engine) - 1.0));
        const BurstSpec burst{0.0, amplitude, fam.decay_tau, fam.carrier_freq, fam.id, 0.0};

        HitRecord rec;
        rec.trigger_time = clock;
        rec.pretrigger = spec.header.pretrigger;
        rec.channel = spec.header.channel;
        rec.samples.resize(len);
        for (std::size_t i = 0; i < len; ++i) {
            double v = spec.noise_sigma * noise(engine);
            if (i >= spec.header.pretrigger) v += burst_value(burst, static_cast<double>(i - spec.header.pretrigger) * dt);
            rec.samples[i] = v;
        }
        out.records.push_back(std::move(rec));
        out.families.push_back(fam.id);
    }
    return out;
}

HitStreamSpec landing_gear_spec(std::size_t hits, std::size_t damage_start) {
    HitStreamSpec s;
    s.hits = hits;
    s.header = {2e6, 2048, 500, 5};
    s.noise_sigma = 1e-3;
    s.mean_interval = 20.0;
    s.families = {
        {1, 0.02, 0.15, 100e-6, 150e3, 1.0, 0},
        {2, 0.04, 0.15, 50e-6, 75e3, 1.0, 0},
        // 50x the energy of family 1: same decay, amplitude scaled by sqrt(50)
        {3, 0.02 * std::sqrt(50.0), 0.15, 100e-6, 150e3, 2.0 / 9.0, damage_start},
    };
    return s;
}

}  // namespace aedp
