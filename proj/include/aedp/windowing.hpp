#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aedp/distributions.hpp"

namespace aedp {

struct Waveform {
    std::vector<double> samples;  // volts
    double sample_rate = 1.0;     // Hz

    Waveform() = default;
    Waveform(std::vector<double> samples, double sample_rate);  // validates

    std::size_t size() const { return samples.size(); }
    void validate() const;
};

struct ThresholdPolicy {
    enum class Kind { percentile, fixed };

    Kind kind = Kind::percentile;
    double value = 99.0;  // percentile in (0, 100), or volts
    bool rectify = true;  // threshold |v| rather than v

    static ThresholdPolicy percentile(double q, bool rectify = true) { return {Kind::percentile, q, rectify}; }
    static ThresholdPolicy fixed(double volts, bool rectify = true) { return {Kind::fixed, volts, rectify}; }
    void validate() const;
};

struct WindowSpec {
    std::size_t length = 1000;
    double overlap = 0.0;  // fraction in [0, 1)

    std::size_t step() const;  // round(length * (1 - overlap)), validated >= 1
    void validate() const;
    // Number of full windows over a signal of the given length (0 if too short).
    std::size_t window_count(std::size_t signal_length) const;
};

struct WindowCount {
    std::size_t start = 0;
    CountDatum count = 0;
};

struct WindowedCounts {
    std::vector<WindowCount> entries;
    WindowSpec spec;
    double threshold = 0.0;
    bool rectify = true;

    std::vector<CountDatum> counts() const;
};

// Percentile uses linear interpolation between closest ranks (rank = q/100 * (n-1)).
double resolve_threshold(const Waveform& w, const ThresholdPolicy& policy);
double percentile(std::vector<double> values, double q);

// Upward crossings of the threshold; a segment that starts above it counts once.
CountDatum count_crossings(std::span<const double> segment, double threshold, bool rectify);

WindowedCounts extract_counts(const Waveform& w, const ThresholdPolicy& policy, const WindowSpec& spec);
WindowedCounts extract_counts(const Waveform& w, double threshold, bool rectify, const WindowSpec& spec);

}  // namespace aedp
