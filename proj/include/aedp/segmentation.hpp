#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aedp/dppmm.hpp"
#include "aedp/windowing.hpp"

namespace aedp {

// Per-sample cluster probabilities obtained by averaging the vectors of all
// windows that cover each sample. Uncovered samples hold zeros.
struct SampleProbabilityField {
    std::vector<ClusterId> ids;  // ascending; may include kNewCluster
    std::size_t length = 0;
    std::vector<double> values;  // length x ids.size()
    std::vector<std::uint32_t> coverage;

    std::span<const double> at(std::size_t sample) const {
        return {values.data() + sample * ids.size(), ids.size()};
    }
    std::optional<std::size_t> column(ClusterId id) const;
};

struct WaveformFeatures {
    CountDatum count = 0;
    double peak_amplitude = 0.0;  // volts
    double rise_time = 0.0;       // seconds, first crossing to peak
    double duration = 0.0;        // seconds, first crossing to last sample above threshold
    double energy = 0.0;          // volts^2 * seconds
};

struct EventRecord {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
    ClusterId label = kNewCluster;
    double mean_probability = 0.0;
    WaveformFeatures features;
};

SampleProbabilityField average_probabilities(const ProbabilityTable& window_probs, const WindowSpec& spec,
                                             std::size_t signal_length);

struct SegmentOptions {
    double min_probability = 0.5;
    std::size_t min_length = 1;  // samples
};

// Runs where 1 - P(noise) >= min_probability; features are left default.
std::vector<EventRecord> segment_events(const SampleProbabilityField& field, ClusterId noise_cluster,
                                        const SegmentOptions& options = {});

WaveformFeatures extract_features(const Waveform& w, std::size_t start, std::size_t end, double threshold,
                                  bool rectify = true);

void attach_features(const Waveform& w, std::span<EventRecord> events, double threshold, bool rectify = true);

}  // namespace aedp
