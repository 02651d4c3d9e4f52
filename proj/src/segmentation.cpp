#include "aedp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aedp {

std::optional<std::size_t> SampleProbabilityField::column(ClusterId id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

SampleProbabilityField average_probabilities(const ProbabilityTable& window_probs, const WindowSpec& spec,
                                             std::size_t signal_length) {
    spec.validate();
    if (window_probs.rows != spec.window_count(signal_length)) {
        throw std::domain_error("average_probabilities: window count does not match spec and signal length");
    }
    const std::size_t k = window_probs.ids.size();
    SampleProbabilityField field;
    field.ids = window_probs.ids;
    field.length = signal_length;
    field.values.assign(signal_length * k, 0.0);
    field.coverage.assign(signal_length, 0);

    const std::size_t step = spec.step();
    for (std::size_t w = 0; w < window_probs.rows; ++w) {
        const auto probs = window_probs.row(w);
        const std::size_t start = w * step;
        for (std::size_t s = start; s < start + spec.length; ++s) {
            double* out = field.values.data() + s * k;
            for (std::size_t j = 0; j < k; ++j) out[j] += probs[j];
            ++field.coverage[s];
        }
    }
    for (std::size_t s = 0; s < signal_length; ++s) {
        if (field.coverage[s] == 0) continue;
        double* out = field.values.data() + s * k;
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) total += out[j];
        if (total > 0.0) {
            for (std::size_t j = 0; j < k; ++j) out[j] /= total;
        }
    }
    return field;
}

std::vector<EventRecord> segment_events(const SampleProbabilityField& field, ClusterId noise_cluster,
                                        const SegmentOptions& options) {
    const auto noise_col = field.column(noise_cluster);
    if (!noise_col) throw std::domain_error("segment_events: noise cluster not present in the field");
    const std::size_t k = field.ids.size();

    std::vector<EventRecord> events;
    auto close_run = [&](std::size_t start, std::size_t end) {
        if (end - start < std::max<std::size_t>(options.min_length, 1)) return;
        EventRecord e;
        e.start = start;
        e.end = end;
        std::vector<double> mean(k, 0.0);
        double event_sum = 0.0;
        for (std::size_t s = start; s < end; ++s) {
            const auto row = field.at(s);
            for (std::size_t j = 0; j < k; ++j) mean[j] += row[j];
            event_sum += 1.0 - row[*noise_col];
        }
        const double len = static_cast<double>(end - start);
        e.mean_probability = event_sum / len;
        double best = -1.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == *noise_col || field.ids[j] == kNewCluster) continue;
            if (mean[j] > best) {
                best = mean[j];
                e.label = field.ids[j];
            }
        }
        events.push_back(e);
    };

    bool in_run = false;
    std::size_t run_start = 0;
    for (std::size_t s = 0; s < field.length; ++s) {
        const bool hit = field.coverage[s] > 0 && 1.0 - field.at(s)[*noise_col] >= options.min_probability;
        if (hit && !in_run) {
            in_run = true;
            run_start = s;
        } else if (!hit && in_run) {
            in_run = false;
            close_run(run_start, s);
        }
    }
    if (in_run) close_run(run_start, field.length);
    return events;
}

WaveformFeatures extract_features(const Waveform& w, std::size_t start, std::size_t end, double threshold,
                                  bool rectify) {
    if (!(start < end) || end > w.samples.size()) throw std::domain_error("extract_features: event outside waveform");
    const std::span<const double> slice(w.samples.data() + start, end - start);
    WaveformFeatures f;
    f.count = count_crossings(slice, threshold, rectify);

    std::size_t peak_index = 0;
    std::size_t first_above = slice.size();
    std::size_t last_above = 0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        const double v = slice[i];
        f.energy += v * v;
        if (std::abs(v) > f.peak_amplitude) {
            f.peak_amplitude = std::abs(v);
        }
        const double level = rectify ? std::abs(v) : v;
        if (level > threshold) {
            if (first_above == slice.size()) first_above = i;
            last_above = i;
        }
        const double peak_level = rectify ? std::abs(slice[peak_index]) : slice[peak_index];
        if (level > peak_level) peak_index = i;
    }
    f.energy /= w.sample_rate;
    if (f.count > 0) {
        f.rise_time = static_cast<double>(peak_index - first_above) / w.sample_rate;
        f.duration = static_cast<double>(last_above - first_above) / w.sample_rate;
    }
    return f;
}

void attach_features(const Waveform& w, std::span<EventRecord> events, double threshold, bool rectify) {
    for (auto& e : events) e.features = extract_features(w, e.start, e.end, threshold, rectify);
}

}  // namespace aedp
