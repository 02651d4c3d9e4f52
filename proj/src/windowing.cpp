#include "aedp/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aedp {

Waveform::Waveform(std::vector<double> samples_, double sample_rate_)
    : samples(std::move(samples_)), sample_rate(sample_rate_) {
    validate();
}

void Waveform::validate() const {
    if (samples.empty()) throw std::domain_error("waveform is empty");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw std::domain_error("sample rate must be positive");
    if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
        throw std::domain_error("waveform contains non-finite samples");
    }
}

void ThresholdPolicy::validate() const {
    if (kind == Kind::percentile && !(value > 0.0 && value < 100.0)) {
        throw std::domain_error("percentile threshold must lie in (0, 100)");
    }
    if (!std::isfinite(value)) throw std::domain_error("threshold value must be finite");
}

std::size_t WindowSpec::step() const {
    validate();
    return static_cast<std::size_t>(std::llround(static_cast<double>(length) * (1.0 - overlap)));
}

void WindowSpec::validate() const {
    if (length == 0) throw std::domain_error("window length must be positive");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw std::domain_error("overlap must lie in [0, 1)");
    if (std::llround(static_cast<double>(length) * (1.0 - overlap)) < 1) {
        throw std::domain_error("window step rounds to zero");
    }
}

std::size_t WindowSpec::window_count(std::size_t signal_length) const {
    if (signal_length < length) return 0;
    return (signal_length - length) / step() + 1;
}

std::vector<CountDatum> WindowedCounts::counts() const {
    std::vector<CountDatum> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.count);
    return out;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::domain_error("percentile of empty sequence");
    const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double lo_value = values[lo];
    if (frac == 0.0 || lo + 1 >= values.size()) return lo_value;
    const double hi_value = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return lo_value + frac * (hi_value - lo_value);
}

double resolve_threshold(const Waveform& w, const ThresholdPolicy& policy) {
    policy.validate();
    if (w.samples.empty()) throw std::domain_error("cannot resolve a threshold on an empty waveform");
    if (policy.kind == ThresholdPolicy::Kind::fixed) return policy.value;
    std::vector<double> values = w.samples;
    if (policy.rectify) {
        for (auto& v : values) v = std::abs(v);
    }
    return percentile(std::move(values), policy.value);
}

CountDatum count_crossings(std::span<const double> segment, double threshold, bool rectify) {
    CountDatum crossings = 0;
    bool above_prev = false;
    for (std::size_t i = 0; i < segment.size(); ++i) {
        const double v = rectify ? std::abs(segment[i]) : segment[i];
        const bool above = v > threshold;
        if (above && (i == 0 || !above_prev)) ++crossings;
        above_prev = above;
    }
    return crossings;
}

WindowedCounts extract_counts(const Waveform& w, double threshold, bool rectify, const WindowSpec& spec) {
    spec.validate();
    if (spec.length > w.samples.size()) throw std::domain_error("window length exceeds signal length");
    WindowedCounts out;
    out.spec = spec;
    out.threshold = threshold;
    out.rectify = rectify;
    const std::size_t step = spec.step();
    const std::size_t n = spec.window_count(w.samples.size());
    out.entries.reserve(n);
    const std::span<const double> all(w.samples);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t start = k * step;
        out.entries.push_back({start, count_crossings(all.subspan(start, spec.length), threshold, rectify)});
    }
    return out;
}

WindowedCounts extract_counts(const Waveform& w, const ThresholdPolicy& policy, const WindowSpec& spec) {
    return extract_counts(w, resolve_threshold(w, policy), policy.rectify, spec);
}

}  // namespace aedp
