#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aedp/distributions.hpp"
#include "aedp/windowing.hpp"

namespace aedp {

// Single-Poisson background model with a Gamma prior on the noise count-rate.
class BackgroundModel {
public:
    // Prior-only model (no training windows); scoring uses the prior predictive.
    static BackgroundModel prior_only(const GammaParams& prior);

    BackgroundModel(const GammaParams& prior, std::uint64_t n_train, std::uint64_t sum_train);

    const GammaParams& prior() const { return prior_; }
    std::uint64_t n_train() const { return n_train_; }
    std::uint64_t sum_train() const { return sum_train_; }
    const NBParams& predictive() const { return predictive_; }

    BackgroundModel with_observation(CountDatum x) const;

private:
    GammaParams prior_;
    std::uint64_t n_train_ = 0;
    std::uint64_t sum_train_ = 0;
    NBParams predictive_;
};

// Throws std::domain_error on an empty training set.
BackgroundModel train_background(const GammaParams& prior, std::span<const CountDatum> noise_counts);

struct NllEntry {
    std::size_t start = 0;
    CountDatum count = 0;
    double nll = 0.0;
};

struct NllTrace {
    std::vector<NllEntry> entries;
    WindowSpec spec;
    double flag_threshold = 0.0;
};

// Default margin added to the noise-reference maximum: one order of magnitude in likelihood.
inline constexpr double kDefaultFlagMargin = 2.302585092994045684;

NllTrace score(const BackgroundModel& model, const WindowedCounts& wc, double flag_threshold);
// Threshold = max NLL over `noise_reference` + margin.
NllTrace score(const BackgroundModel& model, const WindowedCounts& wc, std::span<const CountDatum> noise_reference,
               double margin = kDefaultFlagMargin);

struct SampleInterval {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
    friend bool operator==(const SampleInterval&, const SampleInterval&) = default;
};

// Maximal runs of windows above the flag threshold, merged across sub-step gaps.
std::vector<SampleInterval> flag_events(const NllTrace& trace);

// Training-window heuristic: indices of windows whose count is at or below the
// lowest-count decile of the trace.
std::vector<std::size_t> lowest_decile_windows(const WindowedCounts& wc);

}  // namespace aedp
