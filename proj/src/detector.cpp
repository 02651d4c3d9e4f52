#include "aedp/detector.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aedp {

BackgroundModel::BackgroundModel(const GammaParams& prior, std::uint64_t n_train, std::uint64_t sum_train)
    : prior_(prior), n_train_(n_train), sum_train_(sum_train),
      predictive_(predictive_update(prior, n_train, sum_train)) {}

BackgroundModel BackgroundModel::prior_only(const GammaParams& prior) { return {prior, 0, 0}; }

BackgroundModel BackgroundModel::with_observation(CountDatum x) const {
    return {prior_, n_train_ + 1, sum_train_ + x};
}

BackgroundModel train_background(const GammaParams& prior, std::span<const CountDatum> noise_counts) {
    if (noise_counts.empty()) {
        throw std::domain_error("train_background: empty training set (use BackgroundModel::prior_only)");
    }
    BackgroundModel model = BackgroundModel::prior_only(prior);
    for (CountDatum x : noise_counts) model = model.with_observation(x);
    return model;
}

NllTrace score(const BackgroundModel& model, const WindowedCounts& wc, double flag_threshold) {
    NllTrace trace;
    trace.spec = wc.spec;
    trace.flag_threshold = flag_threshold;
    trace.entries.reserve(wc.entries.size());
    for (const auto& e : wc.entries) trace.entries.push_back({e.start, e.count, nll(e.count, model.predictive())});
    return trace;
}

NllTrace score(const BackgroundModel& model, const WindowedCounts& wc, std::span<const CountDatum> noise_reference,
               double margin) {
    if (noise_reference.empty()) throw std::domain_error("score: empty noise reference");
    double worst = 0.0;
    for (CountDatum x : noise_reference) worst = std::max(worst, nll(x, model.predictive()));
    return score(model, wc, worst + margin);
}

std::vector<SampleInterval> flag_events(const NllTrace& trace) {
    std::vector<SampleInterval> runs;
    if (trace.entries.empty()) return runs;
    const std::size_t length = trace.spec.length;
    const std::size_t step = trace.spec.step();
    for (const auto& e : trace.entries) {
        if (!(e.nll > trace.flag_threshold)) continue;
        const SampleInterval span{e.start, e.start + length};
        if (!runs.empty() && span.start < runs.back().end + step) {
            runs.back().end = std::max(runs.back().end, span.end);
        } else {
            runs.push_back(span);
        }
    }
    return runs;
}

std::vector<std::size_t> lowest_decile_windows(const WindowedCounts& wc) {
    std::vector<std::size_t> picked;
    if (wc.entries.empty()) return picked;
    std::vector<CountDatum> counts = wc.counts();
    const std::size_t k = (counts.size() - 1) / 10;
    std::nth_element(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(k), counts.end());
    const CountDatum cutoff = counts[k];
    for (std::size_t i = 0; i < wc.entries.size(); ++i) {
        if (wc.entries[i].count <= cutoff) picked.push_back(i);
    }
    return picked;
}

}  // namespace aedp
