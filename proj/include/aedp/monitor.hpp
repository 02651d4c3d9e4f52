#pragma once

// Online updating of the mixture with entropy-gated full resampling,
// cumulative per-cluster tracks and damage alarms.

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "aedp/dppmm.hpp"
#include "aedp/rng.hpp"

namespace aedp {

// -sum p log p (natural log, 0 log 0 = 0). Throws if |sum - 1| > 1e-9.
double entropy(std::span<const double> probs);

// entropy / log(K + 1), clamped to [0, 1]; probs must have K + 1 entries, K >= 1.
double information_efficiency(std::span<const double> probs, std::size_t k);

enum class GateMode {
    entropy,          // resample everything when u < eta
    always_resample,  // eta forced to 1
    never_resample,   // eta forced to 0
};

struct AlarmEvent {
    enum class Kind { new_cluster, growth_step };

    std::uint64_t time = 0;  // observation ordinal
    Kind kind = Kind::new_cluster;
    ClusterId cluster = kNewCluster;
    double magnitude = 0.0;  // new_cluster: posterior-mean rate; growth_step: increment / trailing median
    double timestamp = 0.0;  // caller-supplied time of the observation (seconds)
};

const char* to_string(AlarmEvent::Kind kind);

struct ObserveDecision {
    std::uint64_t ordinal = 0;
    double eta = 0.0;
    double gate_draw = -1.0;  // -1 when no gate draw was taken
    bool resampled = false;
    ClusterId assigned = kNewCluster;
    std::vector<LabelProbability> probabilities;  // over K clusters + the empty component
};

struct ObserveResult {
    ObserveDecision decision;
    std::vector<AlarmEvent> alarms;  // provisional new_cluster alarms
};

// Draw order per call: gate uniform (entropy mode with K >= 1 only), then the
// categorical draw and one uniform per datum of the full sweep when resampling.
// The greedy path consumes no draws.
ObserveResult observe(CountDatum x, MixtureState& state, Rng& rng, GateMode mode = GateMode::entropy);

// Systematic decimation: hit i is kept iff floor(i r) > floor((i - 1) r).
bool keep_hit(std::size_t index, double keep_ratio);
std::vector<std::size_t> decimate_indices(std::size_t count, double keep_ratio);

template <typename T>
std::vector<T> decimate(std::span<const T> stream, double keep_ratio) {
    std::vector<T> kept;
    for (std::size_t i : decimate_indices(stream.size(), keep_ratio)) kept.push_back(stream[i]);
    return kept;
}

struct GrowthRule {
    double step_factor = 10.0;
    std::size_t lag = 50;          // trailing increments used for the median
    std::size_t min_history = 10;  // increments required before alarms are possible

    void validate() const;
};

struct ClusterTrack {
    ClusterId cluster = kNewCluster;
    std::vector<double> times;
    std::vector<std::uint64_t> cumulative_events;
    std::vector<std::uint64_t> cumulative_counts;
    std::vector<double> cumulative_energy;
    std::deque<double> recent_increments;
};

struct TrackRow {
    double time = 0.0;
    ClusterId cluster = kNewCluster;
    std::uint64_t cumulative_events = 0;
    std::uint64_t cumulative_counts = 0;
    double cumulative_energy = 0.0;
};

class TrackSet {
public:
    explicit TrackSet(GrowthRule rule = {});

    // Appends one hit to `cluster`; returns a growth_step alarm when the energy
    // increment exceeds step_factor times the trailing median increment.
    std::vector<AlarmEvent> update(ClusterId cluster, std::uint64_t ordinal, double time, CountDatum count,
                                   double energy);

    const std::map<ClusterId, ClusterTrack>& tracks() const { return tracks_; }
    const std::vector<TrackRow>& history() const { return history_; }

private:
    GrowthRule rule_;
    std::map<ClusterId, ClusterTrack> tracks_;
    std::vector<TrackRow> history_;
};

std::vector<ClusterId> top_clusters_by_rate(const MixtureState& state, std::size_t m);

struct MonitorConfig {
    Hyperparams hyper;
    GateMode gate = GateMode::entropy;
    GrowthRule growth;
    std::size_t survival_horizon = 20;  // observations a new cluster must survive
    std::size_t min_survivor_members = 2;
    std::uint64_t warmup = 0;  // observations treated as the normal-condition training phase
    std::uint64_t seed = 0;
};

struct HitObservation {
    CountDatum count = 0;
    double energy = 0.0;
    double time = 0.0;
};

class OnlineMonitor {
public:
    explicit OnlineMonitor(MonitorConfig config);

    // Returns the confirmed alarms raised by this observation.
    std::vector<AlarmEvent> push(const HitObservation& hit);

    const MixtureState& state() const { return state_; }
    const TrackSet& tracks() const { return tracks_; }
    const Rng& rng() const { return rng_; }
    const std::vector<AlarmEvent>& alarms() const { return alarms_; }
    const ObserveDecision& last_decision() const { return last_decision_; }
    std::uint64_t observations() const { return state_.size(); }

private:
    struct Pending {
        ClusterId cluster;
        std::uint64_t created;
    };

    MonitorConfig config_;
    MixtureState state_;
    Rng rng_;
    TrackSet tracks_;
    std::vector<Pending> pending_;
    std::vector<AlarmEvent> alarms_;
    ObserveDecision last_decision_;
};

}  // namespace aedp
