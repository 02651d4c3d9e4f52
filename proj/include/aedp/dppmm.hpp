#pragma once

// Dirichlet-process Poisson mixture with the rates and mixing weights
// integrated out; only the assignments are sampled (collapsed Gibbs).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aedp/distributions.hpp"
#include "aedp/rng.hpp"

namespace aedp {

using ClusterId = std::int64_t;

// Stands for the empty component in weight/probability vectors, and marks a
// datum that is momentarily unassigned inside resample_one.
inline constexpr ClusterId kNewCluster = -1;

struct Hyperparams {
    double alpha = 1.0;
    GammaParams base{1.0, 1.0};

    void validate() const;
};

struct ClusterStats {
    ClusterId id = 0;
    std::uint64_t n_members = 0;
    std::uint64_t sum_x = 0;
    std::uint64_t created_at = 0;  // number of data held by the state when the cluster was minted

    double posterior_mean_rate(const GammaParams& base) const;
    friend bool operator==(const ClusterStats&, const ClusterStats&) = default;
};

class MixtureState {
public:
    explicit MixtureState(Hyperparams hyper = {}, std::uint64_t rng_seed = 0);

    // Every datum in one cluster (K = 1), or an empty state for empty data.
    static MixtureState single_cluster(std::vector<CountDatum> data, Hyperparams hyper, std::uint64_t rng_seed = 0);

    // Unchecked assembly from stored parts (deserialization, tests); run audit() afterwards.
    static MixtureState from_parts(std::vector<CountDatum> data, std::vector<ClusterId> assignments,
                                   std::vector<ClusterStats> clusters, Hyperparams hyper, ClusterId next_id,
                                   std::uint64_t rng_seed);

    const std::vector<CountDatum>& data() const { return data_; }
    const std::vector<ClusterId>& assignments() const { return assignments_; }
    const std::vector<ClusterStats>& clusters() const { return clusters_; }  // ascending id
    const Hyperparams& hyper() const { return hyper_; }
    std::uint64_t rng_seed() const { return rng_seed_; }
    ClusterId next_id() const { return next_id_; }
    std::size_t size() const { return data_.size(); }

    const ClusterStats* find(ClusterId id) const;

    // Takes datum `index` out of its cluster, deleting the cluster if it empties.
    void unassign(std::size_t index);
    // Places an unassigned datum; kNewCluster mints a fresh id. Returns the id used.
    ClusterId assign(std::size_t index, ClusterId target);
    // Appends a datum and assigns it as above. Returns the id used.
    ClusterId append(CountDatum x, ClusterId target);

private:
    ClusterStats* find_mutable(ClusterId id);

    std::vector<CountDatum> data_;
    std::vector<ClusterId> assignments_;
    std::vector<ClusterStats> clusters_;
    Hyperparams hyper_;
    ClusterId next_id_ = 0;
    std::uint64_t rng_seed_ = 0;
};

struct LogWeight {
    ClusterId id = kNewCluster;
    double log_weight = 0.0;
};

struct LabelProbability {
    ClusterId id = kNewCluster;
    double probability = 0.0;
};

// log c_k + log NB(x | a + S_k, (c_k + b)/(c_k + b + 1)) per cluster, then
// log alpha + log NB(x | a, b/(b + 1)) for the empty component (last entry).
// With `excluding`, that datum's contribution is removed first.
std::vector<LogWeight> assignment_log_weights(CountDatum x, const MixtureState& state,
                                              std::optional<std::size_t> excluding);

// Max-subtracted softmax of log weights.
std::vector<double> normalize_log_weights(std::span<const LogWeight> weights);

// Probabilities over clusters followed by the empty component.
std::vector<LabelProbability> assignment_probabilities(CountDatum x, const MixtureState& state,
                                                       std::optional<std::size_t> excluding);

// c_k / (alpha + M) per cluster and alpha / (alpha + M) for the empty component,
// where M counts the data other than the one being placed.
std::vector<LabelProbability> crp_prior(const MixtureState& state, std::optional<std::size_t> excluding);

enum class Selection { sample, argmax };

// Index of the chosen entry; argmax ties go to the earliest entry (lowest id,
// with the empty component last).
std::size_t select_index(std::span<const double> probs, Selection selection, Rng& rng);

struct ResampleRecord {
    std::vector<LabelProbability> probabilities;  // normalized; a drawn empty component carries its new id
    ClusterId previous = kNewCluster;
    ClusterId chosen = kNewCluster;
    double chosen_log_weight = 0.0;
};

ResampleRecord resample_one(MixtureState& state, std::size_t index, Rng& rng, Selection selection = Selection::sample);

struct SweepResult {
    std::vector<std::vector<LabelProbability>> probabilities;  // per datum
    double log_likelihood = 0.0;  // sum of the chosen components' log weights
    std::size_t label_flips = 0;
};

SweepResult gibbs_sweep(MixtureState& state, Rng& rng);

struct FitOptions {
    std::size_t sweeps = 200;
    std::size_t burn_in = 50;
    std::uint64_t seed = 0;
    bool early_stop = false;  // stop after 10 stable post-burn-in sweeps

    void validate() const;
};

struct SweepDiagnostics {
    std::size_t cluster_count = 0;
    double log_likelihood = 0.0;
    std::size_t label_flips = 0;
};

// Dense rows of probabilities over a shared, ascending id list.
struct ProbabilityTable {
    std::vector<ClusterId> ids;
    std::size_t rows = 0;
    std::vector<double> values;  // row-major, rows x ids.size()

    std::span<const double> row(std::size_t r) const { return {values.data() + r * ids.size(), ids.size()}; }
    std::span<double> row(std::size_t r) { return {values.data() + r * ids.size(), ids.size()}; }
    std::optional<std::size_t> column(ClusterId id) const;
};

struct FitResult {
    MixtureState state;
    std::uint64_t rng_draws = 0;
    std::vector<SweepDiagnostics> diagnostics;
    // Per-datum assignment probabilities averaged over post-burn-in sweeps by cluster id.
    ProbabilityTable probabilities;
    std::vector<ClusterId> labels;  // final sweep
};

FitResult fit(std::vector<CountDatum> data, const Hyperparams& hyper, const FitOptions& options);

// Recomputes every ClusterStats from assignments and data.
bool audit(const MixtureState& state);

// Clusters ordered by posterior-mean rate, descending (ties by id).
std::vector<ClusterId> clusters_by_rate(const MixtureState& state);

// Background cluster: lowest posterior-mean rate among clusters holding at least
// `min_share` of the data (all clusters if none do); kNewCluster when empty.
ClusterId lowest_rate_cluster(const MixtureState& state, double min_share = 0.05);

}  // namespace aedp
