#include "aedp/dppmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace aedp {

void Hyperparams::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::domain_error("alpha must be positive");
    GammaParams check(base.shape, base.rate);
    (void)check;
}

double ClusterStats::posterior_mean_rate(const GammaParams& base) const {
    return (static_cast<double>(sum_x) + base.shape) / (static_cast<double>(n_members) + base.rate);
}

MixtureState::MixtureState(Hyperparams hyper, std::uint64_t rng_seed) : hyper_(hyper), rng_seed_(rng_seed) {
    hyper_.validate();
}

MixtureState MixtureState::single_cluster(std::vector<CountDatum> data, Hyperparams hyper, std::uint64_t rng_seed) {
    MixtureState state(hyper, rng_seed);
    if (data.empty()) return state;
    ClusterStats first{state.next_id_++, 0, 0, 0};
    for (CountDatum x : data) {
        ++first.n_members;
        first.sum_x += x;
    }
    state.assignments_.assign(data.size(), first.id);
    state.data_ = std::move(data);
    state.clusters_.push_back(first);
    return state;
}

MixtureState MixtureState::from_parts(std::vector<CountDatum> data, std::vector<ClusterId> assignments,
                                      std::vector<ClusterStats> clusters, Hyperparams hyper, ClusterId next_id,
                                      std::uint64_t rng_seed) {
    if (data.size() != assignments.size()) throw std::domain_error("data and assignments differ in length");
    MixtureState state(hyper, rng_seed);
    std::sort(clusters.begin(), clusters.end(), [](const auto& l, const auto& r) { return l.id < r.id; });
    state.data_ = std::move(data);
    state.assignments_ = std::move(assignments);
    state.clusters_ = std::move(clusters);
    state.next_id_ = next_id;
    return state;
}

const ClusterStats* MixtureState::find(ClusterId id) const {
    auto it = std::lower_bound(clusters_.begin(), clusters_.end(), id,
                               [](const ClusterStats& c, ClusterId v) { return c.id < v; });
    return it != clusters_.end() && it->id == id ? &*it : nullptr;
}

ClusterStats* MixtureState::find_mutable(ClusterId id) { return const_cast<ClusterStats*>(find(id)); }

void MixtureState::unassign(std::size_t index) {
    if (index >= data_.size()) throw std::domain_error("datum index out of range");
    const ClusterId id = assignments_[index];
    if (id == kNewCluster) return;
    ClusterStats* c = find_mutable(id);
    if (c == nullptr) throw std::logic_error("assignment refers to a missing cluster");
    --c->n_members;
    c->sum_x -= data_[index];
    if (c->n_members == 0) {
        clusters_.erase(clusters_.begin() + (c - clusters_.data()));
    }
    assignments_[index] = kNewCluster;
}

ClusterId MixtureState::assign(std::size_t index, ClusterId target) {
    if (index >= data_.size()) throw std::domain_error("datum index out of range");
    if (assignments_[index] != kNewCluster) throw std::logic_error("datum is already assigned");
    ClusterStats* c = nullptr;
    if (target == kNewCluster) {
        clusters_.push_back({next_id_++, 0, 0, data_.size()});  // ids increase, so order is kept
        c = &clusters_.back();
    } else {
        c = find_mutable(target);
        if (c == nullptr) throw std::domain_error("assignment to an unknown cluster");
    }
    ++c->n_members;
    c->sum_x += data_[index];
    assignments_[index] = c->id;
    return c->id;
}

ClusterId MixtureState::append(CountDatum x, ClusterId target) {
    data_.push_back(x);
    assignments_.push_back(kNewCluster);
    return assign(data_.size() - 1, target);
}

namespace {

// Member count and sum of cluster `c` once datum `excluding` (if any) is taken out.
struct ReducedStats {
    std::uint64_t n = 0;
    std::uint64_t sum = 0;
};

ReducedStats reduced(const ClusterStats& c, const MixtureState& state, std::optional<std::size_t> excluding) {
    ReducedStats r{c.n_members, c.sum_x};
    if (excluding && state.assignments()[*excluding] == c.id) {
        --r.n;
        r.sum -= state.data()[*excluding];
    }
    return r;
}

void check_excluding(const MixtureState& state, std::optional<std::size_t> excluding) {
    if (excluding && *excluding >= state.size()) throw std::domain_error("excluding index out of range");
}

}  // namespace

std::vector<LogWeight> assignment_log_weights(CountDatum x, const MixtureState& state,
                                              std::optional<std::size_t> excluding) {
    check_excluding(state, excluding);
    const GammaParams& base = state.hyper().base;
    std::vector<LogWeight> weights;
    weights.reserve(state.clusters().size() + 1);
    for (const auto& c : state.clusters()) {
        const ReducedStats r = reduced(c, state, excluding);
        if (r.n == 0) continue;
        const NBParams marginal = predictive_update(base, r.n, r.sum);
        weights.push_back({c.id, std::log(static_cast<double>(r.n)) + nb_log_pmf(x, marginal)});
    }
    const NBParams prior_predictive = predictive_update(base, 0, 0);
    weights.push_back({kNewCluster, std::log(state.hyper().alpha) + nb_log_pmf(x, prior_predictive)});
    return weights;
}

std::vector<double> normalize_log_weights(std::span<const LogWeight> weights) {
    std::vector<double> probs(weights.size());
    if (weights.empty()) return probs;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& w : weights) top = std::max(top, w.log_weight);
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        probs[i] = std::exp(weights[i].log_weight - top);
        total += probs[i];
    }
    for (auto& p : probs) p /= total;
    return probs;
}

std::vector<LabelProbability> assignment_probabilities(CountDatum x, const MixtureState& state,
                                                       std::optional<std::size_t> excluding) {
    const auto weights = assignment_log_weights(x, state, excluding);
    const auto probs = normalize_log_weights(weights);
    std::vector<LabelProbability> out(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) out[i] = {weights[i].id, probs[i]};
    return out;
}

std::vector<LabelProbability> crp_prior(const MixtureState& state, std::optional<std::size_t> excluding) {
    check_excluding(state, excluding);
    const double others = static_cast<double>(excluding ? state.size() - 1 : state.size());
    const double denom = state.hyper().alpha + others;
    std::vector<LabelProbability> out;
    out.reserve(state.clusters().size() + 1);
    for (const auto& c : state.clusters()) {
        const ReducedStats r = reduced(c, state, excluding);
        if (r.n == 0) continue;
        out.push_back({c.id, static_cast<double>(r.n) / denom});
    }
    out.push_back({kNewCluster, state.hyper().alpha / denom});
    return out;
}

std::size_t select_index(std::span<const double> probs, Selection selection, Rng& rng) {
    if (probs.empty()) throw std::domain_error("select_index: no outcomes");
    if (selection == Selection::sample) return sample_categorical(probs, rng);
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

ResampleRecord resample_one(MixtureState& state, std::size_t index, Rng& rng, Selection selection) {
    if (index >= state.size()) throw std::domain_error("resample_one: index out of range");
    ResampleRecord record;
    record.previous = state.assignments()[index];
    state.unassign(index);
    const CountDatum x = state.data()[index];
    const auto weights = assignment_log_weights(x, state, std::nullopt);
    const auto probs = normalize_log_weights(weights);
    const std::size_t pick = select_index(probs, selection, rng);
    record.chosen = state.assign(index, weights[pick].id);
    record.chosen_log_weight = weights[pick].log_weight;
    record.probabilities.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) record.probabilities[i] = {weights[i].id, probs[i]};
    if (weights[pick].id == kNewCluster) record.probabilities[pick].id = record.chosen;
    return record;
}

SweepResult gibbs_sweep(MixtureState& state, Rng& rng) {
    SweepResult result;
    result.probabilities.reserve(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        ResampleRecord r = resample_one(state, i, rng);
        result.log_likelihood += r.chosen_log_weight;
        if (r.chosen != r.previous) ++result.label_flips;
        result.probabilities.push_back(std::move(r.probabilities));
    }
    return result;
}

void FitOptions::validate() const {
    if (!(sweeps > burn_in)) throw std::domain_error("fit: sweeps must exceed burn_in");
}

std::optional<std::size_t> ProbabilityTable::column(ClusterId id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
}

namespace {

ProbabilityTable to_table(const std::vector<std::map<ClusterId, double>>& sums, double divisor) {
    ProbabilityTable table;
    std::vector<ClusterId> ids;
    for (const auto& row : sums) {
        for (const auto& [id, value] : row) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    table.ids = std::move(ids);
    table.rows = sums.size();
    table.values.assign(table.rows * table.ids.size(), 0.0);
    for (std::size_t r = 0; r < sums.size(); ++r) {
        auto out = table.row(r);
        for (const auto& [id, value] : sums[r]) out[*table.column(id)] = value / divisor;
    }
    return table;
}

}  // namespace

FitResult fit(std::vector<CountDatum> data, const Hyperparams& hyper, const FitOptions& options) {
    options.validate();
    hyper.validate();
    FitResult result{MixtureState::single_cluster(std::move(data), hyper, options.seed), 0, {}, {}, {}};
    MixtureState& state = result.state;
    if (state.size() == 0) return result;

    Rng rng(options.seed);
    std::vector<std::map<ClusterId, double>> sums(state.size());
    std::size_t averaged = 0;
    std::size_t stable_run = 0;
    std::size_t previous_k = state.clusters().size();

    for (std::size_t sweep = 0; sweep < options.sweeps; ++sweep) {
        SweepResult s = gibbs_sweep(state, rng);
        const std::size_t k = state.clusters().size();
        result.diagnostics.push_back({k, s.log_likelihood, s.label_flips});
        if (sweep >= options.burn_in) {
            for (std::size_t i = 0; i < state.size(); ++i) {
                for (const auto& lp : s.probabilities[i]) sums[i][lp.id] += lp.probability;
            }
            ++averaged;
            const bool stable = k == previous_k && s.label_flips * 100 < state.size();
            stable_run = stable ? stable_run + 1 : 0;
            if (options.early_stop && stable_run >= 10) break;
        }
        previous_k = k;
    }
    result.rng_draws = rng.draws();
    result.probabilities = to_table(sums, static_cast<double>(averaged));
    result.labels = state.assignments();
    return result;
}

bool audit(const MixtureState& state) {
    std::map<ClusterId, std::pair<std::uint64_t, std::uint64_t>> recomputed;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const ClusterId id = state.assignments()[i];
        if (id == kNewCluster) return false;
        auto& [n, sum] = recomputed[id];
        ++n;
        sum += state.data()[i];
    }
    if (recomputed.size() != state.clusters().size()) return false;
    for (const auto& c : state.clusters()) {
        auto it = recomputed.find(c.id);
        if (it == recomputed.end()) return false;
        if (it->second.first != c.n_members || it->second.second != c.sum_x) return false;
        if (c.id >= state.next_id()) return false;
    }
    return true;
}

std::vector<ClusterId> clusters_by_rate(const MixtureState& state) {
    std::vector<const ClusterStats*> order;
    for (const auto& c : state.clusters()) order.push_back(&c);
    const GammaParams& base = state.hyper().base;
    std::stable_sort(order.begin(), order.end(), [&](const ClusterStats* l, const ClusterStats* r) {
        return l->posterior_mean_rate(base) > r->posterior_mean_rate(base);
    });
    std::vector<ClusterId> ids;
    for (const auto* c : order) ids.push_back(c->id);
    return ids;
}

ClusterId lowest_rate_cluster(const MixtureState& state, double min_share) {
    // stragglers holding a couple of data can undercut the background rate; skip them
    const double floor = min_share * static_cast<double>(state.size());
    bool any = false;
    for (const auto& c : state.clusters()) any = any || static_cast<double>(c.n_members) >= floor;
    ClusterId best = kNewCluster;
    double best_rate = std::numeric_limits<double>::infinity();
    for (const auto& c : state.clusters()) {
        if (any && static_cast<double>(c.n_members) < floor) continue;
        const double rate = c.posterior_mean_rate(state.hyper().base);
        if (rate < best_rate) {
            best_rate = rate;
            best = c.id;
        }
    }
    return best;
}

}  // namespace aedp
