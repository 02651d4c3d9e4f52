#include "aedp/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aedp {

double entropy(std::span<const double> probs) {
    double total = 0.0;
    double h = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::domain_error("entropy: negative probability");
        total += p;
        if (p > 0.0) h -= p * std::log(p);
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("entropy: probabilities are not normalized");
    return h;
}

double information_efficiency(std::span<const double> probs, std::size_t k) {
    if (k == 0) throw std::domain_error("information_efficiency: undefined without a non-empty component");
    if (probs.size() != k + 1) throw std::domain_error("information_efficiency: expected K + 1 probabilities");
    const double eta = entropy(probs) / std::log(static_cast<double>(k + 1));
    return std::clamp(eta, 0.0, 1.0);
}

const char* to_string(AlarmEvent::Kind kind) {
    return kind == AlarmEvent::Kind::new_cluster ? "new_cluster" : "growth_step";
}

ObserveResult observe(CountDatum x, MixtureState& state, Rng& rng, GateMode mode) {
    ObserveResult result;
    ObserveDecision& d = result.decision;
    d.ordinal = state.size();
    const ClusterId first_new_id = state.next_id();

    d.probabilities = assignment_probabilities(x, state, std::nullopt);
    const std::size_t k = state.clusters().size();

    if (k == 0) {
        d.assigned = state.append(x, kNewCluster);
    } else {
        std::vector<double> probs(d.probabilities.size());
        for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = d.probabilities[i].probability;
        switch (mode) {
            case GateMode::entropy:
                d.eta = information_efficiency(probs, k);
                d.gate_draw = rng.uniform();
                d.resampled = d.gate_draw < d.eta;
                break;
            case GateMode::always_resample:
                d.eta = 1.0;
                d.resampled = true;
                break;
            case GateMode::never_resample:
                d.eta = 0.0;
                d.resampled = false;
                break;
        }
        const Selection selection = d.resampled ? Selection::sample : Selection::argmax;
        const std::size_t pick = select_index(probs, selection, rng);
        state.append(x, d.probabilities[pick].id);
        if (d.resampled) gibbs_sweep(state, rng);
        d.assigned = state.assignments().back();
    }

    for (const auto& c : state.clusters()) {
        if (c.id >= first_new_id) {
            result.alarms.push_back(
                {d.ordinal, AlarmEvent::Kind::new_cluster, c.id, c.posterior_mean_rate(state.hyper().base), 0.0});
        }
    }
    return result;
}

bool keep_hit(std::size_t index, double keep_ratio) {
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) throw std::domain_error("keep_ratio must lie in (0, 1]");
    const double i = static_cast<double>(index);
    return std::floor(i * keep_ratio) > std::floor((i - 1.0) * keep_ratio);
}

std::vector<std::size_t> decimate_indices(std::size_t count, double keep_ratio) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < count; ++i) {
        if (keep_hit(i, keep_ratio)) kept.push_back(i);
    }
    return kept;
}

void GrowthRule::validate() const {
    if (!(step_factor > 0.0)) throw std::domain_error("step_factor must be positive");
    if (lag == 0) throw std::domain_error("growth lag must be positive");
}

TrackSet::TrackSet(GrowthRule rule) : rule_(rule) { rule_.validate(); }

namespace {

double median(std::deque<double> values) {
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

std::vector<AlarmEvent> TrackSet::update(ClusterId cluster, std::uint64_t ordinal, double time, CountDatum count,
                                         double energy) {
    if (energy < 0.0) throw std::domain_error("track update: negative energy");
    std::vector<AlarmEvent> alarms;
    ClusterTrack& t = tracks_[cluster];
    t.cluster = cluster;

    if (t.recent_increments.size() >= rule_.min_history) {
        const double typical = median(t.recent_increments);
        if (typical > 0.0 && energy > rule_.step_factor * typical) {
            alarms.push_back({ordinal, AlarmEvent::Kind::growth_step, cluster, energy / typical, time});
        }
    }

    const std::uint64_t events = t.cumulative_events.empty() ? 0 : t.cumulative_events.back();
    const std::uint64_t counts = t.cumulative_counts.empty() ? 0 : t.cumulative_counts.back();
    const double total_energy = t.cumulative_energy.empty() ? 0.0 : t.cumulative_energy.back();
    t.times.push_back(time);
    t.cumulative_events.push_back(events + 1);
    t.cumulative_counts.push_back(counts + count);
    t.cumulative_energy.push_back(total_energy + energy);
    t.recent_increments.push_back(energy);
    if (t.recent_increments.size() > rule_.lag) t.recent_increments.pop_front();

    history_.push_back({time, cluster, t.cumulative_events.back(), t.cumulative_counts.back(),
                        t.cumulative_energy.back()});
    return alarms;
}

std::vector<ClusterId> top_clusters_by_rate(const MixtureState& state, std::size_t m) {
    if (m == 0) throw std::domain_error("top_clusters_by_rate: m must be at least 1");
    auto order = clusters_by_rate(state);
    if (order.size() > m) order.resize(m);
    return order;
}

OnlineMonitor::OnlineMonitor(MonitorConfig config)
    : config_(config), state_(config.hyper, config.seed), rng_(config.seed), tracks_(config.growth) {}

std::vector<AlarmEvent> OnlineMonitor::push(const HitObservation& hit) {
    ObserveResult r = observe(hit.count, state_, rng_, config_.gate);
    const std::uint64_t now = r.decision.ordinal;
    const bool armed = now >= config_.warmup;

    if (armed) {
        for (const auto& a : r.alarms) pending_.push_back({a.cluster, now});
    }

    std::vector<AlarmEvent> confirmed;
    for (auto& a : tracks_.update(r.decision.assigned, now, hit.time, hit.count, hit.energy)) {
        if (armed) confirmed.push_back(a);
    }

    std::erase_if(pending_, [&](const Pending& p) {
        const ClusterStats* c = state_.find(p.cluster);
        if (c == nullptr) return true;
        if (now - p.created >= config_.survival_horizon && c->n_members >= config_.min_survivor_members) {
            confirmed.push_back({now, AlarmEvent::Kind::new_cluster, p.cluster,
                                 c->posterior_mean_rate(state_.hyper().base), hit.time});
            return true;
        }
        return false;
    });

    alarms_.insert(alarms_.end(), confirmed.begin(), confirmed.end());
    last_decision_ = std::move(r.decision);
    return confirmed;
}

}  // namespace aedp
