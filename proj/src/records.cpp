#include "aedp/records.hpp"

#include <charconv>
#include <sstream>

#include "aedp/errors.hpp"

namespace aedp {

using nlohmann::json;

std::uint64_t data_digest(std::span<const CountDatum> data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (CountDatum x : data) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (x >> (8 * byte)) & 0xFFu;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

json model_state_json(const MixtureState& state, std::uint64_t rng_draws) {
    json clusters = json::array();
    for (const auto& c : state.clusters()) {
        clusters.push_back({{"id", c.id},
                            {"n_members", c.n_members},
                            {"sum_x", c.sum_x},
                            {"created_at", c.created_at},
                            {"posterior_mean_rate", c.posterior_mean_rate(state.hyper().base)}});
    }
    return {
        {"format", "aedp-model-state"},
        {"version", 1},
        {"hyper", {{"alpha", state.hyper().alpha}, {"a", state.hyper().base.shape}, {"b", state.hyper().base.rate}}},
        {"n_data", state.size()},
        {"data_digest", data_digest(state.data())},
        {"assignments", state.assignments()},
        {"clusters", clusters},
        {"next_cluster_id", state.next_id()},
        {"rng", {{"seed", state.rng_seed()}, {"draws", rng_draws}}},
    };
}

LoadedModel load_model_state(const json& j, std::vector<CountDatum> data) {
    try {
        if (j.at("format").get<std::string>() != "aedp-model-state") throw FormatError("not a model-state document");
        if (j.at("n_data").get<std::size_t>() != data.size()) throw FormatError("model state: data size mismatch");
        if (j.at("data_digest").get<std::uint64_t>() != data_digest(data)) throw FormatError("model state: data digest mismatch");
        Hyperparams hyper{j.at("hyper").at("alpha").get<double>(),
                          GammaParams(j.at("hyper").at("a").get<double>(), j.at("hyper").at("b").get<double>())};
        std::vector<ClusterStats> clusters;
        for (const json& c : j.at("clusters")) {
            clusters.push_back({c.at("id").get<ClusterId>(), c.at("n_members").get<std::uint64_t>(),
                                c.at("sum_x").get<std::uint64_t>(), c.at("created_at").get<std::uint64_t>()});
        }
        LoadedModel out{MixtureState::from_parts(std::move(data), j.at("assignments").get<std::vector<ClusterId>>(),
                                                 std::move(clusters), hyper, j.at("next_cluster_id").get<ClusterId>(),
                                                 j.at("rng").at("seed").get<std::uint64_t>()),
                        j.at("rng").at("draws").get<std::uint64_t>()};
        if (!audit(out.state)) throw FormatError("model state: cluster statistics do not match the assignments");
        return out;
    } catch (const json::exception& e) {
        throw FormatError(std::string("model state: ") + e.what());
    } catch (const std::domain_error& e) {
        throw FormatError(std::string("model state: ") + e.what());
    }
}

json features_json(const WaveformFeatures& f) {
    return {{"count", f.count},
            {"peak_amplitude", f.peak_amplitude},
            {"rise_time", f.rise_time},
            {"duration", f.duration},
            {"energy", f.energy}};
}

json event_json(const EventRecord& e, double sample_rate) {
    return {{"start", e.start},
            {"end", e.end},
            {"start_time", static_cast<double>(e.start) / sample_rate},
            {"end_time", static_cast<double>(e.end) / sample_rate},
            {"label", e.label},
            {"mean_probability", e.mean_probability},
            {"features", features_json(e.features)}};
}

json alarm_json(const AlarmEvent& a) {
    return {{"time", a.time},
            {"timestamp", a.timestamp},
            {"kind", to_string(a.kind)},
            {"cluster", a.cluster},
            {"magnitude", a.magnitude}};
}

json intervals_json(std::span<const SampleInterval> intervals, const NllTrace& trace, double sample_rate) {
    json list = json::array();
    for (const auto& iv : intervals) {
        list.push_back({{"start", iv.start},
                        {"end", iv.end},
                        {"start_time", static_cast<double>(iv.start) / sample_rate},
                        {"end_time", static_cast<double>(iv.end) / sample_rate}});
    }
    return {{"window", {{"length", trace.spec.length}, {"overlap", trace.spec.overlap}}},
            {"flag_threshold", trace.flag_threshold},
            {"intervals", list}};
}

json annotations_json(std::span<const BurstAnnotation> annotations, double sample_rate, std::size_t length) {
    json events = json::array();
    for (const auto& a : annotations) events.push_back({{"start", a.start}, {"end", a.end}, {"family", a.family}});
    return {{"sample_rate", sample_rate}, {"length", length}, {"events", events}};
}

std::vector<BurstAnnotation> annotations_from_json(const json& j) {
    try {
        std::vector<BurstAnnotation> out;
        const json& events = j.is_array() ? j : j.at("events");
        for (const json& e : events) {
            BurstAnnotation a{e.at("start").get<std::size_t>(), e.at("end").get<std::size_t>(), e.value("family", 0)};
            if (a.end < a.start) throw FormatError("annotation ends before it starts");
            out.push_back(a);
        }
        return out;
    } catch (const json::exception& e) {
        throw FormatError(std::string("annotations: ") + e.what());
    }
}

json synth_spec_json(const SynthSpec& spec) {
    json bursts = json::array();
    for (const auto& b : spec.bursts) {
        bursts.push_back({{"onset", b.onset},
                          {"amplitude", b.amplitude},
                          {"decay_tau", b.decay_tau},
                          {"carrier_freq", b.carrier_freq},
                          {"family", b.family},
                          {"rise_time", b.rise_time}});
    }
    return {{"duration", spec.duration},
            {"sample_rate", spec.sample_rate},
            {"noise_sigma", spec.noise_sigma},
            {"bursts", bursts}};
}

SynthSpec synth_spec_from_json(const json& j) {
    try {
        SynthSpec s;
        s.duration = j.at("duration").get<double>();
        s.sample_rate = j.at("sample_rate").get<double>();
        s.noise_sigma = j.at("noise_sigma").get<double>();
        for (const json& b : j.value("bursts", json::array())) {
            s.bursts.push_back({b.at("onset").get<double>(), b.at("amplitude").get<double>(),
                                b.at("decay_tau").get<double>(), b.at("carrier_freq").get<double>(),
                                b.value("family", 1), b.value("rise_time", 0.0)});
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw std::domain_error(std::string("synth spec: ") + e.what());
    }
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string nll_trace_csv(const NllTrace& trace) {
    std::string out = "window,start,end,count,nll,flagged\n";
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
        const auto& e = trace.entries[i];
        out += std::to_string(i) + ',' + std::to_string(e.start) + ',' + std::to_string(e.start + trace.spec.length) +
               ',' + std::to_string(e.count) + ',' + format_double(e.nll) + ',' +
               (e.nll > trace.flag_threshold ? "1" : "0") + '\n';
    }
    return out;
}

std::string tracks_csv(std::span<const TrackRow> rows) {
    std::string out = "time,cluster,cumulative_events,cumulative_counts,cumulative_energy\n";
    for (const auto& r : rows) {
        out += format_double(r.time) + ',' + std::to_string(r.cluster) + ',' + std::to_string(r.cumulative_events) +
               ',' + std::to_string(r.cumulative_counts) + ',' + format_double(r.cumulative_energy) + '\n';
    }
    return out;
}

}  // namespace aedp
