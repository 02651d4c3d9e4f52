#include "aedp/config.hpp"

#include <set>
#include <stdexcept>

namespace aedp {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw std::domain_error(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw std::domain_error("unknown config key: " + where + "." + key);
    }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void PipelineConfig::validate() const {
    threshold.validate();
    window.validate();
    hyper.validate();
    FitOptions{sweeps, burn_in, seed}.validate();
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) throw std::domain_error("keep_ratio must be in (0, 1]");
    if (!(segmentation.min_probability > 0.0 && segmentation.min_probability <= 1.0)) {
        throw std::domain_error("segmentation.min_probability must be in (0, 1]");
    }
    alarm.growth.validate();
    if (alarm.min_survivor_members == 0) throw std::domain_error("alarm.min_survivor_members must be positive");
    if (!(detector.margin >= 0.0)) throw std::domain_error("detector.margin must be non-negative");
    for (const auto& [first, last] : detector.train) {
        if (first >= last) throw std::domain_error("detector.train ranges must be non-empty [first, last)");
    }
}

json to_json(const PipelineConfig& c) {
    json train = json::array();
    for (const auto& [first, last] : c.detector.train) train.push_back({first, last});
    return {
        {"threshold",
         {{"kind", c.threshold.kind == ThresholdPolicy::Kind::percentile ? "percentile" : "fixed"},
          {"value", c.threshold.value},
          {"rectify", c.threshold.rectify}}},
        {"window", {{"length", c.window.length}, {"overlap", c.window.overlap}}},
        {"prior", {{"a", c.hyper.base.shape}, {"b", c.hyper.base.rate}}},
        {"alpha", c.hyper.alpha},
        {"sweeps", c.sweeps},
        {"burn_in", c.burn_in},
        {"keep_ratio", c.keep_ratio},
        {"segmentation", {{"min_probability", c.segmentation.min_probability}, {"min_length", c.segmentation.min_length}}},
        {"alarm",
         {{"step_factor", c.alarm.growth.step_factor},
          {"lag", c.alarm.growth.lag},
          {"min_history", c.alarm.growth.min_history},
          {"survival_horizon", c.alarm.survival_horizon},
          {"min_survivor_members", c.alarm.min_survivor_members},
          {"warmup", c.alarm.warmup}}},
        {"detector", {{"margin", c.detector.margin}, {"train", train}}},
        {"seed", c.seed},
    };
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    try {
        reject_unknown(j,
                       {"threshold", "window", "prior", "alpha", "sweeps", "burn_in", "keep_ratio", "segmentation",
                        "alarm", "detector", "seed"},
                       "config");
        if (j.contains("threshold")) {
            const json& t = j.at("threshold");
            reject_unknown(t, {"kind", "value", "rectify"}, "threshold");
            if (t.contains("kind")) {
                const auto kind = t.at("kind").get<std::string>();
                if (kind == "percentile") {
                    c.threshold.kind = ThresholdPolicy::Kind::percentile;
                } else if (kind == "fixed") {
                    c.threshold.kind = ThresholdPolicy::Kind::fixed;
                } else {
                    throw std::domain_error("threshold.kind must be percentile or fixed");
                }
            }
            take(t, "value", c.threshold.value);
            take(t, "rectify", c.threshold.rectify);
        }
        if (j.contains("window")) {
            const json& w = j.at("window");
            reject_unknown(w, {"length", "overlap"}, "window");
            take(w, "length", c.window.length);
            take(w, "overlap", c.window.overlap);
        }
        if (j.contains("prior")) {
            const json& p = j.at("prior");
            reject_unknown(p, {"a", "b"}, "prior");
            double a = c.hyper.base.shape;
            double b = c.hyper.base.rate;
            take(p, "a", a);
            take(p, "b", b);
            c.hyper.base = GammaParams(a, b);
        }
        take(j, "alpha", c.hyper.alpha);
        take(j, "sweeps", c.sweeps);
        take(j, "burn_in", c.burn_in);
        take(j, "keep_ratio", c.keep_ratio);
        if (j.contains("segmentation")) {
            const json& s = j.at("segmentation");
            reject_unknown(s, {"min_probability", "min_length"}, "segmentation");
            take(s, "min_probability", c.segmentation.min_probability);
            take(s, "min_length", c.segmentation.min_length);
        }
        if (j.contains("alarm")) {
            const json& a = j.at("alarm");
            reject_unknown(a,
                           {"step_factor", "lag", "min_history", "survival_horizon", "min_survivor_members", "warmup"},
                           "alarm");
            take(a, "step_factor", c.alarm.growth.step_factor);
            take(a, "lag", c.alarm.growth.lag);
            take(a, "min_history", c.alarm.growth.min_history);
            take(a, "survival_horizon", c.alarm.survival_horizon);
            take(a, "min_survivor_members", c.alarm.min_survivor_members);
            take(a, "warmup", c.alarm.warmup);
        }
        if (j.contains("detector")) {
            const json& d = j.at("detector");
            reject_unknown(d, {"margin", "train"}, "detector");
            take(d, "margin", c.detector.margin);
            if (d.contains("train")) {
                for (const json& r : d.at("train")) {
                    if (!r.is_array() || r.size() != 2) throw std::domain_error("detector.train entries are [first, last]");
                    c.detector.train.emplace_back(r[0].get<std::size_t>(), r[1].get<std::size_t>());
                }
            }
        }
        take(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw std::domain_error(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::domain_error(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

std::string serialize_config(const PipelineConfig& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace aedp
