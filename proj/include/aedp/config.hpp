#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aedp/detector.hpp"
#include "aedp/dppmm.hpp"
#include "aedp/monitor.hpp"
#include "aedp/segmentation.hpp"
#include "aedp/windowing.hpp"
#include "json.hpp"

namespace aedp {

struct AlarmConfig {
    GrowthRule growth;
    std::size_t survival_horizon = 20;
    std::size_t min_survivor_members = 2;
    std::uint64_t warmup = 0;
};

struct DetectorConfig {
    double margin = kDefaultFlagMargin;
    // Training windows as [first, last) window-index ranges; empty selects the
    // lowest-decile heuristic.
    std::vector<std::pair<std::size_t, std::size_t>> train;
};

struct PipelineConfig {
    ThresholdPolicy threshold;
    WindowSpec window{1000, 0.0};
    Hyperparams hyper;  // alpha and the Gamma prior (a, b)
    std::size_t sweeps = 200;
    std::size_t burn_in = 50;
    double keep_ratio = 1.0;
    SegmentOptions segmentation;
    AlarmConfig alarm;
    DetectorConfig detector;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::domain_error
};

nlohmann::json to_json(const PipelineConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);

PipelineConfig parse_config(const std::string& text);
std::string serialize_config(const PipelineConfig& config);

}  // namespace aedp
