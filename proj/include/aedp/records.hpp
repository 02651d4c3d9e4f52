#pragma once

// JSON / CSV encodings of pipeline outputs and the model-state document.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aedp/detector.hpp"
#include "aedp/dppmm.hpp"
#include "aedp/monitor.hpp"
#include "aedp/segmentation.hpp"
#include "aedp/synth.hpp"
#include "json.hpp"

namespace aedp {

// FNV-1a over the little-endian bytes of each datum.
std::uint64_t data_digest(std::span<const CountDatum> data);

nlohmann::json model_state_json(const MixtureState& state, std::uint64_t rng_draws);

struct LoadedModel {
    MixtureState state;
    std::uint64_t rng_draws = 0;
};

// The data are not stored in the document; they are supplied again and checked
// against the digest. Throws DataError on mismatch or an inconsistent state.
LoadedModel load_model_state(const nlohmann::json& j, std::vector<CountDatum> data);

nlohmann::json features_json(const WaveformFeatures& f);
nlohmann::json event_json(const EventRecord& e, double sample_rate);
nlohmann::json alarm_json(const AlarmEvent& a);
nlohmann::json intervals_json(std::span<const SampleInterval> intervals, const NllTrace& trace, double sample_rate);

nlohmann::json annotations_json(std::span<const BurstAnnotation> annotations, double sample_rate, std::size_t length);
std::vector<BurstAnnotation> annotations_from_json(const nlohmann::json& j);

nlohmann::json synth_spec_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

std::string nll_trace_csv(const NllTrace& trace);
std::string tracks_csv(std::span<const TrackRow> rows);

// Doubles printed with round-trip precision.
std::string format_double(double v);

}  // namespace aedp
