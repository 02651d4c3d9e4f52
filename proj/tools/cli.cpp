#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "aedp/config.hpp"
#include "aedp/errors.hpp"
#include "aedp/io.hpp"
#include "aedp/records.hpp"
#include "aedp/synth.hpp"

namespace aedp::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::string jsonl(const std::vector<json>& rows) {
    std::string out;
    for (const auto& r : rows) out += r.dump() + '\n';
    return out;
}

struct InputOptions {
    std::string path;
    std::string format = "raw_f32_le";
    std::optional<double> rate;
    double volts_per_lsb = 1.0 / 32768.0;

    void add(CLI::App* app) {
        app->add_option("-i,--input", path, "Input waveform")->required();
        app->add_option("--format", format, "csv | raw_f32_le | raw_i16_le")
            ->check(CLI::IsMember({"csv", "raw_f32_le", "raw_i16_le"}));
        app->add_option("--rate", rate, "Sample rate in Hz (raw formats, single-column CSV)");
        app->add_option("--volts-per-lsb", volts_per_lsb, "Scale for raw_i16_le codes");
    }

    Waveform load() const {
        return read_waveform(path, parse_sample_format(format), ReadOptions{rate, volts_per_lsb});
    }
};

// Flags that override the config file. Only the options a subcommand registers
// are ever set.
struct Overrides {
    std::string config_path;
    std::optional<double> percentile;
    std::optional<double> volts;
    bool no_rectify = false;
    std::optional<std::size_t> window;
    std::optional<double> overlap;
    std::optional<double> alpha;
    std::optional<double> prior_a;
    std::optional<double> prior_b;
    std::optional<std::size_t> sweeps;
    std::optional<std::size_t> burn_in;
    std::optional<double> keep_ratio;
    std::optional<double> min_probability;
    std::optional<std::size_t> min_length;
    std::optional<double> step_factor;
    std::optional<std::size_t> lag;
    std::optional<std::size_t> min_history;
    std::optional<std::size_t> survival_horizon;
    std::optional<std::uint64_t> warmup;
    std::optional<double> margin;
    std::vector<std::string> train;
    std::optional<std::uint64_t> seed;

    void add_common(CLI::App* app) {
        app->add_option("-c,--config", config_path, "Pipeline config JSON");
        app->add_option("--seed", seed, "RNG seed");
    }
    void add_threshold(CLI::App* app) {
        auto* p = app->add_option("--threshold-percentile", percentile, "Percentile threshold, (0, 100)");
        auto* v = app->add_option("--threshold-volts", volts, "Fixed threshold in volts");
        p->excludes(v);
        app->add_flag("--no-rectify", no_rectify, "Threshold the signed signal instead of |v|");
    }
    void add_window(CLI::App* app) {
        app->add_option("-n,--window", window, "Window length in samples");
        app->add_option("--overlap", overlap, "Window overlap fraction in [0, 1)");
    }
    void add_prior(CLI::App* app) {
        app->add_option("--prior-a", prior_a, "Gamma prior shape");
        app->add_option("--prior-b", prior_b, "Gamma prior rate");
    }
    void add_mixture(CLI::App* app) {
        add_prior(app);
        app->add_option("--alpha", alpha, "DP concentration");
    }
    void add_fit(CLI::App* app) {
        app->add_option("--sweeps", sweeps, "Gibbs sweeps");
        app->add_option("--burn-in", burn_in, "Sweeps discarded before averaging");
        app->add_option("--min-probability", min_probability, "Event threshold on 1 - P(noise)");
        app->add_option("--min-length", min_length, "Shortest event kept, samples");
    }
    void add_alarm(CLI::App* app) {
        app->add_option("--keep-ratio", keep_ratio, "Fraction of hits retained, (0, 1]");
        app->add_option("--step-factor", step_factor, "Growth alarm factor over the trailing median");
        app->add_option("--lag", lag, "Trailing increments in the median");
        app->add_option("--min-history", min_history, "Increments needed before growth alarms");
        app->add_option("--survival-horizon", survival_horizon, "Observations a new cluster must survive");
        app->add_option("--warmup", warmup, "Initial observations that cannot raise alarms");
    }
    void add_detector(CLI::App* app) {
        add_prior(app);
        app->add_option("--margin", margin, "NLL margin above the training maximum");
        app->add_option("--train", train, "Training windows as first:last (window indices, end exclusive)");
    }

    PipelineConfig resolve() const {
        PipelineConfig c;
        if (!config_path.empty()) {
            std::string text;
            try {
                text = read_text(config_path);
            } catch (const DataError& e) {
                throw UsageError(e.what());
            }
            c = parse_config(text);
        }
        if (percentile) c.threshold = ThresholdPolicy::percentile(*percentile, c.threshold.rectify);
        if (volts) c.threshold = ThresholdPolicy::fixed(*volts, c.threshold.rectify);
        if (no_rectify) c.threshold.rectify = false;
        if (window) c.window.length = *window;
        if (overlap) c.window.overlap = *overlap;
        if (alpha) c.hyper.alpha = *alpha;
        if (prior_a || prior_b) {
            c.hyper.base = GammaParams(prior_a.value_or(c.hyper.base.shape), prior_b.value_or(c.hyper.base.rate));
        }
        if (sweeps) c.sweeps = *sweeps;
        if (burn_in) c.burn_in = *burn_in;
        if (keep_ratio) c.keep_ratio = *keep_ratio;
        if (min_probability) c.segmentation.min_probability = *min_probability;
        if (min_length) c.segmentation.min_length = *min_length;
        if (step_factor) c.alarm.growth.step_factor = *step_factor;
        if (lag) c.alarm.growth.lag = *lag;
        if (min_history) c.alarm.growth.min_history = *min_history;
        if (survival_horizon) c.alarm.survival_horizon = *survival_horizon;
        if (warmup) c.alarm.warmup = *warmup;
        if (margin) c.detector.margin = *margin;
        if (!train.empty()) {
            c.detector.train.clear();
            for (const auto& r : train) {
                const auto colon = r.find(':');
                std::size_t first = 0;
                std::size_t last = 0;
                try {
                    if (colon == std::string::npos) throw std::invalid_argument(r);
                    std::size_t used = 0;
                    first = std::stoul(r.substr(0, colon), &used);
                    if (used != colon) throw std::invalid_argument(r);
                    const std::string tail = r.substr(colon + 1);
                    last = std::stoul(tail, &used);
                    if (used != tail.size()) throw std::invalid_argument(r);
                } catch (const std::exception&) {
                    throw UsageError("--train expects first:last, got " + r);
                }
                c.detector.train.emplace_back(first, last);
            }
        }
        if (seed) c.seed = *seed;
        c.validate();
        return c;
    }
};

// --- synth ---------------------------------------------------------------

struct SynthArgs {
    std::string preset;
    std::string spec_path;
    std::string out;
    std::string format = "raw_f32_le";
    std::string annotations;
    std::size_t hits = 10000;
    std::size_t damage_start = 6000;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
    if (a.preset.empty() == a.spec_path.empty()) throw UsageError("synth needs exactly one of --preset or --spec");
    if (a.preset == "landing-gear") {
        if (a.damage_start > a.hits) throw UsageError("--damage-start exceeds --hits");
        const HitStream stream = synthesize_hits(landing_gear_spec(a.hits, a.damage_start), a.seed);
        write_hits(a.out, stream.header, stream.records);
        if (!a.annotations.empty()) {
            json j = {{"families", stream.families}, {"damage_start", a.damage_start}};
            write_text(a.annotations, j.dump() + '\n');
        }
        out << "hits=" << stream.records.size() << '\n';
        return ok;
    }
    SynthSpec spec;
    if (!a.spec_path.empty()) {
        spec = synth_spec_from_json(parse_json_file(a.spec_path));
    } else if (a.preset == "lead-break") {
        spec = lead_break_spec();
    } else if (a.preset == "journal-bearing") {
        spec = journal_bearing_spec(false);
    } else if (a.preset == "journal-bearing-3") {
        spec = journal_bearing_spec(true);
    }
    const SynthResult result = synthesize(spec, a.seed);
    write_waveform(a.out, result.waveform, parse_sample_format(a.format));
    if (!a.annotations.empty()) {
        write_text(a.annotations,
                   annotations_json(result.annotations, spec.sample_rate, result.waveform.size()).dump() + '\n');
    }
    out << "samples=" << result.waveform.size() << " rate=" << format_double(spec.sample_rate)
        << " bursts=" << result.annotations.size() << '\n';
    return ok;
}

// --- detect --------------------------------------------------------------

struct DetectArgs {
    InputOptions input;
    Overrides over;
    std::string trace_out;
    std::string intervals_out;
};

int run_detect(const DetectArgs& a, std::ostream& out) {
    const PipelineConfig config = a.over.resolve();
    const Waveform w = a.input.load();
    const WindowedCounts wc = extract_counts(w, config.threshold, config.window);
    if (wc.entries.empty()) throw DataError("signal is shorter than one window");

    std::vector<std::size_t> train;
    if (config.detector.train.empty()) {
        train = lowest_decile_windows(wc);
    } else {
        for (const auto& [first, last] : config.detector.train) {
            if (last > wc.entries.size()) {
                throw DataError("training range ends at window " + std::to_string(last) + " but there are only " +
                                std::to_string(wc.entries.size()));
            }
            for (std::size_t i = first; i < last; ++i) train.push_back(i);
        }
    }
    std::vector<CountDatum> noise;
    for (std::size_t i : train) noise.push_back(wc.entries[i].count);
    const BackgroundModel model = train_background(config.hyper.base, noise);
    const NllTrace trace = score(model, wc, noise, config.detector.margin);
    const auto intervals = flag_events(trace);

    write_text(a.trace_out, nll_trace_csv(trace));
    json doc = intervals_json(intervals, trace, w.sample_rate);
    doc["threshold_volts"] = wc.threshold;
    doc["training_windows"] = train.size();
    write_text(a.intervals_out, doc.dump(2) + '\n');
    out << "windows=" << wc.entries.size() << " training=" << train.size() << " intervals=" << intervals.size()
        << " flag_threshold=" << format_double(trace.flag_threshold) << '\n';
    return ok;
}

// --- cluster -------------------------------------------------------------

struct ClusterArgs {
    InputOptions input;
    Overrides over;
    std::string events_out;
    std::string state_out;
};

int run_cluster(const ClusterArgs& a, std::ostream& out) {
    const PipelineConfig config = a.over.resolve();
    const Waveform w = a.input.load();
    const WindowedCounts wc = extract_counts(w, config.threshold, config.window);
    if (wc.entries.empty()) throw DataError("signal is shorter than one window");

    FitOptions options{config.sweeps, config.burn_in, config.seed};
    const FitResult fitted = fit(wc.counts(), config.hyper, options);
    const SampleProbabilityField field = average_probabilities(fitted.probabilities, config.window, w.size());
    const ClusterId noise = lowest_rate_cluster(fitted.state);
    if (!field.column(noise)) throw DataError("noise cluster carries no averaged probability");
    auto events = segment_events(field, noise, config.segmentation);
    attach_features(w, events, wc.threshold, wc.rectify);

    std::vector<json> rows;
    for (const auto& e : events) rows.push_back(event_json(e, w.sample_rate));
    write_text(a.events_out, jsonl(rows));
    json state = model_state_json(fitted.state, fitted.rng_draws);
    state["noise_cluster"] = noise;
    state["threshold_volts"] = wc.threshold;
    state["window"] = {{"length", config.window.length}, {"overlap", config.window.overlap}};
    write_text(a.state_out, state.dump(2) + '\n');
    out << "windows=" << wc.entries.size() << " clusters=" << fitted.state.clusters().size()
        << " events=" << events.size() << '\n';
    return ok;
}

// --- monitor -------------------------------------------------------------

struct MonitorArgs {
    std::string input;
    Overrides over;
    std::string gate = "entropy";
    std::string alarms_out;
    std::string tracks_out;
};

int run_monitor(const MonitorArgs& a, std::ostream& out) {
    const PipelineConfig config = a.over.resolve();
    const HitFile file = read_hits(a.input);
    const auto kept = decimate_indices(file.records.size(), config.keep_ratio);

    double threshold = config.threshold.value;
    if (config.threshold.kind == ThresholdPolicy::Kind::percentile) {
        // Pre-trigger samples of the retained hits are the noise reference.
        std::vector<double> pooled;
        for (std::size_t i : kept) {
            const auto& r = file.records[i];
            for (std::size_t s = 0; s < r.pretrigger; ++s) {
                pooled.push_back(config.threshold.rectify ? std::abs(r.samples[s]) : r.samples[s]);
            }
        }
        if (pooled.empty()) throw DataError("no pre-trigger samples to derive a percentile threshold");
        threshold = percentile(std::move(pooled), config.threshold.value);
    }

    MonitorConfig mc;
    mc.hyper = config.hyper;
    mc.gate = a.gate == "always" ? GateMode::always_resample
              : a.gate == "never" ? GateMode::never_resample
                                  : GateMode::entropy;
    mc.growth = config.alarm.growth;
    mc.survival_horizon = config.alarm.survival_horizon;
    mc.min_survivor_members = config.alarm.min_survivor_members;
    mc.warmup = config.alarm.warmup;
    mc.seed = config.seed;
    OnlineMonitor monitor(mc);
    for (std::size_t i : kept) {
        const auto& r = file.records[i];
        const Waveform w(r.samples, file.header.sample_rate);
        const WaveformFeatures f = extract_features(w, 0, w.size(), threshold, config.threshold.rectify);
        monitor.push({f.count, f.energy, r.trigger_time});
    }

    std::vector<json> rows;
    for (const auto& alarm : monitor.alarms()) {
        json j = alarm_json(alarm);
        j["hit"] = kept[alarm.time];
        rows.push_back(std::move(j));
    }
    write_text(a.alarms_out, jsonl(rows));
    write_text(a.tracks_out, tracks_csv(monitor.tracks().history()));
    out << "hits=" << file.records.size() << " retained=" << kept.size()
        << " clusters=" << monitor.state().clusters().size() << " alarms=" << monitor.alarms().size() << '\n';
    return ok;
}

// --- features ------------------------------------------------------------

struct FeaturesArgs {
    InputOptions input;
    Overrides over;
    std::string annotations;
    std::string out_path;
};

int run_features(const FeaturesArgs& a, std::ostream& out) {
    const PipelineConfig config = a.over.resolve();
    const Waveform w = a.input.load();
    const auto annotations = annotations_from_json(parse_json_file(a.annotations));
    const double threshold = resolve_threshold(w, config.threshold);
    std::vector<json> rows;
    for (const auto& an : annotations) {
        if (an.end > w.size()) throw DataError("annotation extends past the end of the waveform");
        const WaveformFeatures f = extract_features(w, an.start, an.end, threshold, config.threshold.rectify);
        rows.push_back({{"start", an.start}, {"end", an.end}, {"family", an.family}, {"features", features_json(f)}});
    }
    write_text(a.out_path, jsonl(rows));
    out << "events=" << rows.size() << " threshold=" << format_double(threshold) << '\n';
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Acoustic-emission event detection and clustering"};
    app.name("aedp");
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic waveform or hit stream");
    s->add_option("--preset", synth.preset, "lead-break | journal-bearing | journal-bearing-3 | landing-gear")
        ->check(CLI::IsMember({"lead-break", "journal-bearing", "journal-bearing-3", "landing-gear"}));
    s->add_option("--spec", synth.spec_path, "Synthetic spec JSON");
    s->add_option("-o,--out", synth.out, "Output waveform (or hit file for landing-gear)")->required();
    s->add_option("--format", synth.format, "Waveform format")->check(CLI::IsMember({"csv", "raw_f32_le", "raw_i16_le"}));
    s->add_option("--annotations", synth.annotations, "Ground-truth annotations JSON");
    s->add_option("--hits", synth.hits, "Hit count (landing-gear)");
    s->add_option("--damage-start", synth.damage_start, "First hit of the damage family (landing-gear)");
    s->add_option("--seed", synth.seed, "RNG seed");

    DetectArgs detect;
    auto* d = app.add_subcommand("detect", "Score windows against a Poisson background model");
    detect.input.add(d);
    detect.over.add_common(d);
    detect.over.add_threshold(d);
    detect.over.add_window(d);
    detect.over.add_detector(d);
    d->add_option("--trace-out", detect.trace_out, "NLL trace CSV")->required();
    d->add_option("--intervals-out", detect.intervals_out, "Flagged intervals JSON")->required();

    ClusterArgs cluster;
    auto* c = app.add_subcommand("cluster", "Cluster window counts and segment events");
    cluster.input.add(c);
    cluster.over.add_common(c);
    cluster.over.add_threshold(c);
    cluster.over.add_window(c);
    cluster.over.add_mixture(c);
    cluster.over.add_fit(c);
    c->add_option("--events-out", cluster.events_out, "Events JSON lines")->required();
    c->add_option("--state-out", cluster.state_out, "Model state JSON")->required();

    MonitorArgs monitor;
    auto* m = app.add_subcommand("monitor", "Stream a hit file through the online mixture");
    m->add_option("-i,--input", monitor.input, "Hit file")->required();
    monitor.over.add_common(m);
    monitor.over.add_threshold(m);
    monitor.over.add_mixture(m);
    monitor.over.add_alarm(m);
    m->add_option("--gate", monitor.gate, "entropy | always | never")
        ->check(CLI::IsMember({"entropy", "always", "never"}));
    m->add_option("--alarms-out", monitor.alarms_out, "Alarms JSON lines")->required();
    m->add_option("--tracks-out", monitor.tracks_out, "Cluster tracks CSV")->required();

    FeaturesArgs features;
    auto* f = app.add_subcommand("features", "Waveform features of annotated events");
    features.input.add(f);
    features.over.add_common(f);
    features.over.add_threshold(f);
    f->add_option("--annotations", features.annotations, "Annotations JSON")->required();
    f->add_option("-o,--out", features.out_path, "Features JSON lines")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (e.get_exit_code() == 0) return ok;
        err << "run with --help for usage\n";
        return usage_error;
    }

    try {
        if (s->parsed()) return run_synth(synth, out);
        if (d->parsed()) return run_detect(detect, out);
        if (c->parsed()) return run_cluster(cluster, out);
        if (m->parsed()) return run_monitor(monitor, out);
        if (f->parsed()) return run_features(features, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return data_error;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return data_error;
    }
    return usage_error;
}

}  // namespace aedp::cli
