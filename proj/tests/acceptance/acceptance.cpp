// Acceptance run: one verdict line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "aedp/detector.hpp"
#include "aedp/distributions.hpp"
#include "aedp/dppmm.hpp"
#include "aedp/monitor.hpp"
#include "aedp/segmentation.hpp"
#include "aedp/synth.hpp"
#include "aedp/windowing.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace aedp;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool intersects(std::size_t start, std::size_t n, const std::vector<BurstAnnotation>& bursts) {
    for (const auto& b : bursts)
        if (start < b.end && b.start < start + n) return true;
    return false;
}

std::vector<CountDatum> two_component(std::uint64_t seed, std::vector<std::int64_t>* truth = nullptr) {
    std::mt19937_64 gen(0xac4000 + seed);
    std::poisson_distribution<CountDatum> lo(2.0), hi(40.0);
    std::vector<CountDatum> data;
    for (int i = 0; i < 250; ++i) data.push_back(lo(gen));
    for (int i = 0; i < 250; ++i) data.push_back(hi(gen));
    if (truth) {
        truth->assign(250, 0);
        truth->resize(500, 1);
    }
    return data;
}

std::size_t groups_with_share(const MixtureState& s, double share) {
    std::size_t k = 0;
    for (const auto& c : s.clusters()) k += static_cast<double>(c.n_members) >= share * static_cast<double>(s.size());
    return k;
}

// Conjugacy: NB predictive against quadrature and Monte Carlo.
Verdict ac1() {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    double worst_quad = 0.0, worst_mc = 0.0;
    std::size_t mc_points = 0;
    for (int t = 0; t < 100; ++t) {
        const GammaParams prior(u(gen), u(gen));
        const std::uint64_t n = gen() % 51;
        const std::uint64_t s = n == 0 ? 0 : gen() % (20 * n + 1);
        const NBParams nb = predictive_update(prior, n, s);
        const double shape = prior.shape + static_cast<double>(s);
        const double rate = prior.rate + static_cast<double>(n);

        std::gamma_distribution<double> lam(shape, 1.0 / rate);
        std::vector<double> draws(100000);
        for (auto& l : draws) l = lam(gen);

        for (CountDatum x = 0; x <= 200; ++x) {
            const double lp = nb_log_pmf(x, nb);
            const double q = oracle::log_predictive_quadrature(x, shape, rate);
            worst_quad = std::max(worst_quad, std::abs(std::expm1(q - lp)));

            // only where 1e5 draws can resolve 1e-2 (four standard errors)
            const double rel_se =
                std::sqrt(std::max(0.0, std::exp(oracle::log_second_moment(x, shape, rate) - 2 * lp) - 1.0) / 1e5);
            if (rel_se > 2.5e-3) continue;
            double mc = 0.0;
            for (double l : draws) mc += std::exp(oracle::log_poisson(x, l) - lp);
            worst_mc = std::max(worst_mc, std::abs(mc / 1e5 - 1.0));
            ++mc_points;
        }
    }
    return {worst_quad < 1e-6 && worst_mc < 1e-2 && mc_points > 0,
            fmt("max rel err quadrature %.2e, Monte Carlo %.2e over %zu resolvable points", worst_quad, worst_mc,
                mc_points)};
}

// Lead-break separation and flagging.
Verdict ac2() {
    const SynthSpec spec = lead_break_spec();
    const double thr = 3 * spec.noise_sigma;
    int separated = 0, covered = 0;
    double worst_quiet = 1.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto synth = synthesize(spec, seed);
        {
            const WindowSpec win{4096, 0.0};
            const auto wc = extract_counts(synth.waveform, thr, true, win);
            std::vector<CountDatum> noise;
            for (const auto& e : wc.entries)
                if (!intersects(e.start, win.length, synth.annotations) && noise.size() < 20) noise.push_back(e.count);
            const auto trace = score(train_background(GammaParams(1, 1), noise), wc, noise);
            double min_burst = INFINITY, max_noise = -INFINITY;
            for (const auto& e : trace.entries) {
                if (intersects(e.start, win.length, synth.annotations)) {
                    min_burst = std::min(min_burst, e.nll);
                } else {
                    max_noise = std::max(max_noise, e.nll);
                }
            }
            separated += min_burst > max_noise;
        }
        {
            const WindowSpec win{256, 0.0};
            const auto wc = extract_counts(synth.waveform, thr, true, win);
            std::vector<CountDatum> noise;
            for (const auto& e : wc.entries)
                if (!intersects(e.start, win.length, synth.annotations) && noise.size() < 20) noise.push_back(e.count);
            const auto trace = score(train_background(GammaParams(1, 1), noise), wc, noise);
            std::size_t quiet = 0, noise_windows = 0;
            bool all_bursts = true;
            for (const auto& b : synth.annotations) {
                bool hit = false;
                for (const auto& e : trace.entries)
                    hit = hit || (e.nll > trace.flag_threshold && e.start < b.end && b.start < e.start + win.length);
                all_bursts = all_bursts && hit;
            }
            for (const auto& e : trace.entries) {
                if (intersects(e.start, win.length, synth.annotations)) continue;
                ++noise_windows;
                quiet += e.nll <= trace.flag_threshold;
            }
            const double frac = static_cast<double>(quiet) / static_cast<double>(noise_windows);
            worst_quiet = std::min(worst_quiet, frac);
            covered += all_bursts && frac >= 0.95;
        }
    }
    return {separated >= 19 && covered == 20,
            fmt("n=4096 separated in %d/20 seeds; n=256 bursts flagged and >=95%% noise quiet in %d/20 "
                "(worst quiet fraction %.3f)",
                separated, covered, worst_quiet)};
}

// Partition posterior on [0, 1, 9].
Verdict ac3() {
    const std::vector<std::uint64_t> xs{0, 1, 9};
    const auto exact = oracle::partition_posterior(xs, 1.0, 1.0, 1.0);
    auto state = MixtureState::single_cluster({0, 1, 9}, Hyperparams{}, 0);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) gibbs_sweep(state, rng);
    std::map<std::vector<int>, double> freq;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        gibbs_sweep(state, rng);
        freq[oracle::canonical(state.assignments())] += 1.0 / n;
    }
    double tv = 0.0;
    for (const auto& [p, pr] : exact) tv += std::abs(pr - (freq.count(p) ? freq.at(p) : 0.0));
    tv *= 0.5;
    return {tv < 0.02, fmt("total variation %.4f over %zu partitions", tv, exact.size())};
}

// Two-component recovery.
Verdict ac4() {
    std::vector<double> groups, aris, low_rate, high_rate;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::vector<std::int64_t> truth;
        const auto data = two_component(seed, &truth);
        const auto res = fit(data, Hyperparams{}, FitOptions{200, 50, seed});
        groups.push_back(static_cast<double>(groups_with_share(res.state, 0.05)));
        aris.push_back(oracle::adjusted_rand_index(res.labels, truth));
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& c : res.state.clusters()) {
            if (static_cast<double>(c.n_members) < 0.05 * 500) continue;
            const double r = c.posterior_mean_rate(res.state.hyper().base);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        low_rate.push_back(lo);
        high_rate.push_back(hi);
    }
    const double g = oracle::median(groups), a = oracle::median(aris);
    const double lo = oracle::median(low_rate), hi = oracle::median(high_rate);
    const bool rates = std::abs(lo - 2.0) <= 0.2 && std::abs(hi - 40.0) <= 4.0;
    return {g == 2.0 && a >= 0.95 && rates,
            fmt("median >=5%% groups %.1f, median ARI %.3f, median rates %.2f / %.2f", g, a, lo, hi)};
}

// Alpha sensitivity on the three-family signal.
Verdict ac5() {
    const SynthSpec spec = journal_bearing_spec(true);
    const WindowSpec win{1000, 0.0};
    double k1 = 0.0, k10 = 0.0;
    int three = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto synth = synthesize(spec, seed);
        const auto counts = extract_counts(synth.waveform, 2.5e-3, true, win).counts();
        const auto a = fit(counts, Hyperparams{1.0, GammaParams(1, 1)}, FitOptions{200, 50, seed});
        const auto b = fit(counts, Hyperparams{10.0, GammaParams(1, 1)}, FitOptions{200, 50, seed});
        k1 += static_cast<double>(a.state.clusters().size()) / 20.0;
        k10 += static_cast<double>(b.state.clusters().size()) / 20.0;
        three += groups_with_share(b.state, 0.05) >= 3;
    }
    return {k10 > k1 && three >= 14,
            fmt("mean K %.2f (alpha 1) vs %.2f (alpha 10); alpha 10 has >=3 groups in %d/20 seeds", k1, k10, three)};
}

// CRP and weight normalisation over random states.
Verdict ac6() {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> ad(0.01, 50.0);
    double worst_prior = 0.0, worst_weights = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + gen() % 60;
        std::vector<CountDatum> data;
        for (std::size_t i = 0; i < n; ++i) data.push_back(gen() % 80);
        auto state = MixtureState::single_cluster(data, Hyperparams{ad(gen), GammaParams(ad(gen), ad(gen))}, 0);
        for (std::size_t i = 0; i < n; ++i) {
            state.unassign(i);
            const auto& cl = state.clusters();
            const std::size_t pick = gen() % (cl.size() + 1);
            state.assign(i, pick < cl.size() ? cl[pick].id : kNewCluster);
        }
        const std::size_t i = gen() % n;
        double s = 0.0;
        for (const auto& e : crp_prior(state, i)) s += e.probability;
        worst_prior = std::max(worst_prior, std::abs(s - 1.0));
        double w = 0.0;
        for (const auto& e : assignment_probabilities(state.data()[i], state, i)) w += e.probability;
        worst_weights = std::max(worst_weights, std::abs(w - 1.0));
    }
    return {worst_prior <= 1e-12 && worst_weights <= 1e-12,
            fmt("max |sum - 1|: prior %.1e, weights %.1e", worst_prior, worst_weights)};
}

// Overlap robustness on a burst starting half a window into a window.
Verdict ac7() {
    SynthSpec spec;
    spec.duration = 0.1;
    spec.sample_rate = 1e6;
    spec.noise_sigma = 1e-3;
    // slow linear onset: the first half-window of burst holds only a few crossings
    BurstSpec b{0.0405, 0.02, 2e-3, 150e3, 1, 8e-3};
    spec.bursts = {b};
    const std::size_t onset = 40500, n = 1000;
    const std::size_t onset_window = onset / n * n;
    // core: envelope at or above half its peak
    const std::size_t core_start = onset + 4000;
    const std::size_t core_end = onset + 8000 + static_cast<std::size_t>(2e-3 * 1e6 * std::log(2.0));
    int ok = 0;
    double worst_core = 1.0, worst_onset = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto synth = synthesize(spec, seed);
        auto event_field = [&](double overlap) {
            const WindowSpec win{n, overlap};
            const auto wc = extract_counts(synth.waveform, 2.5e-3, true, win);
            const auto res = fit(wc.counts(), Hyperparams{}, FitOptions{200, 50, seed});
            const auto field = average_probabilities(res.probabilities, win, synth.waveform.samples.size());
            const std::size_t col = *field.column(lowest_rate_cluster(res.state));
            std::vector<double> ev(field.length, 0.0);
            for (std::size_t s = 0; s < field.length; ++s)
                if (field.coverage[s] > 0) ev[s] = 1.0 - field.at(s)[col];
            return ev;
        };
        const auto dense = event_field(0.875);
        const auto sparse = event_field(0.0);
        std::size_t good = 0;
        for (std::size_t s = core_start; s < core_end; ++s) good += dense[s] >= 0.5;
        const double core = static_cast<double>(good) / static_cast<double>(core_end - core_start);
        double onset_p = 0.0, onset_dense = 0.0;
        for (std::size_t s = onset_window; s < onset_window + n; ++s) {
            onset_p = std::max(onset_p, sparse[s]);
            onset_dense += dense[s] / static_cast<double>(n);
        }
        worst_core = std::min(worst_core, core);
        worst_onset = std::max(worst_onset, onset_p);
        ok += core >= 0.9 && onset_p < 0.5 && onset_p < onset_dense;
    }
    return {ok == 10, fmt("%d/10 seeds; worst core coverage %.3f (overlap 0.875), worst onset-window P %.3f (overlap 0)",
                          ok, worst_core, worst_onset)};
}

// Entropy gate: exact extremes and online-vs-batch cluster counts.
Verdict ac8() {
    double worst = 0.0;
    for (std::size_t k = 1; k <= 30; ++k) {
        std::vector<double> one_hot(k + 1, 0.0), uniform(k + 1, 1.0 / static_cast<double>(k + 1));
        one_hot[k / 2] = 1.0;
        worst = std::max(worst, std::abs(information_efficiency(one_hot, k)));
        worst = std::max(worst, std::abs(information_efficiency(uniform, k) - 1.0));
    }
    std::vector<double> online, batch;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto data = two_component(seed);
        batch.push_back(static_cast<double>(fit(data, Hyperparams{}, FitOptions{200, 50, seed}).state.clusters().size()));
        std::mt19937_64 gen(seed);
        std::shuffle(data.begin(), data.end(), gen);
        MixtureState state(Hyperparams{}, seed);
        Rng rng(seed);
        for (CountDatum x : data) observe(x, state, rng, GateMode::always_resample);
        online.push_back(static_cast<double>(state.clusters().size()));
    }
    const double p = oracle::mann_whitney_p(online, batch);
    return {worst <= 1e-12 && p > 0.01,
            fmt("eta extremes off by %.1e; cluster counts median online %.1f vs batch %.1f, Mann-Whitney p = %.3f",
                worst, oracle::median(online), oracle::median(batch), p)};
}

// Monitor end to end on the landing-gear stream.
Verdict ac9() {
    int good = 0;
    std::string misses;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto stream = synthesize_hits(landing_gear_spec(10000, 6000), seed);
        const auto kept = decimate_indices(stream.records.size(), 0.1);
        MonitorConfig cfg;
        cfg.hyper = Hyperparams{1.0, GammaParams(1.0, 0.02)};
        cfg.warmup = 100;
        cfg.survival_horizon = 100;
        cfg.seed = seed;
        OnlineMonitor mon(cfg);
        std::size_t injection = kept.size();
        for (std::size_t k = 0; k < kept.size(); ++k) {
            const auto& r = stream.records[kept[k]];
            if (injection == kept.size() && kept[k] >= 6000) injection = k;
            const Waveform w(r.samples, stream.header.sample_rate);
            const auto f = extract_features(w, 0, w.samples.size(), 5e-3, true);
            mon.push({f.count, f.energy, r.trigger_time});
        }
        bool early = false, timely = false;
        for (const auto& a : mon.alarms()) {
            early = early || a.time < injection;
            timely = timely || (a.time >= injection && a.time <= injection + 200);
        }
        if (!early && timely) {
            ++good;
        } else {
            misses += fmt(" %llu", static_cast<unsigned long long>(seed));
        }
    }
    return {good >= 18, fmt("%d/20 seeds alarm within 200 retained hits and stay quiet before injection%s%s", good,
                            misses.empty() ? "" : "; missed seeds:", misses.c_str())};
}

// CLI determinism: every subcommand twice, outputs compared byte for byte.
Verdict ac10() {
    namespace fs = std::filesystem;
    TempDir dir("acceptance");
    const std::string cli = AEDP_CLI_PATH;
    auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()) == 0; };
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string w = dir / "w.f32", jb = dir / "jb.f32", ann = dir / "jb.json", hits = dir / "h.bin";
    if (!sh(cli + " synth --preset lead-break --seed 2 -o " + w) ||
        !sh(cli + " synth --preset journal-bearing-3 --seed 2 -o " + jb + " --annotations " + ann) ||
        !sh(cli + " synth --preset landing-gear --hits 2000 --damage-start 1200 --seed 2 -o " + hits)) {
        return {false, "synth failed"};
    }
    struct Run {
        std::string name, args;
        std::vector<std::string> outputs;
    };
    const std::vector<Run> runs{
        {"synth", "synth --preset landing-gear --hits 300 --damage-start 200 --seed 9 -o @/h.bin --annotations @/a.json", {"h.bin", "a.json"}},
        {"detect", "detect -i " + w + " --rate 1e6 -n 256 --threshold-volts 3e-3 --trace-out @/t.csv --intervals-out @/i.json",
         {"t.csv", "i.json"}},
        {"cluster", "cluster -i " + jb + " --rate 1e6 --threshold-volts 2.5e-3 --alpha 10 --seed 4 --events-out @/e.jsonl --state-out @/s.json",
         {"e.jsonl", "s.json"}},
        {"monitor", "monitor -i " + hits + " --threshold-volts 5e-3 --keep-ratio 0.5 --prior-b 0.02 --warmup 100 --seed 4 --alarms-out @/a.jsonl --tracks-out @/t.csv",
         {"a.jsonl", "t.csv"}},
        {"features", "features -i " + jb + " --rate 1e6 --threshold-volts 2.5e-3 --annotations " + ann + " -o @/f.jsonl",
         {"f.jsonl"}},
    };
    std::string detail;
    bool all = true;
    for (const auto& run : runs) {
        std::vector<std::string> first;
        bool same = true, ran = true;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = dir.path / (run.name + std::to_string(rep));
            fs::create_directories(out);
            std::string args = run.args;
            for (std::size_t p; (p = args.find('@')) != std::string::npos;) args.replace(p, 1, out.string());
            if (!sh(cli + " " + args)) {
                same = ran = false;
                break;
            }
            for (std::size_t i = 0; i < run.outputs.size(); ++i) {
                const auto bytes = slurp((out / run.outputs[i]).string());
                if (rep == 0) {
                    first.push_back(bytes);
                } else {
                    same = same && bytes == first[i] && !bytes.empty();
                }
            }
        }
        all = all && same;
        detail += " " + run.name + (!ran ? "=failed" : same ? "=identical" : "=DIFFERENT");
    }
    return {all, "outputs:" + detail};
}

}  // namespace

// --expect-fail AC-n marks a criterion known to fail; the exit status is then
// non-zero if it unexpectedly passes, or if any other criterion fails.
int main(int argc, char** argv) {
    std::vector<std::string> expected;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) {
            expected.emplace_back(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--expect-fail AC-n]...\n", argv[0]);
            return 2;
        }
    }
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"AC-1 conjugacy oracle", ac1},        {"AC-2 lead-break separation", ac2},
        {"AC-3 partition posterior", ac3},     {"AC-4 mixture recovery", ac4},
        {"AC-5 alpha sensitivity", ac5},       {"AC-6 CRP normalisation", ac6},
        {"AC-7 overlap robustness", ac7},      {"AC-8 entropy gate", ac8},
        {"AC-9 monitor end to end", ac9},      {"AC-10 CLI determinism", ac10},
    };
    int passed = 0;
    bool surprise = false;
    for (const auto& [name, check] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        const Verdict v = check();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
        std::fflush(stdout);
        passed += v.pass;
        const std::string id(name, std::string_view(name).find(' '));
        const bool known = std::find(expected.begin(), expected.end(), id) != expected.end();
        surprise = surprise || v.pass == known;
    }
    std::printf("acceptance: %d/%zu criteria passed", passed, criteria.size());
    for (const auto& e : expected) std::printf(" (%s expected to fail)", e.c_str());
    std::printf("\n");
    return surprise ? 1 : 0;
}
