#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "aedp/dppmm.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace aedp;

namespace {

MixtureState two_clusters() {
    // cluster 0: ten data summing to 5; cluster 1: ten data summing to 400
    std::vector<CountDatum> data;
    std::vector<ClusterId> z;
    for (int i = 0; i < 10; ++i) {
        data.push_back(i < 5 ? 1 : 0);
        z.push_back(0);
    }
    for (int i = 0; i < 10; ++i) {
        data.push_back(40);
        z.push_back(1);
    }
    return MixtureState::from_parts(data, z, {{0, 10, 5, 0}, {1, 10, 400, 0}}, Hyperparams{}, 2, 0);
}

std::vector<CountDatum> poisson_mixture(std::uint64_t seed, std::vector<std::int64_t>* truth = nullptr) {
    std::mt19937_64 gen(seed);
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

MixtureState random_state(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> nd(1, 40), kd(1, 6), xd(0, 60);
    std::uniform_real_distribution<double> ad(0.05, 20.0);
    const int n = nd(gen);
    const int k = kd(gen);
    std::vector<CountDatum> data;
    for (int i = 0; i < n; ++i) data.push_back(xd(gen));
    auto state = MixtureState::single_cluster(data, Hyperparams{ad(gen), GammaParams(ad(gen), ad(gen))}, 0);
    for (int i = 0; i < n; ++i) {
        state.unassign(i);
        const auto& cl = state.clusters();
        const int pick = static_cast<int>(gen() % (cl.size() + 1));
        state.assign(i, pick < static_cast<int>(cl.size()) && pick < k ? cl[pick].id : kNewCluster);
    }
    return state;
}

}  // namespace

TEST_CASE("state construction and bookkeeping") {
    const auto s = MixtureState::single_cluster({3, 5, 0}, Hyperparams{}, 7);
    REQUIRE(s.clusters().size() == 1);
    CHECK(s.clusters()[0].n_members == 3);
    CHECK(s.clusters()[0].sum_x == 8);
    CHECK(audit(s));

    const auto empty = MixtureState::single_cluster({}, Hyperparams{}, 0);
    CHECK(empty.clusters().empty());
    CHECK(lowest_rate_cluster(empty) == kNewCluster);

    auto bad = MixtureState::from_parts({1, 2}, {0, 0}, {{0, 2, 4, 0}}, Hyperparams{}, 1, 0);
    CHECK_FALSE(audit(bad));

    CHECK_THROWS_AS(Hyperparams({0.0, GammaParams(1, 1)}).validate(), std::domain_error);
    CHECK_THROWS_AS(FitOptions({50, 50, 0}).validate(), std::domain_error);
}

TEST_CASE("ids are never reused") {
    auto s = MixtureState::single_cluster({1, 2, 3}, Hyperparams{}, 0);
    s.unassign(0);
    const auto a = s.assign(0, kNewCluster);
    s.unassign(0);  // cluster a dies
    const auto b = s.assign(0, kNewCluster);
    CHECK(a == 1);
    CHECK(b == 2);
    CHECK(s.find(a) == nullptr);
    CHECK(audit(s));
}

TEST_CASE("assignment weights") {
    const auto empty = MixtureState(Hyperparams{}, 0);
    const auto first = assignment_probabilities(7, empty, std::nullopt);
    REQUIRE(first.size() == 1);
    CHECK(first[0].id == kNewCluster);
    CHECK(first[0].probability == 1.0);

    const auto w0 = assignment_log_weights(0, empty, std::nullopt);
    CHECK(std::exp(w0[0].log_weight) == doctest::Approx(0.5).epsilon(1e-15));

    const auto two = two_clusters();
    const auto p = assignment_probabilities(40, two, std::nullopt);
    CHECK(p[1].id == 1);
    CHECK(p[1].probability == doctest::Approx(0.99999999999911735099).epsilon(1e-12));

    CHECK_THROWS_AS(assignment_log_weights(1, two, 20), std::domain_error);
}

TEST_CASE("crp prior") {
    auto s = MixtureState::single_cluster({1, 1}, Hyperparams{}, 0);
    const auto half = crp_prior(s, 0);
    REQUIRE(half.size() == 2);
    CHECK(half[0].probability == 0.5);
    CHECK(half[1].probability == 0.5);

    const auto single = MixtureState::single_cluster({4}, Hyperparams{}, 0);
    const auto alone = crp_prior(single, 0);
    REQUIRE(alone.size() == 1);
    CHECK(alone[0].id == kNewCluster);
    CHECK(alone[0].probability == 1.0);

    std::vector<CountDatum> data(10, 1);
    std::vector<ClusterId> z{0, 0, 0, 1, 1, 1, 1, 1, 1, 2};
    const auto st = MixtureState::from_parts(data, z, {{0, 3, 3, 0}, {1, 6, 6, 0}, {2, 1, 1, 0}}, Hyperparams{}, 3, 0);
    const auto pr = crp_prior(st, 9);  // the singleton's cluster disappears
    REQUIRE(pr.size() == 3);
    CHECK(pr[0].probability == doctest::Approx(0.3));
    CHECK(pr[1].probability == doctest::Approx(0.6));
    CHECK(pr[2].probability == doctest::Approx(0.1));
}

TEST_CASE("normalisation and factorisation over random states") {
    std::mt19937_64 gen(99);
    for (int t = 0; t < 300; ++t) {
        const auto state = random_state(gen);
        REQUIRE(audit(state));
        const std::size_t i = gen() % state.size();
        const auto prior = crp_prior(state, i);
        double s = 0.0;
        for (const auto& e : prior) s += e.probability;
        CHECK(std::abs(s - 1.0) < 1e-12);

        const auto lw = assignment_log_weights(state.data()[i], state, i);
        const auto probs = normalize_log_weights(lw);
        CHECK(std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0) < 1e-12);

        // log weight - log(prior term * predictive) is the same constant for every entry
        REQUIRE(lw.size() == prior.size());
        auto copy = state;
        copy.unassign(i);
        std::vector<double> offsets;
        for (std::size_t k = 0; k < lw.size(); ++k) {
            CHECK(lw[k].id == prior[k].id);
            const ClusterStats* c = lw[k].id == kNewCluster ? nullptr : copy.find(lw[k].id);
            const double shape = state.hyper().base.shape + (c ? static_cast<double>(c->sum_x) : 0.0);
            const double rate = state.hyper().base.rate + (c ? static_cast<double>(c->n_members) : 0.0);
            const double lp = oracle::log_nb(state.data()[i], shape, rate / (rate + 1.0));
            offsets.push_back(lw[k].log_weight - std::log(prior[k].probability) - lp);
        }
        const double m = static_cast<double>(state.size() - 1);
        for (double o : offsets) CHECK(std::abs(o - std::log(state.hyper().alpha + m)) < 1e-10);
    }
}

TEST_CASE("resampling") {
    auto single = MixtureState::single_cluster({6}, Hyperparams{}, 0);
    Rng rng(3);
    resample_one(single, 0, rng);
    CHECK(single.clusters().size() == 1);
    CHECK(audit(single));

    // a datum far from every cluster goes to a new cluster under argmax
    auto st = MixtureState::from_parts({1, 2, 0, 3, 5, 4, 500}, {0, 0, 0, 1, 1, 1, 1}, {{0, 3, 3, 0}, {1, 4, 512, 0}},
                                       Hyperparams{}, 2, 0);
    REQUIRE(audit(st));
    Rng unused(0);
    const auto rec = resample_one(st, 6, unused, Selection::argmax);
    CHECK(unused.draws() == 0);
    CHECK(rec.chosen == 2);
    CHECK(st.clusters().size() == 3);
    CHECK(audit(st));

    // audit after many random resamples
    auto big = MixtureState::single_cluster(poisson_mixture(1), Hyperparams{}, 0);
    Rng r(5);
    for (int k = 0; k < 10000; ++k) resample_one(big, k % big.size(), r);
    CHECK(audit(big));
}

TEST_CASE("argmax ties go to the lowest id") {
    Rng rng(0);
    const std::vector<double> p{0.25, 0.375, 0.375};
    CHECK(select_index(p, Selection::argmax, rng) == 1);
}

TEST_CASE("zero-variance data collapses to one cluster") {
    const std::vector<CountDatum> same(50, 10);
    std::size_t single = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto st = MixtureState::single_cluster(same, Hyperparams{}, seed);
        Rng rng(seed);
        for (int s = 0; s < 50; ++s) {
            gibbs_sweep(st, rng);
            single += st.clusters().size() == 1;
            ++total;
        }
    }
    CHECK(static_cast<double>(single) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("two-component recovery") {
    // the low-rate half may split under the posterior; the high half must come out whole
    std::vector<double> big_counts;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::vector<std::int64_t> truth;
        const auto data = poisson_mixture(100 + seed, &truth);
        const auto res = fit(data, Hyperparams{}, FitOptions{200, 50, seed});
        int big = 0;
        for (const auto& c : res.state.clusters()) big += c.n_members >= 25;
        big_counts.push_back(big);
        bool high_whole = false;
        for (const auto& c : res.state.clusters()) {
            if (c.n_members != 250) continue;
            std::size_t hits = 0;
            for (std::size_t i = 250; i < 500; ++i) hits += res.labels[i] == c.id;
            high_whole = high_whole || hits == 250;
        }
        CHECK(high_whole);
        CHECK(audit(res.state));
        CHECK(res.diagnostics.size() == 200);
        CHECK(res.probabilities.rows == data.size());
    }
    CHECK(oracle::median(big_counts) == 2.0);
}

TEST_CASE("fit is deterministic and resumable state is consistent") {
    const auto data = poisson_mixture(7);
    const auto a = fit(data, Hyperparams{}, FitOptions{60, 10, 42});
    const auto b = fit(data, Hyperparams{}, FitOptions{60, 10, 42});
    CHECK(a.labels == b.labels);
    CHECK(a.rng_draws == b.rng_draws);
    CHECK(a.probabilities.values == b.probabilities.values);

    // averaged rows are probability vectors
    for (std::size_t r = 0; r < a.probabilities.rows; ++r) {
        const auto row = a.probabilities.row(r);
        CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
    }

    const auto empty = fit({}, Hyperparams{}, FitOptions{10, 2, 0});
    CHECK(empty.state.clusters().empty());
    CHECK(empty.labels.empty());

    const auto early = fit(std::vector<CountDatum>(60, 10), Hyperparams{}, FitOptions{500, 20, 3, true});
    CHECK(early.diagnostics.size() < 500);
}

TEST_CASE("larger alpha does not reduce the cluster count") {
    double k1 = 0, k10 = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = poisson_mixture(200 + seed);
        k1 += static_cast<double>(fit(data, Hyperparams{1.0, GammaParams(1, 1)}, FitOptions{60, 20, seed}).state.clusters().size());
        k10 += static_cast<double>(fit(data, Hyperparams{10.0, GammaParams(1, 1)}, FitOptions{60, 20, seed}).state.clusters().size());
    }
    CHECK(k10 >= k1);
}

TEST_CASE("rate ordering") {
    const auto two = two_clusters();
    CHECK(clusters_by_rate(two) == std::vector<ClusterId>{1, 0});
    CHECK(lowest_rate_cluster(two) == 0);
}

TEST_CASE("background cluster ignores stragglers") {
    std::vector<CountDatum> data(40, 12);
    data.push_back(3);
    data.push_back(4);
    std::vector<ClusterId> z(40, 0);
    z.push_back(1);
    z.push_back(1);
    const auto st = MixtureState::from_parts(data, z, {{0, 40, 480, 0}, {1, 2, 7, 0}}, Hyperparams{}, 2, 0);
    CHECK(lowest_rate_cluster(st) == 0);
    CHECK(lowest_rate_cluster(st, 0.0) == 1);
}
