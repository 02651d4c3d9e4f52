#pragma once

// Poisson, Gamma and negative-binomial quantities for count data.
//
// Convention shared by every module: NBParams{r, p} has pmf
//   Gamma(x + r) / (x! Gamma(r)) * p^r * (1 - p)^x,
// so the predictive of a Gamma(a, b) prior after N observations summing to S
// is NB(a + S, (N + b) / (N + b + 1)).

#include <cstdint>
#include <span>

namespace aedp {

using CountDatum = std::uint64_t;

struct GammaParams {
    double shape = 1.0;  // a
    double rate = 1.0;   // b

    GammaParams() = default;
    GammaParams(double shape, double rate);  // throws std::domain_error

    double mean() const { return shape / rate; }
    friend bool operator==(const GammaParams&, const GammaParams&) = default;
};

struct NBParams {
    double r = 1.0;
    double p = 0.5;

    NBParams() = default;
    NBParams(double r, double p);  // throws std::domain_error

    friend bool operator==(const NBParams&, const NBParams&) = default;
};

// log Gamma(z + d) - log Gamma(z) without cancellation for large arguments.
double log_gamma_diff(double z, double d);

double poisson_log_pmf(CountDatum x, double lambda);
double poisson_pmf(CountDatum x, double lambda);

GammaParams gamma_posterior(const GammaParams& prior, std::span<const CountDatum> data);

// Posterior predictive after n_obs observations with total sum_x.
NBParams predictive_update(const GammaParams& prior, std::uint64_t n_obs, std::uint64_t sum_x);

double nb_log_pmf(CountDatum x, const NBParams& params);
double nb_pmf(CountDatum x, const NBParams& params);

// Negative log-likelihood of x under the predictive, -log nb_pmf.
double nll(CountDatum x, const NBParams& params);

}  // namespace aedp
