#include "aedp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aedp {

namespace {

constexpr double kStirlingMin = 16.0;

// Tail of the Stirling series for log Gamma(w), w >= kStirlingMin.
double stirling_correction(double w) {
    const double inv = 1.0 / w;
    const double inv2 = inv * inv;
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

}  // namespace

GammaParams::GammaParams(double shape_, double rate_) : shape(shape_), rate(rate_) {
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
        throw std::domain_error("GammaParams: shape and rate must be positive and finite");
    }
}

NBParams::NBParams(double r_, double p_) : r(r_), p(p_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("NBParams: r must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("NBParams: p must lie in (0, 1)");
}

double log_gamma_diff(double z, double d) {
    if (!(z > 0.0) || !(z + d > 0.0)) throw std::domain_error("log_gamma_diff: arguments must be positive");
    if (d == 0.0) return 0.0;
    const double w = z + d;
    if (z >= kStirlingMin && w >= kStirlingMin) {
        return (z - 0.5) * std::log1p(d / z) + d * std::log(w) - d + stirling_correction(w) -
               stirling_correction(z);
    }
    // Lift both arguments into the asymptotic range with the recurrence
    // Gamma(v + 1) = v Gamma(v), when only one of them is small.
    const double lo = std::min(z, w);
    const double hi = std::max(z, w);
    if (hi >= 4.0 * kStirlingMin) {
        double shift_log = 0.0;
        double lifted = lo;
        while (lifted < kStirlingMin) {
            shift_log += std::log(lifted);
            lifted += 1.0;
        }
        // log Gamma(hi) - log Gamma(lo) = [log Gamma(hi) - log Gamma(lifted)] + shift_log
        const double span = log_gamma_diff(lifted, hi - lifted) + shift_log;
        return z <= w ? span : -span;
    }
    return std::lgamma(w) - std::lgamma(z);
}

double poisson_log_pmf(CountDatum x, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::domain_error("poisson_pmf: lambda must be positive");
    const double xd = static_cast<double>(x);
    const double x_log_lambda = x == 0 ? 0.0 : xd * std::log(lambda);
    return x_log_lambda - lambda - std::lgamma(xd + 1.0);
}

double poisson_pmf(CountDatum x, double lambda) { return std::exp(poisson_log_pmf(x, lambda)); }

GammaParams gamma_posterior(const GammaParams& prior, std::span<const CountDatum> data) {
    const auto sum = std::accumulate(data.begin(), data.end(), std::uint64_t{0});
    return {prior.shape + static_cast<double>(sum), prior.rate + static_cast<double>(data.size())};
}

NBParams predictive_update(const GammaParams& prior, std::uint64_t n_obs, std::uint64_t sum_x) {
    if (n_obs == 0 && sum_x != 0) throw std::domain_error("predictive_update: sum_x must be 0 without observations");
    const double rate = static_cast<double>(n_obs) + prior.rate;
    return {static_cast<double>(sum_x) + prior.shape, rate / (rate + 1.0)};
}

double nb_log_pmf(CountDatum x, const NBParams& params) {
    const double xd = static_cast<double>(x);
    // log Gamma(x + r) - log Gamma(x + 1) - log Gamma(r)
    const double log_coeff = log_gamma_diff(xd + 1.0, params.r - 1.0) - std::lgamma(params.r);
    const double tail = x == 0 ? 0.0 : xd * std::log1p(-params.p);
    return log_coeff + params.r * std::log(params.p) + tail;
}

double nb_pmf(CountDatum x, const NBParams& params) { return std::exp(nb_log_pmf(x, params)); }

double nll(CountDatum x, const NBParams& params) {
    // The pmf never exceeds one; clamp the rounding residue at the mode.
    return std::max(0.0, -nb_log_pmf(x, params));
}

}  // namespace aedp
