#include "sboost/polya_gamma.hpp"

#include "sboost/stats.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace sboost {

namespace {

constexpr double kTrunc = 0.64;
constexpr double kPi = std::numbers::pi;

// n-th term of the alternating series for the J*(1, z) density.
double series_term(int n, double x) {
    const double k = (n + 0.5) * kPi;
    if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
    if (x <= 0.0) return 0.0;
    const double log_term = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) -
                            2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(log_term);
}

// Probability of proposing from the truncated exponential piece.
double exponential_mass(double z) {
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double root = std::sqrt(1.0 / kTrunc);
    const double b = root * (kTrunc * z - 1.0);
    const double a = -root * (kTrunc * z + 1.0);
    const double x0 = std::log(fz) + fz * kTrunc;
    const double xb = x0 - z + log_normal_cdf(b);
    const double xa = x0 + z + log_normal_cdf(a);
    const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
    return 1.0 / (1.0 + q_over_p);
}

template <class Engine>
double exponential1(Engine& eng) {
    return -std::log(uniform_open(eng));
}

template <class Engine>
double standard_normal(Engine& eng) {
    // Box-Muller keeps the draw count fixed per call, which keeps counter-based
    // streams easy to reason about.
    const double u1 = uniform_open(eng), u2 = uniform_open(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// Inverse-Gaussian IG(1/z, 1) truncated to (0, kTrunc).
template <class Engine>
double truncated_inverse_gaussian(double z, Engine& eng) {
    double x = kTrunc + 1.0;
    if (z < 1.0 / kTrunc) {
        double alpha = 0.0;
        while (uniform_open(eng) > alpha) {
            double e1 = exponential1(eng), e2 = exponential1(eng);
            while (e1 * e1 > 2.0 * e2 / kTrunc) {
                e1 = exponential1(eng);
                e2 = exponential1(eng);
            }
            x = 1.0 + e1 * kTrunc;
            x = kTrunc / (x * x);
            alpha = std::exp(-0.5 * z * z * x);
        }
    } else {
        const double mu = 1.0 / z;
        while (x > kTrunc) {
            double y = standard_normal(eng);
            y *= y;
            const double half_mu = 0.5 * mu, mu_y = mu * y;
            x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
            if (uniform_open(eng) > mu / (mu + x)) x = mu * mu / x;
        }
    }
    return x;
}

template <class Engine>
double sample_pg_impl(double z, Engine& eng) {
    z = 0.5 * std::abs(z);
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double p_exp = exponential_mass(z);
    for (;;) {
        const double x = uniform_open(eng) < p_exp ? kTrunc + exponential1(eng) / fz
                                                   : truncated_inverse_gaussian(z, eng);
        double s = series_term(0, x);
        const double y = uniform_open(eng) * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= series_term(n, x);
                if (y <= s) return 0.25 * x;
            } else {
                s += series_term(n, x);
                if (y > s) break;
            }
        }
    }
}

} // namespace

double sample_pg(double z, Rng& rng) { return sample_pg_impl(z, rng); }
double sample_pg(double z, SplitMix64& rng) { return sample_pg_impl(z, rng); }

double pg_mean(double z) {
    z = std::abs(z);
    if (z < 1e-6) return 0.25 - z * z / 48.0;
    return std::tanh(0.5 * z) / (2.0 * z);
}

double pg_variance(double z) {
    z = std::abs(z);
    if (z < 1e-3) return 1.0 / 24.0 - z * z / 120.0;
    const double sech = 1.0 / std::cosh(0.5 * z);
    return (2.0 * std::tanh(0.5 * z) - z * sech * sech) / (4.0 * z * z * z);
}

} // namespace sboost
