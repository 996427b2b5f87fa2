#pragma once

#include "sboost/dataset.hpp"
#include "sboost/rng.hpp"
#include "sboost/stats.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace testing {

inline std::vector<sboost::SnpLocus> spaced_loci(Eigen::Index p, sboost::BasePair spacing = 1000) {
    std::vector<sboost::SnpLocus> out;
    for (Eigen::Index j = 0; j < p; ++j)
        out.push_back({"rs" + std::to_string(j + 1), "1", 10000 + spacing * static_cast<sboost::BasePair>(j)});
    return out;
}

inline Eigen::MatrixXd random_dosages(Eigen::Index n, Eigen::Index p, sboost::Rng& rng, double maf = 0.3) {
    std::binomial_distribution<int> dose(2, maf);
    Eigen::MatrixXd m(n, p);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dose(rng);
    return m;
}

/// Logistic data with the listed planted effects (marker index, coefficient).
inline sboost::Dataset planted_dataset(Eigen::Index n, Eigen::Index p, sboost::Rng& rng,
                                       const std::vector<std::pair<Eigen::Index, double>>& effects,
                                       double intercept = 0.0) {
    const Eigen::MatrixXd m = random_dosages(n, p, rng);
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, intercept);
    for (auto [j, b] : effects) eta += b * m.col(j);
    Eigen::VectorXd y(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = u(rng) < sboost::inv_logit(eta[i]) ? 1.0 : 0.0;
    return sboost::make_dataset(y, m, spaced_loci(p));
}

} // namespace testing

#include <algorithm>
#include <cmath>
#include <functional>

namespace testing {

/// Asymptotic Kolmogorov tail P(K > lambda) with the Stephens small-sample correction applied by callers.
inline double kolmogorov_tail(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

inline double ks_pvalue(double d, double effective_n) {
    const double root = std::sqrt(effective_n);
    return kolmogorov_tail((root + 0.12 + 0.11 / root) * d);
}

/// One-sample Kolmogorov-Smirnov p-value against a continuous CDF.
inline double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return ks_pvalue(d, n);
}

/// Two-sample Kolmogorov-Smirnov p-value.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return ks_pvalue(d, na * nb / (na + nb));
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

/// PG(1, z) by a truncated sum of gammas: (1 / 2 pi^2) sum_k g_k / ((k - 1/2)^2 + z^2 / (4 pi^2)).
inline double pg_sum_of_gammas(double z, sboost::Rng& rng, int terms = 200) {
    std::exponential_distribution<double> g(1.0);
    const double pi2 = M_PI * M_PI;
    double acc = 0.0;
    for (int k = 1; k <= terms; ++k) acc += g(rng) / ((k - 0.5) * (k - 0.5) + z * z / (4.0 * pi2));
    return acc / (2.0 * pi2);
}

} // namespace testing
