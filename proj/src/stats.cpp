#include "sboost/stats.hpp"

#include "sboost/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

namespace sboost {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, p);
}

double log_normal_cdf(double x) {
    if (x > -20.0) return std::log(normal_cdf(x));
    // Asymptotic expansion of the Mills ratio.
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_interval_mass(double a, double b) {
    if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
    return normal_cdf(b) - normal_cdf(a);
}

double inv_logit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double log1p_exp(double x) {
    if (x > 35.0) return x;
    if (x < -35.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

Eigen::VectorXd inv_logit(const Eigen::VectorXd& x) {
    return x.unaryExpr([](double v) { return inv_logit(v); });
}

double two_sided_normal_pvalue(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

double chi_square1_upper(double x) {
    if (x <= 0.0) return 1.0;
    return std::erfc(std::sqrt(0.5 * x));
}

} // namespace sboost
