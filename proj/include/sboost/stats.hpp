#pragma once

#include <Eigen/Dense>

namespace sboost {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, p in (0,1).
double normal_quantile(double p);

/// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x);

/// Phi(b) - Phi(a) for a <= b, computed on whichever tail keeps precision.
double normal_interval_mass(double a, double b);

/// Overflow-safe logistic function; never returns NaN for finite input.
double inv_logit(double x);

double logit(double p);

/// log(1 + exp(x)) without overflow.
double log1p_exp(double x);

Eigen::VectorXd inv_logit(const Eigen::VectorXd& x);

/// Two-sided p-value of a standard normal statistic.
double two_sided_normal_pvalue(double z);

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi_square1_upper(double x);

} // namespace sboost
