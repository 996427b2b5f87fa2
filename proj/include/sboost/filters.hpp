#pragma once

#include "sboost/dataset.hpp"
#include "sboost/em.hpp"

#include <Eigen/Dense>

namespace sboost {

/// min(f, 1 - f) with f = sum(x) / (2n).
double minor_allele_frequency(const Eigen::VectorXd& dosages);

/// Drops markers whose MAF <= min_maf.
FilterResult maf_filter(const Dataset& data, double min_maf = 0.05);

/// One-degree-of-freedom Hardy-Weinberg chi-square statistic of the genotype counts.
double hwe_chi_square(const Eigen::VectorXd& dosages);
double hwe_pvalue(const Eigen::VectorXd& dosages);

/// Drops markers whose Hardy-Weinberg p-value is below alpha.
FilterResult hwe_filter(const Dataset& data, double alpha = 1e-6);

} // namespace sboost
