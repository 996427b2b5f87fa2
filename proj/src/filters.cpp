#include "sboost/filters.hpp"

#include "sboost/error.hpp"
#include "sboost/stats.hpp"

#include <algorithm>
#include <array>

namespace sboost {

namespace {

template <class Keep>
FilterResult filter_markers(const Dataset& data, Keep keep) {
    FilterResult out;
    for (Eigen::Index j = 1; j <= data.p(); ++j)
        (keep(data.X.col(j)) ? out.kept : out.removed).push_back(static_cast<std::size_t>(j - 1));
    out.data = data.select_markers(out.kept);
    return out;
}

} // namespace

double minor_allele_frequency(const Eigen::VectorXd& dosages) {
    if (dosages.size() == 0) return 0.0;
    const double f = dosages.sum() / (2.0 * static_cast<double>(dosages.size()));
    return std::min(f, 1.0 - f);
}

FilterResult maf_filter(const Dataset& data, double min_maf) {
    if (!(min_maf >= 0.0 && min_maf < 0.5)) throw ConfigError("maf_filter: min_maf must lie in [0, 0.5)");
    return filter_markers(data, [&](const auto& col) { return minor_allele_frequency(col) > min_maf; });
}

double hwe_chi_square(const Eigen::VectorXd& dosages) {
    std::array<double, 3> counts{};
    for (Eigen::Index i = 0; i < dosages.size(); ++i) counts[static_cast<std::size_t>(dosages[i])] += 1.0;
    const double n = static_cast<double>(dosages.size());
    if (n == 0.0) return 0.0;
    const double p = (counts[1] + 2.0 * counts[2]) / (2.0 * n), q = 1.0 - p;
    const std::array<double, 3> expected{q * q * n, 2.0 * p * q * n, p * p * n};
    double chi2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
        if (expected[k] > 0.0) chi2 += (counts[k] - expected[k]) * (counts[k] - expected[k]) / expected[k];
    return chi2;
}

double hwe_pvalue(const Eigen::VectorXd& dosages) { return chi_square1_upper(hwe_chi_square(dosages)); }

FilterResult hwe_filter(const Dataset& data, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("hwe_filter: alpha must lie in [0,1)");
    return filter_markers(data, [&](const auto& col) { return !(hwe_pvalue(col) < alpha); });
}

} // namespace sboost
