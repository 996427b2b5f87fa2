#include "sboost/dataset.hpp"

#include "sboost/error.hpp"

namespace sboost {

Dataset Dataset::select_markers(std::span<const std::size_t> keep) const {
    Dataset out;
    out.y = y;
    out.X.resize(n(), static_cast<Eigen::Index>(keep.size()) + 1);
    out.X.col(0) = X.col(0);
    out.snps.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        if (keep[k] >= static_cast<std::size_t>(p()))
            throw DomainError("select_markers: marker index out of range");
        out.X.col(static_cast<Eigen::Index>(k) + 1) = X.col(static_cast<Eigen::Index>(keep[k]) + 1);
        if (!snps.empty()) out.snps.push_back(snps[keep[k]]);
    }
    return out;
}

Dataset make_dataset(Eigen::VectorXd y, const Eigen::MatrixXd& markers, std::vector<SnpLocus> snps) {
    if (y.size() != markers.rows()) throw ConfigError("make_dataset: phenotype and genotype row counts differ");
    Dataset out;
    out.y = std::move(y);
    out.X.resize(markers.rows(), markers.cols() + 1);
    out.X.col(0).setOnes();
    out.X.rightCols(markers.cols()) = markers;
    out.snps = std::move(snps);
    validate_dataset(out);
    return out;
}

void validate_dataset(const Dataset& data) {
    if (data.X.cols() < 1 || data.y.size() != data.X.rows())
        throw ConfigError("dataset: phenotype length does not match design rows");
    if ((data.X.col(0).array() != 1.0).any()) throw ConfigError("dataset: column 0 must be the intercept");
    for (Eigen::Index i = 0; i < data.y.size(); ++i)
        if (data.y[i] != 0.0 && data.y[i] != 1.0) throw ConfigError("dataset: phenotypes must be 0 or 1");
    const auto m = data.markers();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double v = m(i, j);
            if (v != 0.0 && v != 1.0 && v != 2.0)
                throw ConfigError("dataset: genotype dosages must be 0, 1 or 2");
        }
    if (data.snps.size() != static_cast<std::size_t>(data.p()))
        throw ConfigError("dataset: SNP metadata length does not match marker count");
}

} // namespace sboost
