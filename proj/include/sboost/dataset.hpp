#pragma once

#include "sboost/genome.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sboost {

/// Phenotypes plus a design matrix whose column 0 is the intercept and whose
/// columns 1..p hold minor-allele dosages, with one SnpLocus per marker column.
struct Dataset {
    Eigen::VectorXd y;           ///< n entries in {0,1}
    Eigen::MatrixXd X;           ///< n x (p+1)
    std::vector<SnpLocus> snps;  ///< p entries aligned to X.col(1..p)

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols() - 1; }
    auto markers() const { return X.rightCols(X.cols() - 1); }

    /// Dataset keeping only the listed marker indices (0-based among markers).
    Dataset select_markers(std::span<const std::size_t> keep) const;
};

/// Builds a dataset from an n x p dosage matrix, prepending the intercept column.
Dataset make_dataset(Eigen::VectorXd y, const Eigen::MatrixXd& markers, std::vector<SnpLocus> snps);

/// Checks the intercept column, dosage range, phenotype coding and metadata length.
void validate_dataset(const Dataset& data);

} // namespace sboost
