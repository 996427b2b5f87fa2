#pragma once

#include "sboost/dataset.hpp"
#include "sboost/em.hpp"
#include "sboost/genome.hpp"
#include "sboost/mcmc.hpp"
#include "sboost/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sboost {

struct SyntheticGenomeOptions {
    Eigen::Index n = 100;
    Eigen::Index p = 200;
    double maf_min = 0.05;
    double maf_max = 0.5;
    double ld_rho = 0.5;          ///< AR(1) correlation of the latent haplotype scores of adjacent SNPs
    BasePair mean_spacing = 3000; ///< expected distance between adjacent SNPs
    double genes_per_snp = 0.05;
    BasePair gene_min_length = 5000;
    BasePair gene_max_length = 60000;
    std::string chromosome = "1";
};

struct SyntheticGenome {
    Eigen::MatrixXd markers; ///< n x p dosages
    std::vector<SnpLocus> snps;
    std::vector<Gene> genes;
    RelevanceVector relevances; ///< all 1
};

/// Positions with exponential gaps, genes at uniform positions, and dosages that are
/// Binomial(2, maf) per SNP with LD induced through a Gaussian copula.
SyntheticGenome synthetic_genome(const SyntheticGenomeOptions& options, Rng& rng);

struct SimulatedDataset {
    Dataset data;
    Eigen::VectorXd theta; ///< p true indicators (markers only)
    Eigen::VectorXd beta;  ///< p+1 true coefficients, intercept first
    double sigma2 = 0.0;
    Hyperparameters hyper;
    std::uint64_t seed = 0;
};

/// Draws theta, beta and y from the generative hierarchy given genotypes and boosts.
SimulatedDataset simulate(const Eigen::MatrixXd& markers, std::vector<SnpLocus> snps, const Eigen::VectorXd& boosts,
                          const Hyperparameters& hyper, double sigma2_true, Rng& rng);

enum class TestStatus { Ok, Constant, NonConverged };

std::string to_string(TestStatus status);

struct SingleSnpResult {
    TestStatus status = TestStatus::Ok;
    double estimate = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    std::optional<double> pvalue; ///< missing for constant columns
};

struct SingleSnpReport {
    std::vector<SingleSnpResult> results;
    double alpha = 0.05;
    double bonferroni = 0.0; ///< alpha / p

    /// -log10 p per marker; non-converged fits rank first, constant columns last.
    Eigen::VectorXd scores() const;
};

/// Per-marker logistic regression on (intercept, marker) with a Wald test.
SingleSnpReport single_snp_tests(const Dataset& data, double alpha = 0.05);

struct RocCurve {
    std::vector<std::pair<double, double>> points; ///< (fpr, tpr), from (0,0) to (1,1)
    double auc = 0.0;

    /// Largest TPR among points with FPR <= max_fpr.
    double tpr_at(double max_fpr) const;
};

/// Mann-Whitney AUC with ties counted as one half; the curve sweeps the distinct scores.
RocCurve roc_auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& truth);

std::string roc_tsv(const RocCurve& curve);

struct StudyConfig {
    int datasets = 10;
    std::vector<std::uint64_t> seeds; ///< one per dataset
    SyntheticGenomeOptions genome;
    Hyperparameters truth;            ///< generating hyperparameters (phi sets the boosts)
    double sigma2 = 0.01;
    Hyperparameters fit = default_fit(); ///< hyperparameters of the fitted model
    FilterConfig filter = default_filter();
    bool use_gibbs = true;            ///< rank by pi_hat from a chain on the survivors
    GibbsOptions gibbs = default_gibbs();
    int threads = 1;                  ///< datasets run concurrently

    /// Generating kappa, xi0, xi1 and phi with an IG(1000, 10) prior that pins sigma^2 near 0.01.
    static Hyperparameters default_fit();
    /// Desk-scale designs are small enough to keep at full rank.
    static FilterConfig default_filter();
    static GibbsOptions default_gibbs();
};

struct StudyRow {
    std::string dataset;
    std::uint64_t seed = 0;
    std::optional<double> auc_sb;
    std::optional<double> auc_ss;
    std::optional<double> tpr_sb; ///< TPR at FPR <= 0.1
    std::optional<double> tpr_ss;
    std::size_t causal = 0;
    double runtime = 0.0;         ///< seconds
    std::string error;            ///< empty on success
    RocCurve roc_sb;
    RocCurve roc_ss;
};

struct StudySummary {
    std::vector<StudyRow> rows;
    StudyRow median; ///< medians over successful rows
};

/// Simulates, fits both methods and scores them per dataset.
StudySummary study_harness(const StudyConfig& config);

/// dataset, seed, auc_sb, auc_ss, tpr_sb, tpr_ss, causal, runtime, error; median row last.
std::string study_tsv(const StudySummary& summary, bool with_runtime = true);

} // namespace sboost
