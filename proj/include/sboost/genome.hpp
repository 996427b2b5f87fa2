#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sboost {

using BasePair = std::int64_t;

struct SnpLocus {
    std::string id;
    std::string chromosome;
    BasePair position = 0;
};

struct Gene {
    std::string id;
    std::string chromosome;
    BasePair start = 0; ///< g_l
    BasePair end = 0;   ///< g_r, strictly greater than start
};

/// Per-gene relevance scores, aligned with a gene list.
using RelevanceVector = std::vector<double>;

/// A maximal stretch of the genome covered by one fixed set of genes.
struct GenomicBlock {
    std::string chromosome;
    BasePair start = 0;
    BasePair end = 0;
    double relevance = 0.0; ///< mean relevance of the covering genes
};

/// Normalized per-SNP gene boost w_j(phi)^T r.
struct BoostVector {
    Eigen::VectorXd values;  ///< one entry per marker, max 1 unless all_zero
    double phi = 0.0;        ///< range used; the mean of region fits when per_region
    bool per_region = false; ///< each SNP used the phi of its own region
    bool all_zero = false;   ///< no gene contributed anywhere; values left at 0
    double raw_max = 0.0;    ///< normalizing constant that was divided out

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }

    /// Boosts restricted to `keep` (indices into this vector), not re-normalized.
    BoostVector subset(std::span<const std::size_t> keep) const;
};

struct Region {
    std::size_t begin = 0; ///< first SNP index
    std::size_t end = 0;   ///< one past the last SNP index
    double phi = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const { return end - begin; }
    bool fitted() const { return !std::isnan(phi); }
};

struct RegionPartition {
    std::vector<Region> regions;

    /// Region index owning each SNP.
    std::vector<std::size_t> owner(std::size_t snp_count) const;
    /// Mean of the fitted per-region phi values.
    double mean_phi() const;
};

/// Throws ConfigError unless ids are unique and positions strictly increase
/// within each chromosome in stored order.
void validate_snps(std::span<const SnpLocus> snps);
void validate_genes(std::span<const Gene> genes);
void validate_relevances(const RelevanceVector& relevances, std::size_t gene_count);

/// Splits the union of gene intervals into disjoint blocks at every gene endpoint.
/// Output is grouped by chromosome (in first-appearance order) and sorted by start.
std::vector<GenomicBlock> build_blocks(std::span<const Gene> genes,
                                       const RelevanceVector& relevances);

/// Mass of a N(position, phi^2) density over [block.start, block.end].
double gene_weight(double position, const GenomicBlock& block, double phi);

/// Raw per-SNP boosts sum_b weight * relevance, before normalization.
Eigen::VectorXd raw_boosts(std::span<const SnpLocus> snps, std::span<const GenomicBlock> blocks,
                           std::span<const double> phi_per_snp);

BoostVector compute_boosts(std::span<const SnpLocus> snps, std::span<const GenomicBlock> blocks,
                           double phi);

/// Boosts where each SNP uses the fitted phi of its region.
BoostVector compute_boosts(std::span<const SnpLocus> snps, std::span<const GenomicBlock> blocks,
                           const RegionPartition& partition);

/// Consecutive SNPs at least `gap` apart (or on different chromosomes) start a
/// new region; regions touching a common gene are then merged.
RegionPartition partition_regions(std::span<const SnpLocus> snps, std::span<const Gene> genes,
                                  BasePair gap = 30000);

/// Correlation-magnitude model 2 Phi(-|d| / phi).
double correlation_magnitude(double distance, double phi);

struct PhiFitOptions {
    double grid_min = 1e2;
    double grid_max = 1e6;
    int grid_points = 50;
    bool refine = true;
    double default_phi = 1.5e4;
};

/// Fits phi to observed absolute correlations (symmetric k x k) at the given positions.
double fit_phi_from_correlations(const Eigen::MatrixXd& abs_corr, std::span<const double> positions,
                                 const PhiFitOptions& options = {});

/// Fits phi to the sample correlations of the columns of one region.
/// Constant columns are skipped; fewer than two usable columns yields the default.
double fit_phi(const Eigen::MatrixXd& columns, std::span<const double> positions,
               const PhiFitOptions& options = {});

/// Fits every region in place. `markers` is n x p (no intercept column).
void fit_regions(RegionPartition& partition, const Eigen::MatrixXd& markers,
                 std::span<const SnpLocus> snps, const PhiFitOptions& options = {});

} // namespace sboost
