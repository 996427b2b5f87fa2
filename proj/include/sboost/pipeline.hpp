#pragma once

#include "sboost/config.hpp"
#include "sboost/dataset.hpp"
#include "sboost/em.hpp"
#include "sboost/genome.hpp"
#include "sboost/inference.hpp"
#include "sboost/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sboost {

struct Inputs {
    GenotypeTable genotypes;
    std::vector<Gene> genes;
    RelevanceVector relevances;
};

Inputs load_inputs(const RunConfig& config);

struct Preprocessed {
    Dataset data;                  ///< markers passing both filters
    std::vector<std::size_t> kept; ///< indices into the loaded markers
    std::string table;             ///< per-marker snp, maf, hwe_p, kept
};

/// MAF filter followed by the Hardy-Weinberg filter.
Preprocessed preprocess(const Dataset& data, double maf_min, double hwe_alpha);

struct BoostStage {
    BoostVector boosts;
    RegionPartition partition; ///< empty when phi is fixed
    std::string table;         ///< snp, chrom, pos, region, phi, boost
};

BoostStage boost_stage(const Dataset& data, const std::vector<Gene>& genes, const RelevanceVector& relevances,
                       const RunConfig& config);

struct PipelineResult {
    std::filesystem::path out_dir;
    std::vector<std::string> artifacts; ///< file names written, in order
    std::size_t markers_loaded = 0;
    std::size_t markers_filtered = 0;   ///< after MAF and HWE
    std::vector<std::string> survivors;
    SelectionReport report;
};

/// load -> filters -> boosts -> EM filtering -> Gibbs -> centroid report, persisting
/// every stage plus a manifest. On failure a FAILED file names the stage and cause.
PipelineResult run_pipeline(const RunConfig& config);

} // namespace sboost
