#pragma once

#include "sboost/dataset.hpp"
#include "sboost/genome.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sboost {

struct GenotypeTable {
    Dataset data;
    std::size_t imputed = 0; ///< missing genotypes replaced by the rounded column mean
};

/// Tab-separated table: header `#pheno` followed by one `id:chrom:pos` per SNP,
/// then one row per individual (phenotype, then dosages 0/1/2 or `.`).
GenotypeTable parse_genotypes(const std::string& text, const std::string& source = "<input>");
GenotypeTable load_genotypes(const std::filesystem::path& path);
std::string format_genotypes(const Dataset& data);

/// Whitespace-separated `chrom start end id` lines; `#` starts a comment.
std::vector<Gene> parse_genes(const std::string& text, const std::string& source = "<input>");
std::vector<Gene> load_genes(const std::filesystem::path& path);
std::string format_genes(std::span<const Gene> genes);

/// `gene-id score` lines aligned to `genes`; genes without a line get 1.
/// Ids absent from `genes` are ignored.
RelevanceVector parse_relevances(const std::string& text, std::span<const Gene> genes,
                                 const std::string& source = "<input>");
RelevanceVector load_relevances(const std::filesystem::path& path, std::span<const Gene> genes);

} // namespace sboost
