#pragma once

#include "helpers.hpp"

#include "sboost/config.hpp"
#include "sboost/io.hpp"
#include "sboost/tsv.hpp"

#include <filesystem>
#include <string>

namespace testing {

/// Writes genotypes, genes and relevances for a planted-signal run into `dir`
/// and returns a config pointing at them. rs6 carries the planted effect and
/// sits inside GENE1.
inline sboost::RunConfig planted_run(const std::filesystem::path& dir, std::uint64_t seed = 5) {
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    sboost::Rng rng(seed);
    const sboost::Dataset data = planted_dataset(300, 30, rng, {{5, 1.5}}, -1.0);
    sboost::write_file_atomic(dir / "genotypes.tsv", sboost::format_genotypes(data));
    sboost::write_file_atomic(dir / "genes.bed", "# chrom start end id\n1\t14000\t16500\tGENE1\n1\t30000\t31000\tGENE2\n"
                                                 "2\t100\t900\tGENE3\n");
    sboost::write_file_atomic(dir / "relevance.tsv", "GENE1\t2\nGENE2\t0.5\n");

    sboost::RunConfig c;
    c.genotypes = (dir / "genotypes.tsv").string();
    c.genes = (dir / "genes.bed").string();
    c.relevances = (dir / "relevance.tsv").string();
    c.out_dir = (dir / "out").string();
    c.seed = seed;
    c.phi_mode = "fixed";
    c.phi = 2000;
    c.gibbs_iters = 1500;
    c.filter.max_rounds = 3;
    c.filter.min_snps = 8;
    return c;
}

} // namespace testing
