#include "doctest.h"

#include "fixtures.hpp"

#include "sboost/error.hpp"
#include "sboost/filters.hpp"
#include "sboost/pipeline.hpp"
#include "sboost/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace sboost;

namespace {

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("sboost_test_" + name);
}

Dataset columns(const Eigen::MatrixXd& m) {
    return make_dataset(Eigen::VectorXd::Zero(m.rows()), m, testing::spaced_loci(m.cols()));
}

} // namespace

TEST_CASE("genotype parsing") {
    const auto t = parse_genotypes("#pheno\trs1:1:100\n1\t2\n0\t0\n");
    CHECK(t.data.X.rows() == 2);
    CHECK(t.data.X.cols() == 2);
    CHECK(t.data.X.col(0).isOnes());
    CHECK(t.data.X(0, 1) == 2.0);
    CHECK(t.data.y[0] == 1.0);
    CHECK(t.data.snps[0].id == "rs1");
    CHECK(t.data.snps[0].position == 100);
    CHECK(t.imputed == 0);

    // Ids may contain colons; chrom and position are split from the right.
    const auto named = parse_genotypes("#pheno\tchr1:555:A:G:1:555\n0\t1\n");
    CHECK(named.data.snps[0].id == "chr1:555:A:G");

    // Column mean of (2, 2, 1) is 5/3, which rounds to 2.
    const auto m = parse_genotypes("#pheno\ta:1:1\tb:1:2\n1\t2\t0\n0\t.\t1\n1\t2\t0\n0\t1\t.\n");
    CHECK(m.imputed == 2);
    CHECK(m.data.X(1, 1) == 2.0);
    CHECK(m.data.X(3, 2) == 0.0);

    try {
        parse_genotypes("#pheno\ta:1:1\tb:1:2\n1\t2\t0\n0\t1\n", "g.tsv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("g.tsv:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_genotypes("#pheno\ta:1:1\n2\t1\n"), ParseError);
    CHECK_THROWS_AS(parse_genotypes("#pheno\ta:1:1\n1\t3\n"), ParseError);
    CHECK_THROWS_AS(parse_genotypes("pheno\ta:1:1\n1\t1\n"), ParseError);
    CHECK_THROWS_AS(parse_genotypes("#pheno\ta:1\n1\t1\n"), ParseError);

    Rng rng(71);
    const Dataset d = testing::planted_dataset(12, 5, rng, {});
    const auto back = parse_genotypes(format_genotypes(d));
    CHECK(back.data.X == d.X);
    CHECK(back.data.y == d.y);
    for (std::size_t j = 0; j < d.snps.size(); ++j) {
        CHECK(back.data.snps[j].id == d.snps[j].id);
        CHECK(back.data.snps[j].position == d.snps[j].position);
    }
}

TEST_CASE("gene and relevance parsing") {
    const auto genes = parse_genes("# header\n1 100 200 A\n\n2\t50\t60\tB\n");
    REQUIRE(genes.size() == 2);
    CHECK(genes[1].chromosome == "2");
    CHECK(genes[1].end == 60);
    CHECK_THROWS_AS(parse_genes("1 200 200 A\n"), ParseError);
    CHECK_THROWS_AS(parse_genes("1 200 A\n"), ParseError);
    CHECK(parse_genes(format_genes(genes)).size() == 2);

    const auto r = parse_relevances("B 3.5\nZ 9\n", genes);
    CHECK(r == RelevanceVector{1.0, 3.5});
    CHECK(parse_relevances("", genes) == RelevanceVector{1.0, 1.0});
    CHECK_THROWS_AS(parse_relevances("A 1\nA 2\n", genes), ParseError);
    CHECK_THROWS_AS(parse_relevances("A -1\n", genes), ParseError);

    // A gene on a chromosome without SNPs is kept and adds nothing.
    const auto snps = testing::spaced_loci(3);
    const auto only_b = compute_boosts(snps, build_blocks(std::vector<Gene>{genes[1]}, {1.0}), 1000.0);
    CHECK(only_b.all_zero);
}

TEST_CASE("minor allele frequency filter") {
    Eigen::VectorXd c(4);
    c << 0, 1, 2, 2;
    CHECK(minor_allele_frequency(c) == 0.375);

    Eigen::MatrixXd m(4, 3);
    m << 0, 0, 2,
         1, 0, 2,
         2, 0, 2,
         2, 0, 1;
    const auto kept = maf_filter(columns(m), 0.05);
    CHECK(kept.kept == std::vector<std::size_t>{0, 2});
    CHECK(kept.data.snps[1].id == "rs3");
    CHECK(kept.data.X.col(2) == m.col(2));
    const auto boundary = maf_filter(columns(m), 0.0);
    CHECK(boundary.kept == std::vector<std::size_t>{0, 2});
    CHECK(maf_filter(columns(m), 0.125).kept == std::vector<std::size_t>{0});
}

TEST_CASE("Hardy-Weinberg filter") {
    const Eigen::VectorXd het = Eigen::VectorXd::Ones(100);
    CHECK(hwe_chi_square(het) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(hwe_pvalue(het) < 1e-20);

    // p = q = 1/2 with counts (25, 50, 25).
    Eigen::VectorXd eq(100);
    eq.head(25).setZero();
    eq.segment(25, 50).setOnes();
    eq.tail(25).setConstant(2);
    CHECK(std::abs(hwe_chi_square(eq)) < 1e-12);

    // Counts (10, 20, 70): q = 0.2, expected (4, 32, 64).
    Eigen::VectorXd skew(100);
    skew.head(10).setZero();
    skew.segment(10, 20).setOnes();
    skew.tail(70).setConstant(2);
    CHECK(hwe_chi_square(skew) == doctest::Approx(36.0 / 4 + 144.0 / 32 + 36.0 / 64).epsilon(1e-12));

    Eigen::MatrixXd m(100, 2);
    m.col(0) = het;
    m.col(1) = eq;
    CHECK(hwe_filter(columns(m), 1e-6).kept == std::vector<std::size_t>{1});
    CHECK(hwe_filter(columns(m), 0.0).kept == std::vector<std::size_t>{0, 1});
}

TEST_CASE("MAF and HWE filters commute") {
    Rng rng(72);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd m = testing::random_dosages(80, 25, rng, 0.25);
        std::uniform_int_distribution<int> col(0, 24);
        m.col(col(rng)).setOnes();
        m.col(col(rng)).setZero();
        m.col(col(rng)).head(78).setZero();
        const Dataset d = columns(m);
        const auto a = maf_filter(hwe_filter(d, 0.01).data, 0.05);
        const auto b = hwe_filter(maf_filter(d, 0.05).data, 0.01);
        std::vector<std::string> ia, ib;
        for (const auto& s : a.data.snps) ia.push_back(s.id);
        for (const auto& s : b.data.snps) ib.push_back(s.id);
        CHECK(ia == ib);
        const auto pre = preprocess(d, 0.05, 0.01);
        CHECK(pre.data.p() == static_cast<Eigen::Index>(ia.size()));
        for (std::size_t k = 0; k < pre.kept.size(); ++k)
            CHECK(pre.data.snps[k].id == d.snps[pre.kept[k]].id);
    }
}

TEST_CASE("config parsing and round trip") {
    RunConfig c = parse_config("# run\nem.kappa = 100\ngibbs.kappa=16\nfilter.min_snps = auto\n"
                               "report.gammas = 1, 2 ,4\nseed = 99\ngibbs.record_draws = false\n");
    CHECK(c.em.kappa == 100);
    CHECK(c.gibbs.kappa == 16);
    CHECK_FALSE(c.filter.min_snps.has_value());
    CHECK(c.gammas == std::vector<double>{1, 2, 4});
    CHECK(c.seed == 99);
    CHECK_FALSE(c.record_draws);

    set_config_value(c, "filter.min_snps", "12");
    set_config_value(c, "em.xi0", "-5.5");
    const std::string text = config_to_text(c);
    const RunConfig back = parse_config(text);
    CHECK(config_to_text(back) == text);
    CHECK(back.filter.min_snps == std::size_t{12});
    CHECK(back.em.xi0 == -5.5);

    const auto keys = config_keys();
    CHECK(std::find(keys.begin(), keys.end(), "gibbs.iters") != keys.end());
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(keys.size()));

    CHECK_THROWS_AS(set_config_value(c, "em.kapa", "1"), ConfigError);
    CHECK_THROWS_AS(parse_config("em.kappa 100\n"), ParseError);
    CHECK_THROWS_AS(parse_config("em.kappa = many\n"), ParseError);
    c.filter.fraction = 1.0;
    CHECK_THROWS_AS(c.validate(false), ConfigError);
    c.filter.fraction = 0.25;
    c.genotypes = "/nonexistent/genotypes.tsv";
    CHECK_THROWS_AS(c.validate(true), ConfigError);
    CHECK(c.gibbs_options().seed == derive_seed(c.seed, "gibbs.chain0"));
}

TEST_CASE("run_pipeline writes every stage and is deterministic") {
    const auto dir = scratch("pipeline");
    RunConfig c = testing::planted_run(dir);
    const auto r1 = run_pipeline(c);
    const std::vector<std::string> expected{"config.resolved", "filter.tsv",   "boosts.tsv", "em_trace.tsv",
                                            "em_survivors.tsv", "embfdr.tsv",  "draws.tsv",  "gibbs.tsv",
                                            "selection.tsv",    "manifest.txt"};
    CHECK(r1.artifacts == expected);
    for (const auto& a : expected) CHECK(std::filesystem::exists(dir / "out" / a));
    CHECK_FALSE(std::filesystem::exists(dir / "out" / "FAILED"));
    CHECK(r1.markers_loaded == 30);
    CHECK(std::find(r1.survivors.begin(), r1.survivors.end(), "rs6") != r1.survivors.end());
    std::size_t selected = 0;
    for (std::size_t k = 0; k < r1.report.ids.size(); ++k) {
        if (r1.report.ids[k] == "rs6") CHECK(r1.report.selected[k]);
        selected += r1.report.selected[k] ? 1 : 0;
    }
    CHECK(selected < 5);

    const std::string first = read_file(dir / "out" / "selection.tsv");
    const std::string manifest = read_file(dir / "out" / "manifest.txt");
    CHECK(manifest.find(checksum_hex(first)) != std::string::npos);
    const auto r2 = run_pipeline(c);
    CHECK(read_file(dir / "out" / "selection.tsv") == first);
    CHECK(read_file(dir / "out" / "manifest.txt") == manifest);

    // The resolved config reproduces the run.
    RunConfig again = load_config((dir / "out" / "config.resolved").string());
    again.out_dir = (dir / "again").string();
    run_pipeline(again);
    CHECK(read_file(dir / "again" / "selection.tsv") == first);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_pipeline with zero filter rounds samples every filtered marker") {
    const auto dir = scratch("bypass");
    RunConfig c = testing::planted_run(dir);
    c.filter.max_rounds = 0;
    c.gibbs_iters = 300;
    const auto r = run_pipeline(c);
    CHECK(r.survivors.size() == r.markers_filtered);
    CHECK(r.report.ids.size() == r.markers_filtered);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_pipeline without a sampler reports EM probabilities") {
    const auto dir = scratch("nogibbs");
    RunConfig c = testing::planted_run(dir);
    c.gibbs_iters = 0;
    const auto r = run_pipeline(c);
    CHECK(r.report.metric == "embfdr");
    CHECK(std::find(r.artifacts.begin(), r.artifacts.end(), "gibbs.tsv") == r.artifacts.end());
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_pipeline failure leaves a FAILED marker naming the stage") {
    const auto dir = scratch("failed");
    RunConfig c = testing::planted_run(dir);
    write_file_atomic(dir / "genotypes.tsv", "#pheno\trs1:1:100\n1\t2\n0\n");
    CHECK_THROWS_AS(run_pipeline(c), Error);
    const std::string marker = read_file(dir / "out" / "FAILED");
    CHECK(marker.rfind("load: ", 0) == 0);
    CHECK(marker.find("genotypes.tsv:3") != std::string::npos);

    // A later successful run clears the marker.
    testing::planted_run(dir);
    c.gibbs_iters = 0;
    run_pipeline(c);
    CHECK_FALSE(std::filesystem::exists(dir / "out" / "FAILED"));
    std::filesystem::remove_all(dir);
}
