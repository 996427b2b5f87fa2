#include "sboost/pipeline.hpp"

#include "sboost/error.hpp"
#include "sboost/filters.hpp"
#include "sboost/mcmc.hpp"
#include "sboost/tsv.hpp"

#include <sstream>

#ifndef SBOOST_VERSION
#define SBOOST_VERSION "unknown"
#endif

namespace sboost {

Inputs load_inputs(const RunConfig& config) {
    Inputs in;
    in.genotypes = load_genotypes(config.genotypes);
    if (!config.genes.empty()) in.genes = load_genes(config.genes);
    in.relevances = config.relevances.empty() ? RelevanceVector(in.genes.size(), 1.0)
                                              : load_relevances(config.relevances, in.genes);
    return in;
}

Preprocessed preprocess(const Dataset& data, double maf_min, double hwe_alpha) {
    const FilterResult by_maf = maf_filter(data, maf_min);
    const FilterResult by_hwe = hwe_filter(by_maf.data, hwe_alpha);
    Preprocessed out;
    for (std::size_t k : by_hwe.kept) out.kept.push_back(by_maf.kept[k]);
    out.data = by_hwe.data;

    std::vector<bool> kept(static_cast<std::size_t>(data.p()), false);
    for (std::size_t k : out.kept) kept[k] = true;
    std::ostringstream t;
    t << "snp\tmaf\thwe_p\tkept\n";
    for (Eigen::Index j = 1; j <= data.p(); ++j) {
        const Eigen::VectorXd col = data.X.col(j);
        t << data.snps[static_cast<std::size_t>(j - 1)].id << '\t' << format_real(minor_allele_frequency(col)) << '\t'
          << format_real(hwe_pvalue(col)) << '\t' << (kept[static_cast<std::size_t>(j - 1)] ? 1 : 0) << '\n';
    }
    out.table = t.str();
    return out;
}

BoostStage boost_stage(const Dataset& data, const std::vector<Gene>& genes, const RelevanceVector& relevances,
                       const RunConfig& config) {
    BoostStage out;
    const auto blocks = build_blocks(genes, relevances);
    std::vector<double> phi_of(data.snps.size(), config.phi);
    std::vector<std::size_t> region_of(data.snps.size(), 0);
    if (config.phi_mode == "fit") {
        out.partition = partition_regions(data.snps, genes, config.region_gap);
        PhiFitOptions options;
        options.default_phi = config.phi;
        fit_regions(out.partition, data.markers(), data.snps, options);
        out.boosts = compute_boosts(data.snps, blocks, out.partition);
        region_of = out.partition.owner(data.snps.size());
        for (std::size_t j = 0; j < data.snps.size(); ++j) phi_of[j] = out.partition.regions[region_of[j]].phi;
    } else {
        out.boosts = compute_boosts(data.snps, blocks, config.phi);
    }
    std::ostringstream t;
    t << "snp\tchrom\tpos\tregion\tphi\tboost\n";
    for (std::size_t j = 0; j < data.snps.size(); ++j)
        t << data.snps[j].id << '\t' << data.snps[j].chromosome << '\t' << data.snps[j].position << '\t'
          << region_of[j] + 1 << '\t' << format_real(phi_of[j]) << '\t'
          << format_real(out.boosts.values[static_cast<Eigen::Index>(j)]) << '\n';
    if (out.boosts.all_zero) t << "# all boosts are zero: no gene lies near any SNP\n";
    out.table = t.str();
    return out;
}

namespace {

class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& contents) {
        write_file_atomic(dir_ / name, contents);
        names_.push_back(name);
        sums_.push_back(checksum_hex(contents));
        sizes_.push_back(contents.size());
    }

    std::string listing() const {
        std::ostringstream out;
        for (std::size_t k = 0; k < names_.size(); ++k)
            out << names_[k] << '\t' << sizes_[k] << '\t' << sums_[k] << '\n';
        return out.str();
    }

    const std::vector<std::string>& names() const { return names_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> names_, sums_;
    std::vector<std::size_t> sizes_;
};

std::string etheta_tsv(const Dataset& data, const EmState& state) {
    std::ostringstream out;
    out << "snp\tetheta\tbeta\n";
    for (Eigen::Index j = 1; j <= data.p(); ++j)
        out << data.snps[static_cast<std::size_t>(j - 1)].id << '\t' << format_real(state.etheta[j]) << '\t'
            << format_real(state.beta[j]) << '\n';
    out << "# sigma2=" << format_real(state.sigma2) << " iterations=" << state.iterations
        << " converged=" << (state.converged ? 1 : 0) << '\n';
    return out.str();
}

} // namespace

PipelineResult run_pipeline(const RunConfig& config) {
    PipelineResult result;
    result.out_dir = config.out_dir;
    std::filesystem::create_directories(result.out_dir);
    std::filesystem::remove(result.out_dir / "FAILED");
    Artifacts files(result.out_dir);
    std::string stage = "config";

    try {
        config.validate(true);
        const std::string resolved = config_to_text(config);
        files.write("config.resolved", resolved);

        stage = "load";
        const Inputs in = load_inputs(config);
        result.markers_loaded = static_cast<std::size_t>(in.genotypes.data.p());

        stage = "filter";
        const Preprocessed pre = preprocess(in.genotypes.data, config.maf_min, config.hwe_alpha);
        files.write("filter.tsv", pre.table);
        const Dataset& data = pre.data;
        result.markers_filtered = static_cast<std::size_t>(data.p());
        if (data.p() < 1) throw DomainError("no markers left after the MAF and HWE filters");

        stage = "boosts";
        const BoostStage boost = boost_stage(data, in.genes, in.relevances, config);
        files.write("boosts.tsv", boost.table);

        stage = "em-filter";
        FilterTrace trace = em_filter_pipeline(data, boost.boosts, config.em, config.filter);
        files.write("em_trace.tsv", filter_trace_tsv(trace, data, config.filter.top_k));
        const Dataset survivors = data.select_markers(trace.survivors);
        const BoostVector survivor_boosts = boost.boosts.subset(trace.survivors);
        if (!trace.survivor_state)
            trace.survivor_state = em_fit(survivors, survivor_boosts.values, config.em, config.filter.em);
        files.write("em_survivors.tsv", etheta_tsv(survivors, *trace.survivor_state));
        for (const auto& s : survivors.snps) result.survivors.push_back(s.id);

        const Eigen::VectorXd etheta = trace.survivor_state->etheta.tail(survivors.p());
        const std::vector<double> gammas = config.gammas.empty() ? default_gamma_grid() : config.gammas;
        files.write("embfdr.tsv", embfdr_tsv(embfdr_curve(etheta, gammas)));

        stage = "gibbs";
        Eigen::VectorXd probability = etheta;
        std::string metric = "embfdr";
        double sigma2 = trace.survivor_state->sigma2;
        const GibbsOptions go = config.gibbs_options();
        if (config.gibbs_iters > 0) {
            const GibbsResult chain = gibbs_run(survivors, survivor_boosts.values, config.gibbs, go);
            if (config.record_draws) files.write("draws.tsv", draws_tsv(chain.draws));
            probability = chain.summary.pi_hat.tail(survivors.p());
            metric = "bfdr";
            std::ostringstream t;
            t << "snp\tpi_hat\n";
            for (Eigen::Index j = 0; j < survivors.p(); ++j)
                t << survivors.snps[static_cast<std::size_t>(j)].id << '\t' << format_real(probability[j]) << '\n';
            t << "# retained=" << chain.summary.retained << " burnin=" << chain.summary.burnin
              << " rank=" << chain.summary.rank << " frobenius_mse=" << format_real(chain.summary.frobenius_mse)
              << '\n';
            files.write("gibbs.tsv", t.str());
            if (!chain.draws.empty()) {
                double total = 0.0;
                for (const auto& d : chain.draws) total += d.sigma2;
                sigma2 = total / static_cast<double>(chain.draws.size());
            } else {
                sigma2 = chain.final_state.sigma2;
            }
        }

        stage = "report";
        std::vector<std::string> ids;
        for (const auto& s : survivors.snps) ids.push_back(s.id);
        result.report = make_selection_report(std::move(ids), probability, config.report_gamma, metric);
        const Hyperparameters& h = config.gibbs_iters > 0 ? config.gibbs : config.em;
        result.report.thresholds = beta_thresholds(sigma2, h, survivor_boosts.values, config.report_gamma);
        files.write("selection.tsv", selection_report_tsv(result.report));

        stage = "manifest";
        std::ostringstream m;
        m << "sboost " << SBOOST_VERSION << '\n'
          << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
          << "\n[seeds]\nroot = " << config.seed << "\ngibbs.chain0 = " << go.seed << '\n'
          << "\n[counts]\nmarkers_loaded = " << result.markers_loaded << "\nimputed = " << in.genotypes.imputed
          << "\nmarkers_filtered = " << result.markers_filtered << "\nsurvivors = " << survivors.p()
          << "\nfilter_rounds = " << trace.rounds.size() << "\nfilter_stop = " << to_string(trace.reason)
          << "\nboosts_all_zero = " << (boost.boosts.all_zero ? 1 : 0) << '\n'
          << "\n[config]\n" << resolved << "\n[artifacts]\n" << files.listing();
        files.write("manifest.txt", m.str());
    } catch (const std::exception& e) {
        try {
            write_file_atomic(result.out_dir / "FAILED", stage + ": " + e.what() + '\n');
        } catch (...) {
        }
        throw Error("stage " + stage + " failed: " + e.what());
    }
    result.artifacts = files.names();
    return result;
}

} // namespace sboost
