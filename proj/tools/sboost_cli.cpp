#include "sboost/config.hpp"
#include "sboost/error.hpp"
#include "sboost/filters.hpp"
#include "sboost/inference.hpp"
#include "sboost/io.hpp"
#include "sboost/mcmc.hpp"
#include "sboost/pipeline.hpp"
#include "sboost/sim.hpp"
#include "sboost/tsv.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace sboost;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config_path;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags; ///< config keys given as --key value
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

RunConfig resolve(const Globals& g) {
    RunConfig c = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    for (const auto& [key, value] : g.flags) set_config_value(c, key, value);
    for (const auto& s : g.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        const std::string_view view(s);
        set_config_value(c, std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1))));
    }
    if (g.seed) c.seed = *g.seed;
    if (!g.out_dir.empty()) c.out_dir = g.out_dir;
    return c;
}

void emit(const RunConfig& c, const std::string& name, const std::string& contents) {
    fs::create_directories(c.out_dir);
    write_file_atomic(fs::path(c.out_dir) / name, contents);
    std::cout << "wrote " << (fs::path(c.out_dir) / name).string() << '\n';
}

// Loaded inputs after the MAF and HWE filters.
struct Prepared {
    Inputs in;
    Preprocessed pre;
};

Prepared prepare(const RunConfig& c) {
    c.validate(true);
    Prepared p{load_inputs(c), {}};
    p.pre = preprocess(p.in.genotypes.data, c.maf_min, c.hwe_alpha);
    std::cout << "markers loaded " << p.in.genotypes.data.p() << ", imputed genotypes " << p.in.genotypes.imputed
              << ", after filters " << p.pre.data.p() << '\n';
    if (p.pre.data.p() < 1) throw DomainError("no markers left after the MAF and HWE filters");
    return p;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = std::string(trim(item));
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw ConfigError("'" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

void cmd_filter(const RunConfig& c) {
    const Prepared p = prepare(c);
    emit(c, "filter.tsv", p.pre.table);
    emit(c, "genotypes.filtered.tsv", format_genotypes(p.pre.data));
}

void cmd_fit_phi(const RunConfig& c) {
    const Prepared p = prepare(c);
    const Dataset& d = p.pre.data;
    RegionPartition part = partition_regions(d.snps, p.in.genes, c.region_gap);
    PhiFitOptions o;
    o.default_phi = c.phi;
    fit_regions(part, d.markers(), d.snps, o);
    std::ostringstream t;
    t << "region\tchrom\tfirst_snp\tlast_snp\tsnps\tphi\n";
    for (std::size_t r = 0; r < part.regions.size(); ++r) {
        const auto& reg = part.regions[r];
        t << r + 1 << '\t' << d.snps[reg.begin].chromosome << '\t' << d.snps[reg.begin].id << '\t'
          << d.snps[reg.end - 1].id << '\t' << reg.size() << '\t' << format_real(reg.phi) << '\n';
    }
    t << "# mean_phi=" << format_real(part.mean_phi()) << '\n';
    emit(c, "phi.tsv", t.str());
}

void cmd_boosts(const RunConfig& c) {
    const Prepared p = prepare(c);
    emit(c, "boosts.tsv", boost_stage(p.pre.data, p.in.genes, p.in.relevances, c).table);
}

struct Filtered {
    Prepared prep;
    BoostStage boost;
    FilterTrace trace;
    Dataset survivors;
    BoostVector survivor_boosts;
};

Filtered em_stage(const RunConfig& c) {
    Filtered f{prepare(c), {}, {}, {}, {}};
    f.boost = boost_stage(f.prep.pre.data, f.prep.in.genes, f.prep.in.relevances, c);
    f.trace = em_filter_pipeline(f.prep.pre.data, f.boost.boosts, c.em, c.filter);
    f.survivors = f.prep.pre.data.select_markers(f.trace.survivors);
    f.survivor_boosts = f.boost.boosts.subset(f.trace.survivors);
    if (!f.trace.survivor_state)
        f.trace.survivor_state = em_fit(f.survivors, f.survivor_boosts.values, c.em, c.filter.em);
    std::cout << "filter rounds " << f.trace.rounds.size() << " (" << to_string(f.trace.reason) << "), survivors "
              << f.survivors.p() << '\n';
    return f;
}

void cmd_em_filter(const RunConfig& c) {
    const Filtered f = em_stage(c);
    emit(c, "em_trace.tsv", filter_trace_tsv(f.trace, f.prep.pre.data, c.filter.top_k));
    std::ostringstream t;
    t << "snp\tetheta\tbeta\n";
    for (Eigen::Index j = 1; j <= f.survivors.p(); ++j)
        t << f.survivors.snps[static_cast<std::size_t>(j - 1)].id << '\t'
          << format_real(f.trace.survivor_state->etheta[j]) << '\t' << format_real(f.trace.survivor_state->beta[j])
          << '\n';
    emit(c, "em_survivors.tsv", t.str());
}

void cmd_gibbs(const RunConfig& c) {
    if (c.gibbs_iters < 1) throw ConfigError("gibbs.iters must be positive for the gibbs command");
    const Filtered f = em_stage(c);
    const GibbsResult chain = gibbs_run(f.survivors, f.survivor_boosts.values, c.gibbs, c.gibbs_options());
    std::ostringstream t;
    t << "snp\tpi_hat\n";
    for (Eigen::Index j = 1; j <= f.survivors.p(); ++j)
        t << f.survivors.snps[static_cast<std::size_t>(j - 1)].id << '\t' << format_real(chain.summary.pi_hat[j])
          << '\n';
    t << "# retained=" << chain.summary.retained << " burnin=" << chain.summary.burnin
      << " rank=" << chain.summary.rank << " frobenius_mse=" << format_real(chain.summary.frobenius_mse) << '\n';
    emit(c, "gibbs.tsv", t.str());
    if (c.record_draws) emit(c, "draws.tsv", draws_tsv(chain.draws));
}

void cmd_report(const RunConfig& c, const std::string& input, const std::string& metric) {
    std::vector<std::string> ids;
    std::vector<double> prob;
    std::stringstream in(read_file(input));
    std::string line;
    bool header = true;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        const auto f = split_tabs(line);
        if (f.size() < 2) throw ParseError(input, ln, "expected snp and probability columns");
        ids.push_back(f[0]);
        prob.push_back(std::stod(f[1]));
    }
    const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(prob.data(), static_cast<Eigen::Index>(prob.size()));
    const SelectionReport r = make_selection_report(std::move(ids), p, c.report_gamma, metric);
    emit(c, "selection.tsv", selection_report_tsv(r));
}

void cmd_kappa_scan(const RunConfig& c, const std::string& kappas) {
    const Prepared p = prepare(c);
    const BoostStage b = boost_stage(p.pre.data, p.in.genes, p.in.relevances, c);
    const auto gammas = c.gammas.empty() ? default_gamma_grid() : c.gammas;
    const auto rows = kappa_scan(p.pre.data, b.boosts.values, c.em, parse_list(kappas), gammas, c.filter.em);
    emit(c, "kappa_scan.tsv", kappa_scan_tsv(rows));
}

struct SimulateArgs {
    int n = 100;
    int p = 200;
    double sigma2 = 0.01;
    double ld_rho = 0.5;
};

void cmd_simulate(const RunConfig& c, const SimulateArgs& a) {
    Rng rng(derive_seed(c.seed, "sim"));
    SyntheticGenomeOptions o;
    o.n = a.n;
    o.p = a.p;
    o.ld_rho = a.ld_rho;
    SyntheticGenome g = synthetic_genome(o, rng);
    const BoostVector boosts = compute_boosts(g.snps, build_blocks(g.genes, g.relevances), c.em.phi);
    const SimulatedDataset sim = simulate(g.markers, g.snps, boosts.values, c.em, a.sigma2, rng);

    emit(c, "genotypes.tsv", format_genotypes(sim.data));
    emit(c, "genes.bed", format_genes(g.genes));
    std::ostringstream rel, truth;
    for (std::size_t k = 0; k < g.genes.size(); ++k) rel << g.genes[k].id << '\t' << format_real(g.relevances[k]) << '\n';
    emit(c, "relevance.tsv", rel.str());
    truth << "snp\ttheta\tbeta\tboost\n";
    for (std::size_t j = 0; j < g.snps.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        truth << g.snps[j].id << '\t' << sim.theta[k] << '\t' << format_real(sim.beta[k + 1]) << '\t'
              << format_real(boosts.values[k]) << '\n';
    }
    truth << "# intercept=" << format_real(sim.beta[0]) << " sigma2=" << format_real(a.sigma2) << '\n';
    emit(c, "truth.tsv", truth.str());

    RunConfig next = c;
    const fs::path dir = fs::absolute(c.out_dir);
    next.genotypes = (dir / "genotypes.tsv").string();
    next.genes = (dir / "genes.bed").string();
    next.relevances = (dir / "relevance.tsv").string();
    next.out_dir = (dir / "run").string();
    emit(c, "run.conf", config_to_text(next));
}

struct StudyArgs {
    int datasets = 10;
    int n = 100;
    int p = 200;
    int threads = 1;
    int gibbs_iters = 5000;
    bool no_gibbs = false;
    double sigma2 = 0.01;
};

void cmd_study(const RunConfig& c, const StudyArgs& a) {
    StudyConfig s;
    s.datasets = a.datasets;
    for (int k = 0; k < a.datasets; ++k) s.seeds.push_back(c.seed + static_cast<std::uint64_t>(k));
    s.genome.n = a.n;
    s.genome.p = a.p;
    s.sigma2 = a.sigma2;
    s.truth = c.em;
    s.threads = a.threads;
    s.use_gibbs = !a.no_gibbs;
    s.gibbs.iters = a.gibbs_iters;
    const StudySummary summary = study_harness(s);
    const std::string table = study_tsv(summary);
    emit(c, "study.tsv", table);
    std::cout << table;
}

void cmd_run(const RunConfig& c) {
    const PipelineResult r = run_pipeline(c);
    std::cout << "markers loaded " << r.markers_loaded << ", after filters " << r.markers_filtered << ", survivors "
              << r.survivors.size() << '\n';
    std::size_t selected = 0;
    for (bool s : r.report.selected) selected += s ? 1 : 0;
    std::cout << "selected " << selected << " at gamma " << format_real(r.report.gamma) << '\n';
    for (const auto& a : r.artifacts) std::cout << "wrote " << (r.out_dir / a).string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial Boost GWAS toolkit"};
    app.set_version_flag("--version", SBOOST_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", g.sets, "override one configuration key (key=value), repeatable");
    app.add_option("--seed", g.seed, "root seed");
    app.add_option("--out-dir", g.out_dir, "output directory");
    auto* keys = app.add_option_group("Configuration keys");
    for (const auto& key : config_keys()) {
        if (key == "seed" || key == "out_dir") continue;
        keys->add_option_function<std::string>(
            "--" + key, [&g, key](const std::string& v) { g.flags[key] = v; }, "configuration key " + key);
    }

    auto* filter = app.add_subcommand("filter", "MAF and Hardy-Weinberg filtering");
    auto* fit_phi = app.add_subcommand("fit-phi", "fit the gene-weight range per region");
    auto* boosts = app.add_subcommand("boosts", "gene boosts per SNP");
    auto* em_filter = app.add_subcommand("em-filter", "iterative EM filtering");
    auto* gibbs = app.add_subcommand("gibbs", "EM filtering followed by the Gibbs sampler");

    auto* report = app.add_subcommand("report", "centroid selection from a probability table");
    std::string report_input, report_metric = "bfdr";
    report->add_option("input", report_input, "TSV with snp and probability columns")->required()->check(CLI::ExistingFile);
    report->add_option("--metric", report_metric, "label of the false discovery estimate");

    auto* kscan = app.add_subcommand("kappa-scan", "EMBFDR curves over a grid of kappa values");
    std::string kappas = "10,100,1000,10000";
    kscan->add_option("--kappas", kappas, "comma-separated kappa grid");

    auto* simulate = app.add_subcommand("simulate", "write a synthetic dataset drawn from the model");
    SimulateArgs sa;
    simulate->add_option("--n", sa.n, "individuals");
    simulate->add_option("--p", sa.p, "markers");
    simulate->add_option("--sigma2", sa.sigma2, "spike variance");
    simulate->add_option("--ld-rho", sa.ld_rho, "adjacent-SNP latent correlation");

    auto* study = app.add_subcommand("study", "simulation study against single-SNP tests");
    StudyArgs st;
    study->add_option("--datasets", st.datasets, "number of datasets");
    study->add_option("--n", st.n, "individuals");
    study->add_option("--p", st.p, "markers");
    study->add_option("--sigma2", st.sigma2, "spike variance");
    study->add_option("--threads", st.threads, "datasets run concurrently");
    study->add_option("--gibbs-iters", st.gibbs_iters, "iterations of the chain on the survivors");
    study->add_flag("--no-gibbs", st.no_gibbs, "rank by the EM filter alone");

    auto* run = app.add_subcommand("run", "full pipeline with every artifact and a manifest");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig c = resolve(g);
        if (*filter) cmd_filter(c);
        else if (*fit_phi) cmd_fit_phi(c);
        else if (*boosts) cmd_boosts(c);
        else if (*em_filter) cmd_em_filter(c);
        else if (*gibbs) cmd_gibbs(c);
        else if (*report) cmd_report(c, report_input, report_metric);
        else if (*kscan) cmd_kappa_scan(c, kappas);
        else if (*simulate) cmd_simulate(c, sa);
        else if (*study) cmd_study(c, st);
        else if (*run) cmd_run(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
