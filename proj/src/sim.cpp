#include "sboost/sim.hpp"

#include "sboost/error.hpp"
#include "sboost/stats.hpp"
#include "sboost/tsv.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace sboost {

SyntheticGenome synthetic_genome(const SyntheticGenomeOptions& o, Rng& rng) {
    if (o.n < 1 || o.p < 1) throw ConfigError("synthetic genome: n and p must be positive");
    if (!(o.maf_min > 0.0 && o.maf_min <= o.maf_max && o.maf_max <= 0.5))
        throw ConfigError("synthetic genome: need 0 < maf_min <= maf_max <= 0.5");
    if (!(o.ld_rho >= 0.0 && o.ld_rho < 1.0)) throw ConfigError("synthetic genome: ld_rho must lie in [0,1)");
    if (o.mean_spacing < 1 || o.gene_min_length < 1 || o.gene_max_length < o.gene_min_length)
        throw ConfigError("synthetic genome: invalid spacing or gene lengths");

    SyntheticGenome g;
    const auto p = static_cast<std::size_t>(o.p);

    std::exponential_distribution<double> gap(1.0 / static_cast<double>(o.mean_spacing));
    BasePair pos = 1000000;
    g.snps.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
        if (j > 0) pos += 1 + static_cast<BasePair>(std::floor(gap(rng)));
        g.snps.push_back({"rs" + std::to_string(j + 1), o.chromosome, pos});
    }

    const auto gene_count = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(o.genes_per_snp * o.p)));
    const BasePair lo = g.snps.front().position - o.gene_max_length, hi = g.snps.back().position;
    std::uniform_int_distribution<BasePair> start(lo, hi), length(o.gene_min_length, o.gene_max_length);
    for (std::size_t k = 0; k < gene_count; ++k) {
        const BasePair s = start(rng);
        g.genes.push_back({"", o.chromosome, s, s + length(rng)});
    }
    std::sort(g.genes.begin(), g.genes.end(), [](const Gene& a, const Gene& b) { return a.start < b.start; });
    for (std::size_t k = 0; k < g.genes.size(); ++k) g.genes[k].id = "GENE" + std::to_string(k + 1);
    g.relevances.assign(g.genes.size(), 1.0);

    std::uniform_real_distribution<double> maf(o.maf_min, o.maf_max);
    std::vector<double> cut(p);
    for (auto& c : cut) c = normal_quantile(maf(rng));

    std::normal_distribution<double> normal;
    const double innovation = std::sqrt(1.0 - o.ld_rho * o.ld_rho);
    g.markers = Eigen::MatrixXd::Zero(o.n, o.p);
    for (Eigen::Index i = 0; i < o.n; ++i) {
        for (int hap = 0; hap < 2; ++hap) {
            double z = normal(rng);
            for (std::size_t j = 0; j < p; ++j) {
                if (j > 0) z = o.ld_rho * z + innovation * normal(rng);
                if (z < cut[j]) g.markers(i, static_cast<Eigen::Index>(j)) += 1.0;
            }
        }
    }
    return g;
}

SimulatedDataset simulate(const Eigen::MatrixXd& markers, std::vector<SnpLocus> snps, const Eigen::VectorXd& boosts,
                          const Hyperparameters& hyper, double sigma2_true, Rng& rng) {
    if (boosts.size() != markers.cols()) throw ConfigError("simulate: boosts are not aligned with the genotypes");
    if (!(sigma2_true > 0.0)) throw ConfigError("simulate: sigma2 must be positive");
    hyper.validate();

    SimulatedDataset out;
    out.sigma2 = sigma2_true;
    out.hyper = hyper;
    const Eigen::Index p = markers.cols();

    out.theta.resize(p);
    for (Eigen::Index j = 0; j < p; ++j)
        out.theta[j] = uniform_open(rng) < inv_logit(hyper.xi0 + hyper.xi1 * boosts[j]) ? 1.0 : 0.0;

    std::normal_distribution<double> normal;
    out.beta.resize(p + 1);
    out.beta[0] = std::sqrt(sigma2_true * hyper.kappa) * normal(rng);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double var = sigma2_true * (out.theta[j] * hyper.kappa + 1.0 - out.theta[j]);
        out.beta[j + 1] = std::sqrt(var) * normal(rng);
    }

    const Eigen::VectorXd eta = (markers * out.beta.tail(p)).array() + out.beta[0];
    Eigen::VectorXd y(markers.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = uniform_open(rng) < inv_logit(eta[i]) ? 1.0 : 0.0;
    out.data = make_dataset(std::move(y), markers, std::move(snps));
    return out;
}

std::string to_string(TestStatus status) {
    switch (status) {
    case TestStatus::Ok: return "ok";
    case TestStatus::Constant: return "constant";
    case TestStatus::NonConverged: return "nonconverged";
    }
    return "unknown";
}

namespace {

constexpr double kDivergedCoefficient = 25.0;

double logistic_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& x, double b0, double b1) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double eta = b0 + b1 * x[i];
        ll += y[i] * eta - log1p_exp(eta);
    }
    return ll;
}

SingleSnpResult fit_single(const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
    SingleSnpResult r;
    if (x.maxCoeff() == x.minCoeff()) {
        r.status = TestStatus::Constant;
        return r;
    }
    const double ybar = y.mean();
    double b0 = (ybar > 0.0 && ybar < 1.0) ? logit(ybar) : 0.0, b1 = 0.0;
    Eigen::Matrix2d H;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        H.setZero();
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double mu = inv_logit(b0 + b1 * x[i]);
            const double w = mu * (1.0 - mu);
            g[0] += y[i] - mu;
            g[1] += x[i] * (y[i] - mu);
            H(0, 0) += w;
            H(0, 1) += w * x[i];
            H(1, 1) += w * x[i] * x[i];
        }
        H(1, 0) = H(0, 1);
        const Eigen::LDLT<Eigen::Matrix2d> ldlt(H);
        if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) break;
        Eigen::Vector2d step = ldlt.solve(g);
        const double ll = logistic_loglik(y, x, b0, b1);
        double t = 1.0;
        while (t > 1e-10 && logistic_loglik(y, x, b0 + t * step[0], b1 + t * step[1]) < ll - 1e-12) t *= 0.5;
        b0 += t * step[0];
        b1 += t * step[1];
        if (std::abs(b0) > kDivergedCoefficient || std::abs(b1) > kDivergedCoefficient) break;
        if ((t * step).cwiseAbs().maxCoeff() < 1e-8) {
            converged = true;
            break;
        }
    }
    r.estimate = b1;
    if (!converged) {
        r.status = TestStatus::NonConverged;
        return r;
    }
    const Eigen::Matrix2d cov = H.inverse();
    r.std_error = std::sqrt(cov(1, 1));
    r.z = b1 / r.std_error;
    r.pvalue = two_sided_normal_pvalue(r.z);
    return r;
}

} // namespace

Eigen::VectorXd SingleSnpReport::scores() const {
    Eigen::VectorXd s(static_cast<Eigen::Index>(results.size()));
    for (std::size_t j = 0; j < results.size(); ++j) {
        const auto& r = results[j];
        double v = 0.0;
        if (r.status == TestStatus::NonConverged) v = std::numeric_limits<double>::infinity();
        else if (r.pvalue) v = -std::log10(std::max(*r.pvalue, std::numeric_limits<double>::min()));
        s[static_cast<Eigen::Index>(j)] = v;
    }
    return s;
}

SingleSnpReport single_snp_tests(const Dataset& data, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("single_snp_tests: alpha must lie in (0,1)");
    SingleSnpReport report;
    report.alpha = alpha;
    report.bonferroni = data.p() > 0 ? alpha / static_cast<double>(data.p()) : alpha;
    report.results.reserve(static_cast<std::size_t>(data.p()));
    for (Eigen::Index j = 1; j <= data.p(); ++j) report.results.push_back(fit_single(data.y, data.X.col(j)));
    return report;
}

double RocCurve::tpr_at(double max_fpr) const {
    double best = 0.0;
    for (const auto& [fpr, tpr] : points)
        if (fpr <= max_fpr + 1e-12) best = std::max(best, tpr);
    return best;
}

RocCurve roc_auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& truth) {
    if (scores.size() != truth.size()) throw ConfigError("roc_auc: scores and truth differ in length");
    double positives = 0.0, negatives = 0.0;
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
        if (truth[j] != 0.0 && truth[j] != 1.0) throw DomainError("roc_auc: truth must be 0/1");
        if (std::isnan(scores[j])) throw DomainError("roc_auc: scores must not be NaN");
        (truth[j] == 1.0 ? positives : negatives) += 1.0;
    }
    if (positives == 0.0 || negatives == 0.0)
        throw DomainError("roc_auc: truth needs at least one positive and one negative");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    double tp = 0.0, fp = 0.0;
    // Concordant pairs: for each group of tied scores, the positives beat every negative
    // already passed and tie with the negatives in the group.
    double concordant = 0.0;
    for (std::size_t k = 0; k < order.size();) {
        double group_pos = 0.0, group_neg = 0.0;
        std::size_t m = k;
        while (m < order.size() && scores[order[m]] == scores[order[k]]) {
            (truth[order[m]] == 1.0 ? group_pos : group_neg) += 1.0;
            ++m;
        }
        concordant += group_pos * (negatives - fp - group_neg) + 0.5 * group_pos * group_neg;
        tp += group_pos;
        fp += group_neg;
        curve.points.emplace_back(fp / negatives, tp / positives);
        k = m;
    }
    curve.auc = concordant / (positives * negatives);
    return curve;
}

std::string roc_tsv(const RocCurve& curve) {
    std::ostringstream out;
    out << "fpr\ttpr\n";
    for (const auto& [fpr, tpr] : curve.points) out << format_real(fpr) << '\t' << format_real(tpr) << '\n';
    out << "# auc=" << format_real(curve.auc) << '\n';
    return out.str();
}

namespace {

StudyRow run_study_dataset(const StudyConfig& config, int index) {
    StudyRow row;
    std::ostringstream id;
    id << "sim" << (index + 1);
    row.dataset = id.str();
    row.seed = config.seeds[static_cast<std::size_t>(index)];
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Rng rng(derive_seed(row.seed, "sim"));
        SyntheticGenome genome = synthetic_genome(config.genome, rng);
        const auto blocks = build_blocks(genome.genes, genome.relevances);
        const BoostVector boosts = compute_boosts(genome.snps, blocks, config.truth.phi);
        const SimulatedDataset sim =
            simulate(genome.markers, std::move(genome.snps), boosts.values, config.truth, config.sigma2, rng);
        row.causal = static_cast<std::size_t>(sim.theta.sum());
        const auto p = static_cast<std::size_t>(sim.data.p());

        const FilterTrace trace = em_filter_pipeline(sim.data, boosts, config.fit, config.filter);
        Eigen::VectorXd sb = filter_scores(trace, p);
        if (config.use_gibbs && !trace.survivors.empty()) {
            const Dataset sub = sim.data.select_markers(trace.survivors);
            GibbsOptions go = config.gibbs;
            go.seed = derive_seed(row.seed, "gibbs.chain0");
            const GibbsResult chain = gibbs_run(sub, boosts.subset(trace.survivors).values, config.fit, go);
            const double base = 2.0 * static_cast<double>(trace.rounds.size() + 1);
            for (std::size_t k = 0; k < trace.survivors.size(); ++k)
                sb[static_cast<Eigen::Index>(trace.survivors[k])] =
                    base + chain.summary.pi_hat[static_cast<Eigen::Index>(k + 1)];
        }
        const Eigen::VectorXd ss = single_snp_tests(sim.data).scores();

        row.roc_sb = roc_auc(sb, sim.theta);
        row.roc_ss = roc_auc(ss, sim.theta);
        row.auc_sb = row.roc_sb.auc;
        row.auc_ss = row.roc_ss.auc;
        row.tpr_sb = row.roc_sb.tpr_at(0.1);
        row.tpr_ss = row.roc_ss.tpr_at(0.1);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::optional<double> median_of(const std::vector<StudyRow>& rows, std::optional<double> StudyRow::*field) {
    std::vector<double> v;
    for (const auto& r : rows)
        if (r.error.empty() && (r.*field)) v.push_back(*(r.*field));
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

} // namespace

Hyperparameters StudyConfig::default_fit() {
    Hyperparameters h;
    h.nu = 1000.0;
    h.lambda = 10.0;
    return h;
}

FilterConfig StudyConfig::default_filter() {
    FilterConfig f;
    f.em.rank_tol = 0.0;
    return f;
}

GibbsOptions StudyConfig::default_gibbs() {
    GibbsOptions g;
    g.iters = 5000;
    g.rank_tol = 0.0;
    g.record_draws = false;
    return g;
}

StudySummary study_harness(const StudyConfig& config) {
    if (config.datasets < 1) throw ConfigError("study: at least one dataset is required");
    if (config.seeds.size() < static_cast<std::size_t>(config.datasets))
        throw ConfigError("study: " + std::to_string(config.seeds.size()) + " seeds given for " +
                          std::to_string(config.datasets) + " datasets");
    config.truth.validate();
    config.fit.validate();

    StudySummary summary;
    summary.rows.resize(static_cast<std::size_t>(config.datasets));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int d = next++; d < config.datasets; d = next++)
            summary.rows[static_cast<std::size_t>(d)] = run_study_dataset(config, d);
    };
    const int workers = std::clamp(config.threads, 1, config.datasets);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    }

    auto& med = summary.median;
    med.dataset = "median";
    med.auc_sb = median_of(summary.rows, &StudyRow::auc_sb);
    med.auc_ss = median_of(summary.rows, &StudyRow::auc_ss);
    med.tpr_sb = median_of(summary.rows, &StudyRow::tpr_sb);
    med.tpr_ss = median_of(summary.rows, &StudyRow::tpr_ss);
    std::vector<double> causal, runtime;
    for (const auto& r : summary.rows) {
        if (!r.error.empty()) continue;
        causal.push_back(static_cast<double>(r.causal));
        runtime.push_back(r.runtime);
    }
    if (!causal.empty()) {
        std::sort(causal.begin(), causal.end());
        std::sort(runtime.begin(), runtime.end());
        const std::size_t m = causal.size() / 2;
        med.causal = static_cast<std::size_t>(
            causal.size() % 2 ? causal[m] : std::floor(0.5 * (causal[m - 1] + causal[m])));
        med.runtime = causal.size() % 2 ? runtime[m] : 0.5 * (runtime[m - 1] + runtime[m]);
    } else {
        med.error = "no successful datasets";
    }
    return summary;
}

std::string study_tsv(const StudySummary& summary, bool with_runtime) {
    std::ostringstream out;
    out << "dataset\tseed\tauc_sb\tauc_ss\ttpr_sb\ttpr_ss\tcausal";
    if (with_runtime) out << "\truntime";
    out << "\terror\n";
    auto emit = [&](const StudyRow& r, bool is_median) {
        out << r.dataset << '\t' << (is_median ? std::string("NA") : std::to_string(r.seed)) << '\t'
            << opt_real(r.auc_sb) << '\t' << opt_real(r.auc_ss) << '\t' << opt_real(r.tpr_sb) << '\t'
            << opt_real(r.tpr_ss) << '\t' << r.causal;
        if (with_runtime) out << '\t' << format_real(r.runtime);
        std::string err = r.error;
        std::replace(err.begin(), err.end(), '\t', ' ');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << '\t' << (err.empty() ? "-" : err) << '\n';
    };
    for (const auto& r : summary.rows) emit(r, false);
    emit(summary.median, true);
    return out.str();
}

} // namespace sboost
