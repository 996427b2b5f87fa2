// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "fixtures.hpp"
#include "helpers.hpp"

#include "sboost/em.hpp"
#include "sboost/genome.hpp"
#include "sboost/inference.hpp"
#include "sboost/linalg.hpp"
#include "sboost/mcmc.hpp"
#include "sboost/pipeline.hpp"
#include "sboost/polya_gamma.hpp"
#include "sboost/sim.hpp"
#include "sboost/tsv.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sboost;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, double budget_seconds, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_seconds > 0.0 && secs >= budget_seconds) {
        o.pass = false;
        o.detail += " [over the " + format_real(budget_seconds) + " s budget]";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %2d  %-34s %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Outcome near_far_weights() {
    const GenomicBlock near{"1", 980, 995, 1.0};
    const GenomicBlock far{"1", 1020, 1030, 1.0};
    const double a = gene_weight(1000, near, 10.0);
    const double b = gene_weight(1000, far, 10.0);
    return {std::abs(a - 0.29) <= 0.005 && std::abs(b - 0.02) <= 0.005, "w=" + fmt(a) + ", " + fmt(b)};
}

Outcome hyperparameter_bounds() {
    const double bound = xi0_upper_bound(16.0, 1.0, 4.0);
    const double xi0 = std::log(1e-4 / (1.0 - 1e-4));
    const double xi1 = xi1_bound_stringent(1.0, 4.0, xi0);
    const bool ok = std::abs(bound + 6.11) <= 0.01 && std::abs(xi0 + 9.21) <= 0.01 && xi0 <= bound &&
                    std::abs(xi1 - 3.10) <= 0.01;
    return {ok, "bound=" + fmt(bound) + " xi0=" + fmt(xi0) + " xi1=" + fmt(xi1)};
}

Outcome woodbury_suite() {
    Rng rng(301);
    std::uniform_int_distribution<int> rank(1, 8), width(1, 40);
    std::uniform_real_distribution<double> scale(-1.0, 1.0);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int l = rank(rng), cols = width(rng) + 1;
        Eigen::MatrixXd S(l, cols);
        for (Eigen::Index i = 0; i < S.size(); ++i) S.data()[i] = normal(rng);
        Eigen::VectorXd sigma(cols);
        for (int j = 0; j < cols; ++j) sigma[j] = std::pow(10.0, 2.0 * scale(rng));
        Eigen::MatrixXd rhs(cols, 2);
        for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs.data()[i] = normal(rng);
        Eigen::MatrixXd dense = S.transpose() * S;
        dense.diagonal() += sigma.cwiseInverse();
        const Eigen::MatrixXd expect = dense.fullPivLu().solve(rhs);
        const Eigen::MatrixXd got = woodbury_solve(S, sigma, rhs);
        worst = std::max(worst, (got - expect).norm() / expect.norm());
    }
    return {worst <= 1e-8, "max relative error " + fmt(worst)};
}

Outcome pg_moments() {
    Rng rng(401);
    bool ok = true;
    std::ostringstream d;
    for (double z : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        double s1 = 0.0, s2 = 0.0;
        const int draws = 100000;
        for (int k = 0; k < draws; ++k) {
            const double w = sample_pg(z, rng);
            s1 += w;
            s2 += w * w;
        }
        const double mean = s1 / draws;
        const double var = (s2 - draws * mean * mean) / (draws - 1);
        const double expect_mean = z == 0.0 ? 0.25 : std::tanh(0.5 * z) / (2.0 * z);
        const double em = std::abs(mean / expect_mean - 1.0), ev = std::abs(var / pg_variance(z) - 1.0);
        ok = ok && em < 0.01 && ev < 0.05;
        d << "z=" << z << ":" << fmt(100 * em) << "%/" << fmt(100 * ev) << "% ";
    }
    return {ok, d.str()};
}

// Batch-means standard error of the mean of a correlated sequence.
double batch_se(const std::vector<double>& v, int batches = 50) {
    const std::size_t size = v.size() / static_cast<std::size_t>(batches);
    std::vector<double> means;
    for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < size; ++k) s += v[b * size + k];
        means.push_back(s / static_cast<double>(size));
    }
    return std::sqrt(testing::variance_of(means) / batches);
}

Outcome geweke() {
    const int n = 10, p = 3, samples = 20000;
    Rng rng(501);
    const Eigen::MatrixXd m = testing::random_dosages(n, p, rng, 0.4);
    const Dataset base = make_dataset(Eigen::VectorXd::Zero(n), m, testing::spaced_loci(p));
    Eigen::VectorXd boosts(p);
    boosts << 0.0, 0.5, 1.0;
    Hyperparameters h;
    h.kappa = 4.0;
    h.nu = 6.0;
    h.lambda = 5.0;
    h.xi0 = -0.5;
    h.xi1 = 1.0;

    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_prior = [&](Rng& r) {
        GibbsState s;
        std::gamma_distribution<double> g(h.nu, 1.0 / h.lambda);
        s.sigma2 = 1.0 / g(r);
        s.theta = Eigen::VectorXd::Ones(p + 1);
        for (int j = 1; j <= p; ++j) s.theta[j] = unit(r) < inv_logit(h.xi0 + h.xi1 * boosts[j - 1]) ? 1.0 : 0.0;
        s.beta.resize(p + 1);
        for (int j = 0; j <= p; ++j)
            s.beta[j] = std::sqrt(s.sigma2 * (s.theta[j] * h.kappa + 1.0 - s.theta[j])) * normal(r);
        return s;
    };
    auto draw_y = [&](const Eigen::VectorXd& beta, Rng& r) {
        const Eigen::VectorXd eta = base.X * beta;
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = unit(r) < inv_logit(eta[i]) ? 1.0 : 0.0;
        return y;
    };
    using Stat = std::function<double(const GibbsState&)>;
    const std::vector<std::pair<std::string, Stat>> stats{
        {"s2", [](const GibbsState& s) { return s.sigma2; }},
        {"s2^2", [](const GibbsState& s) { return s.sigma2 * s.sigma2; }},
        {"sum_theta", [](const GibbsState& s) { return s.theta.tail(s.theta.size() - 1).sum(); }},
        {"sum_theta^2", [](const GibbsState& s) { return std::pow(s.theta.tail(s.theta.size() - 1).sum(), 2); }},
        {"beta0", [](const GibbsState& s) { return s.beta[0]; }},
        {"beta0^2", [](const GibbsState& s) { return s.beta[0] * s.beta[0]; }},
    };

    std::vector<std::vector<double>> mc(stats.size()), sc(stats.size());
    for (int k = 0; k < samples; ++k) {
        const GibbsState s = draw_prior(rng);
        for (std::size_t q = 0; q < stats.size(); ++q) mc[q].push_back(stats[q].second(s));
    }

    GibbsOptions go;
    go.seed = 502;
    go.rank_tol = 0.0;
    GibbsState start = draw_prior(rng);
    Dataset data = base;
    data.y = draw_y(start.beta, rng);
    GibbsSampler sampler(data, boosts, h, go, start);
    for (int k = 0; k < samples; ++k) {
        sampler.set_phenotype(draw_y(sampler.state().beta, rng));
        sampler.step();
        for (std::size_t q = 0; q < stats.size(); ++q) sc[q].push_back(stats[q].second(sampler.state()));
    }

    bool ok = true;
    std::ostringstream d;
    d << "|z|:";
    for (std::size_t q = 0; q < stats.size(); ++q) {
        const double se_mc = std::sqrt(testing::variance_of(mc[q]) / samples);
        const double z = (testing::mean_of(mc[q]) - testing::mean_of(sc[q])) /
                         std::sqrt(se_mc * se_mc + std::pow(batch_se(sc[q]), 2));
        ok = ok && std::abs(z) < 4.0;
        d << ' ' << stats[q].first << '=' << fmt(std::abs(z));
    }
    return {ok, d.str()};
}

Outcome centroid_brute_force() {
    Rng rng(601);
    std::uniform_int_distribution<int> width(1, 12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int p = width(rng);
        const double gamma = std::exp(4.0 * unit(rng) - 2.0);
        Eigen::VectorXd pi(p);
        for (int j = 0; j < p; ++j) pi[j] = unit(rng);
        double best = -1.0;
        unsigned best_mask = 0;
        for (unsigned mask = 0; mask < (1u << p); ++mask) {
            double gain = 0.0;
            for (int j = 0; j < p; ++j) gain += (mask >> j & 1u) ? gamma * pi[j] : 1.0 - pi[j];
            if (gain > best) {
                best = gain;
                best_mask = mask;
            }
        }
        const auto sel = centroid(pi, gamma);
        for (int j = 0; j < p; ++j)
            if (sel[static_cast<std::size_t>(j)] != static_cast<bool>(best_mask >> j & 1u)) {
                ++mismatches;
                break;
            }
    }
    return {mismatches == 0, std::to_string(mismatches) + " of 100 instances differ"};
}

Outcome ecm_ascent() {
    Rng rng(701);
    std::uniform_int_distribution<int> rows(20, 60), cols(1, 10);
    std::normal_distribution<double> effect(0.0, 1.0);
    double worst = 0.0;
    int steps = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rows(rng), p = cols(rng);
        const Dataset d = testing::planted_dataset(n, p, rng, {{0, effect(rng)}, {p - 1, effect(rng)}}, 0.3);
        Eigen::VectorXd boosts(p);
        for (int j = 0; j < p; ++j) boosts[j] = std::abs(effect(rng)) / 3.0;
        Hyperparameters h;
        h.kappa = trial % 2 ? 100.0 : 1000.0;
        h.lambda = 0.1 + 0.05 * trial;
        EmOptions o;
        o.rank_tol = 0.0;
        o.tol = 1e-9;
        const EmState s = em_fit(d, boosts, h, o);
        for (std::size_t k = 1; k < s.log_joint.size(); ++k) {
            worst = std::max(worst, s.log_joint[k - 1] - s.log_joint[k]);
            ++steps;
        }
    }
    return {worst <= 1e-8, std::to_string(steps) + " steps, largest drop " + fmt(std::max(0.0, worst))};
}

Outcome simulation_study() {
    StudyConfig c;
    for (std::uint64_t s = 1; s <= 10; ++s) c.seeds.push_back(s);
    c.genome.n = 100;
    c.genome.p = 200;
    c.sigma2 = 0.01;
    c.truth.kappa = 1000;
    c.truth.xi0 = -4;
    c.truth.xi1 = 2;
    c.threads = 2;
    const StudySummary s = study_harness(c);
    const auto& m = s.median;
    if (!m.auc_sb || !m.auc_ss || !m.tpr_sb || !m.tpr_ss) return {false, "no successful datasets"};
    const bool ok = *m.auc_sb > 0.5 && *m.auc_sb >= *m.auc_ss - 0.02 && *m.tpr_sb >= *m.tpr_ss;
    return {ok, "median AUC sb=" + fmt(*m.auc_sb) + " ss=" + fmt(*m.auc_ss) + ", TPR@0.1 sb=" + fmt(*m.tpr_sb) +
                    " ss=" + fmt(*m.tpr_ss)};
}

Outcome phi_recovery() {
    bool ok = true;
    std::ostringstream d;
    Rng rng(901);
    std::uniform_real_distribution<double> gap(0.2, 0.8);
    for (double target : {1e3, 1e4, 1e5}) {
        std::vector<double> pos{0.0};
        for (int k = 1; k < 15; ++k) pos.push_back(pos.back() + gap(rng) * target);
        Eigen::MatrixXd c(15, 15);
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j < 15; ++j) c(i, j) = correlation_magnitude(pos[i] - pos[j], target);
        const double fit = fit_phi_from_correlations(c, pos);
        const double err = std::abs(fit / target - 1.0);
        ok = ok && err < 0.05;
        d << fmt(target) << "->" << fmt(fit) << ' ';
    }
    return {ok, d.str()};
}

Outcome end_to_end() {
    const auto dir = std::filesystem::temp_directory_path() / "sboost_acceptance";
    RunConfig c = testing::planted_run(dir, 5);
    c.gibbs_iters = 3000;
    run_pipeline(c);
    const std::vector<std::string> reports{"filter.tsv", "boosts.tsv",  "em_trace.tsv", "em_survivors.tsv",
                                           "embfdr.tsv", "gibbs.tsv",   "draws.tsv",    "selection.tsv",
                                           "manifest.txt"};
    std::vector<std::string> first;
    for (const auto& r : reports) first.push_back(read_file(dir / "out" / r));
    const PipelineResult again = run_pipeline(c);
    int differing = 0;
    for (std::size_t k = 0; k < reports.size(); ++k)
        if (read_file(dir / "out" / reports[k]) != first[k]) ++differing;
    bool planted = false;
    for (std::size_t k = 0; k < again.report.ids.size(); ++k)
        if (again.report.ids[k] == "rs6") planted = again.report.selected[k];
    std::filesystem::remove_all(dir);
    return {differing == 0 && planted, std::to_string(differing) + " differing reports, planted SNP " +
                                           (planted ? "selected" : "not selected") + " at gamma=1"};
}

Outcome ppl_arithmetic() {
    Rng rng(1101);
    const int n = 37;
    const Dataset d = testing::planted_dataset(n, 4, rng, {{1, 1.0}});
    EmState flat;
    flat.beta = Eigen::VectorXd::Zero(5);
    const double half = ppl(flat, d);

    Eigen::VectorXd y(n);
    Eigen::MatrixXd m(n, 1);
    for (int i = 0; i < n; ++i) {
        y[i] = i % 3 == 0;
        m(i, 0) = y[i] * 2.0;
    }
    EmState perfect;
    perfect.beta = Eigen::Vector2d(-800.0, 800.0);
    const double zero = ppl(perfect, make_dataset(y, m, testing::spaced_loci(1)));
    return {half == n / 2.0 && zero == 0.0, "ppl(0.5)=" + fmt(half) + " (n/2=" + fmt(n / 2.0) + "), perfect=" +
                                                fmt(zero)};
}

} // namespace

int main() {
    run(1, "gene weights near and far", 1e-3, near_far_weights);
    run(2, "hyperparameter bounds", 0.0, hyperparameter_bounds);
    run(3, "Woodbury dense oracle (500)", 10.0, woodbury_suite);
    run(4, "Polya-Gamma moments", 30.0, pg_moments);
    run(5, "Geweke joint distribution", 300.0, geweke);
    run(6, "centroid brute force (100)", 10.0, centroid_brute_force);
    run(7, "ECM ascent (20 untruncated)", 0.0, ecm_ascent);
    run(8, "scaled simulation study", 900.0, simulation_study);
    run(9, "phi recovery", 0.0, phi_recovery);
    run(10, "end-to-end determinism", 0.0, end_to_end);
    run(11, "PPL arithmetic", 0.0, ppl_arithmetic);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
