#include "sboost/inference.hpp"

#include "sboost/error.hpp"
#include "sboost/stats.hpp"
#include "sboost/tsv.hpp"

#include <cmath>
#include <future>
#include <sstream>

namespace sboost {

GainConfig GainConfig::from_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
    return {1.0 / threshold - 1.0};
}

void GainConfig::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive and finite");
}

std::vector<bool> centroid(const Eigen::VectorXd& pi, double gamma) {
    GainConfig{gamma}.validate();
    const double t = GainConfig{gamma}.threshold();
    std::vector<bool> out(static_cast<std::size_t>(pi.size()));
    for (Eigen::Index j = 0; j < pi.size(); ++j) {
        if (!(pi[j] >= 0.0 && pi[j] <= 1.0)) throw DomainError("centroid: probabilities must lie in [0,1]");
        out[static_cast<std::size_t>(j)] = pi[j] >= t;
    }
    return out;
}

std::optional<double> bfdr(const Eigen::VectorXd& pi, const std::vector<bool>& selection) {
    if (selection.size() != static_cast<std::size_t>(pi.size()))
        throw ConfigError("bfdr: selection and probability lengths differ");
    double false_mass = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < selection.size(); ++j) {
        if (!selection[j]) continue;
        false_mass += 1.0 - pi[static_cast<Eigen::Index>(j)];
        ++count;
    }
    if (count == 0) return std::nullopt;
    return false_mass / static_cast<double>(count);
}

std::vector<EmbfdrPoint> embfdr_curve(const Eigen::VectorXd& etheta, const std::vector<double>& gammas) {
    std::vector<EmbfdrPoint> out;
    out.reserve(gammas.size());
    for (double g : gammas) {
        const auto sel = centroid(etheta, g);
        EmbfdrPoint point;
        point.gamma = g;
        point.threshold = GainConfig{g}.threshold();
        point.embfdr = bfdr(etheta, sel);
        for (bool s : sel) point.retained += s ? 1 : 0;
        out.push_back(point);
    }
    return out;
}

std::vector<double> default_gamma_grid(int points) {
    if (points < 2) throw ConfigError("gamma grid needs at least two points");
    const double lo = logit(0.02), hi = logit(0.5);
    std::vector<double> out;
    // Threshold decreasing from 0.5 to 0.02 means gamma increasing.
    for (int k = 0; k < points; ++k) {
        const double t = inv_logit(hi + (lo - hi) * k / (points - 1));
        out.push_back(1.0 / t - 1.0);
    }
    return out;
}

double xi0_upper_bound(double kappa, double gamma, double s) {
    if (!(kappa > 1.0)) throw ConfigError("kappa must exceed 1");
    if (!(s > 0.0)) throw ConfigError("s must be positive");
    GainConfig{gamma}.validate();
    return 0.5 * std::log(kappa) - std::log(gamma) - 0.5 * s * s * (1.0 - 1.0 / kappa);
}

double xi1_bound(double kappa, double gamma, double s, double xi0) {
    const double bound = xi0_upper_bound(kappa, gamma, s) - xi0;
    if (bound < -1e-12) {
        std::ostringstream msg;
        msg << "xi1 bound is negative (" << bound << "): xi0 + log(gamma) must not exceed "
            << "1/2 log(kappa) - (s^2/2)(1 - 1/kappa) = " << xi0_upper_bound(kappa, 1.0, s);
        throw ConfigError(msg.str());
    }
    return std::max(bound, 0.0);
}

double xi1_bound_stringent(double gamma, double s, double xi0) { return xi1_bound(s * s, gamma, s, xi0); }

std::vector<BetaThreshold> beta_thresholds(double sigma2, const Hyperparameters& hyper,
                                           const Eigen::VectorXd& boosts, double gamma) {
    if (!(sigma2 > 0.0)) throw DomainError("beta_thresholds: sigma2 must be positive");
    if (!(hyper.kappa > 1.0)) throw DomainError("beta_thresholds: kappa must exceed 1");
    GainConfig{gamma}.validate();
    const double sigma = std::sqrt(sigma2);
    const double factor = 2.0 * hyper.kappa / (hyper.kappa - 1.0);
    std::vector<BetaThreshold> out;
    out.reserve(static_cast<std::size_t>(boosts.size()));
    for (Eigen::Index j = 0; j < boosts.size(); ++j) {
        BetaThreshold t;
        t.s_squared = factor * (0.5 * std::log(hyper.kappa) - hyper.xi0 - hyper.xi1 * boosts[j] - std::log(gamma));
        if (t.s_squared < 0.0) {
            t.always_selected = true;
        } else {
            t.upper = sigma * std::sqrt(t.s_squared);
            t.lower = -t.upper;
        }
        out.push_back(t);
    }
    return out;
}

std::vector<KappaScanRow> kappa_scan(const Dataset& data, const Eigen::VectorXd& boosts,
                                     const Hyperparameters& hyper_base, const std::vector<double>& kappas,
                                     const std::vector<double>& gammas, const EmOptions& options) {
    if (kappas.empty()) throw ConfigError("kappa_scan: empty kappa grid");
    if (gammas.empty()) throw ConfigError("kappa_scan: empty gamma grid");
    for (double k : kappas)
        if (!(k > 1.0)) throw ConfigError("kappa_scan: every kappa must exceed 1");

    const TruncatedDesign design = design_for_tolerance(data.X, options.rank_tol);
    std::vector<std::future<std::vector<EmbfdrPoint>>> jobs;
    for (double k : kappas) {
        jobs.push_back(std::async(std::launch::async, [&, k] {
            Hyperparameters h = hyper_base;
            h.kappa = k;
            const EmState state = em_fit(data, design, boosts, h, options);
            return embfdr_curve(state.etheta.tail(state.etheta.size() - 1), gammas);
        }));
    }
    std::vector<KappaScanRow> rows;
    for (std::size_t i = 0; i < kappas.size(); ++i)
        for (const auto& point : jobs[i].get()) rows.push_back({kappas[i], point});
    return rows;
}

std::string kappa_scan_tsv(const std::vector<KappaScanRow>& rows) {
    std::ostringstream out;
    out << "kappa\tgamma\tthreshold\tembfdr\tretained\n";
    for (const auto& r : rows)
        out << format_real(r.kappa) << '\t' << format_real(r.point.gamma) << '\t' << format_real(r.point.threshold)
            << '\t' << (r.point.embfdr ? format_real(*r.point.embfdr) : "NA") << '\t' << r.point.retained << '\n';
    return out.str();
}

std::string embfdr_tsv(const std::vector<EmbfdrPoint>& curve) {
    std::ostringstream out;
    out << "gamma\tthreshold\tembfdr\tretained\n";
    for (const auto& p : curve)
        out << format_real(p.gamma) << '\t' << format_real(p.threshold) << '\t'
            << (p.embfdr ? format_real(*p.embfdr) : "NA") << '\t' << p.retained << '\n';
    return out.str();
}

SelectionReport make_selection_report(std::vector<std::string> ids, const Eigen::VectorXd& probability,
                                      double gamma, std::string metric) {
    if (ids.size() != static_cast<std::size_t>(probability.size()))
        throw ConfigError("selection report: ids and probabilities differ in length");
    SelectionReport r;
    r.ids = std::move(ids);
    r.probability = probability;
    r.gamma = gamma;
    r.selected = centroid(probability, gamma);
    r.fdr = bfdr(probability, r.selected);
    r.metric = std::move(metric);
    return r;
}

std::string selection_report_tsv(const SelectionReport& report) {
    std::ostringstream out;
    const bool with_bounds = report.thresholds.size() == report.ids.size() && !report.ids.empty();
    out << "snp\tprobability\tselected";
    if (with_bounds) out << "\tlower\tupper";
    out << '\n';
    for (std::size_t j = 0; j < report.ids.size(); ++j) {
        out << report.ids[j] << '\t' << format_real(report.probability[static_cast<Eigen::Index>(j)]) << '\t'
            << (report.selected[j] ? 1 : 0);
        if (with_bounds) {
            const auto& t = report.thresholds[j];
            out << '\t' << (t.always_selected ? "NA" : format_real(t.lower)) << '\t'
                << (t.always_selected ? "NA" : format_real(t.upper));
        }
        out << '\n';
    }
    out << "# gamma=" << format_real(report.gamma) << " threshold=" << format_real(1.0 / (1.0 + report.gamma))
        << ' ' << report.metric << '=' << (report.fdr ? format_real(*report.fdr) : "NA") << '\n';
    return out.str();
}

} // namespace sboost
