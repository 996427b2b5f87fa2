#include "sboost/em.hpp"

#include "sboost/error.hpp"
#include "sboost/stats.hpp"
#include "sboost/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace sboost {

namespace {

// Expected prior precision weights <theta>/kappa + 1 - <theta>.
Eigen::VectorXd precision_weights(const Eigen::VectorXd& etheta, double kappa) {
    return (etheta.array() / kappa + 1.0 - etheta.array()).matrix();
}

double penalized_objective(const Dataset& data, const Eigen::VectorXd& beta, const Eigen::VectorXd& weights,
                           double sigma2) {
    return log_likelihood(data, beta) - 0.5 * (beta.array().square() * weights.array()).sum() / sigma2;
}

double log_normal_density(double x, double variance) {
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * x * x / variance;
}

double log_sum_exp(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_boosts(const Eigen::VectorXd& beta, const Eigen::VectorXd& boosts) {
    if (boosts.size() + 1 != beta.size())
        throw ConfigError("boost vector has " + std::to_string(boosts.size()) + " entries for " +
                          std::to_string(beta.size() - 1) + " markers");
}

EmState restrict_state(const EmState& state, const std::vector<std::size_t>& kept) {
    EmState out;
    out.sigma2 = state.sigma2;
    out.beta.resize(static_cast<Eigen::Index>(kept.size()) + 1);
    out.beta[0] = state.beta[0];
    for (std::size_t k = 0; k < kept.size(); ++k)
        out.beta[static_cast<Eigen::Index>(k) + 1] = state.beta[static_cast<Eigen::Index>(kept[k]) + 1];
    return out;
}

} // namespace

void Hyperparameters::validate() const {
    if (!(kappa > 1.0)) throw ConfigError("kappa must exceed 1");
    if (!(nu > 0.0) || !(lambda > 0.0)) throw ConfigError("nu and lambda must be positive");
    if (!(phi > 0.0)) throw ConfigError("phi must be positive");
    if (!(xi1 >= 0.0)) throw ConfigError("xi1 must be non-negative");
    if (!(s > 0.0)) throw ConfigError("s must be positive");
    if (!std::isfinite(xi0)) throw ConfigError("xi0 must be finite");
}

Eigen::VectorXd e_step(const Eigen::VectorXd& beta, double sigma2, const Eigen::VectorXd& boosts,
                       const Hyperparameters& hyper) {
    check_boosts(beta, boosts);
    if (!(sigma2 > 0.0)) throw DomainError("e_step: sigma2 must be positive");
    if (!(hyper.kappa > 1.0)) throw DomainError("e_step: kappa must exceed 1");
    Eigen::VectorXd out(beta.size());
    out[0] = 1.0;
    const double base = -0.5 * std::log(hyper.kappa);
    const double slope = (1.0 / hyper.kappa - 1.0) / (2.0 * sigma2);
    for (Eigen::Index j = 1; j < beta.size(); ++j) {
        const double log_odds = base - beta[j] * beta[j] * slope + hyper.xi0 + hyper.xi1 * boosts[j - 1];
        out[j] = inv_logit(log_odds);
    }
    return out;
}

double cm_sigma(const Eigen::VectorXd& beta, const Eigen::VectorXd& etheta, const Hyperparameters& hyper) {
    if (etheta.size() != beta.size()) throw ConfigError("cm_sigma: beta and <theta> lengths differ");
    const double p1 = static_cast<double>(beta.size());
    const double quad = 0.5 * (beta.array().square() * precision_weights(etheta, hyper.kappa).array()).sum();
    return (quad + hyper.lambda) / (0.5 * p1 + hyper.nu + 1.0);
}

Eigen::VectorXd em_prior_covariance(const Eigen::VectorXd& etheta, double sigma2, double kappa) {
    return (sigma2 / precision_weights(etheta, kappa).array()).matrix();
}

Eigen::VectorXd fitted_probabilities(const Dataset& data, const Eigen::VectorXd& beta) {
    return inv_logit(Eigen::VectorXd(data.X * beta));
}

Eigen::VectorXd cm_beta(const TruncatedDesign& design, const Dataset& data, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& etheta, double sigma2, const Hyperparameters& hyper) {
    if (design.rank() < 1) throw DomainError("cm_beta: design rank must be at least 1");
    if (!(sigma2 > 0.0)) throw DomainError("cm_beta: sigma2 must be positive");
    if (design.cols() != data.X.cols() || beta.size() != data.X.cols())
        throw ConfigError("cm_beta: design, data and beta dimensions disagree");

    const Eigen::VectorXd mu = fitted_probabilities(data, beta);
    const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
    const Eigen::MatrixXd S = weighted_cholesky(design, w);
    const Eigen::VectorXd sigma = em_prior_covariance(etheta, sigma2, hyper.kappa);
    const Eigen::VectorXd rhs = S.transpose() * (S * beta) + data.X.transpose() * (data.y - mu);
    return woodbury_solve(S, sigma, rhs);
}

double log_likelihood(const Dataset& data, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = data.X * beta;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) acc += data.y[i] * eta[i] - log1p_exp(eta[i]);
    return acc;
}

double expected_log_joint(const Dataset& data, const Eigen::VectorXd& etheta, const Eigen::VectorXd& beta,
                          double sigma2, const Hyperparameters& hyper) {
    const double p1 = static_cast<double>(beta.size());
    const double quad = (beta.array().square() * precision_weights(etheta, hyper.kappa).array()).sum();
    return log_likelihood(data, beta) - 0.5 * p1 * std::log(sigma2) - 0.5 * quad / sigma2 -
           (hyper.nu + 1.0) * std::log(sigma2) - hyper.lambda / sigma2;
}

double log_posterior(const Dataset& data, const Eigen::VectorXd& beta, double sigma2,
                     const Eigen::VectorXd& boosts, const Hyperparameters& hyper) {
    check_boosts(beta, boosts);
    const double slab = sigma2 * hyper.kappa;
    double acc = log_likelihood(data, beta) + log_normal_density(beta[0], slab);
    for (Eigen::Index j = 1; j < beta.size(); ++j) {
        const double a = hyper.xi0 + hyper.xi1 * boosts[j - 1];
        acc += log_sum_exp(-log1p_exp(-a) + log_normal_density(beta[j], slab),
                           -log1p_exp(a) + log_normal_density(beta[j], sigma2));
    }
    return acc - (hyper.nu + 1.0) * std::log(sigma2) - hyper.lambda / sigma2;
}

EmState em_initial_state(const Dataset& data, const Hyperparameters& hyper) {
    EmState s;
    s.beta = Eigen::VectorXd::Zero(data.X.cols());
    s.sigma2 = hyper.lambda / (hyper.nu + 1.0);
    return s;
}

EmState em_fit(const Dataset& data, const TruncatedDesign& design, const Eigen::VectorXd& boosts,
               const Hyperparameters& hyper, const EmOptions& options, std::optional<EmState> start) {
    hyper.validate();
    if (options.max_iter < 1) throw ConfigError("em_fit: max_iter must be at least 1");

    EmState state = start ? std::move(*start) : em_initial_state(data, hyper);
    if (state.beta.size() != data.X.cols()) throw ConfigError("em_fit: starting beta has the wrong length");
    state.iterations = 0;
    state.converged = false;
    state.diverged = false;
    state.log_joint.assign(1, log_posterior(data, state.beta, state.sigma2, boosts, hyper));

    for (int it = 0; it < options.max_iter; ++it) {
        const Eigen::VectorXd etheta = e_step(state.beta, state.sigma2, boosts, hyper);
        const double sigma2 = cm_sigma(state.beta, etheta, hyper);
        const Eigen::VectorXd weights = precision_weights(etheta, hyper.kappa);

        Eigen::VectorXd step = cm_beta(design, data, state.beta, etheta, sigma2, hyper) - state.beta;
        // Backtrack along the IRLS direction so the conditional maximization never descends.
        const double before = penalized_objective(data, state.beta, weights, sigma2);
        double after = penalized_objective(data, state.beta + step, weights, sigma2);
        for (int h = 0; h < options.max_halvings && !(after >= before); ++h) {
            step *= 0.5;
            after = penalized_objective(data, state.beta + step, weights, sigma2);
        }
        if (!(after >= before)) step.setZero();

        state.beta += step;
        state.sigma2 = sigma2;
        ++state.iterations;

        const double lp = log_posterior(data, state.beta, state.sigma2, boosts, hyper);
        if (state.iterations > 2 && lp < state.log_joint.back() - 1e-6) state.diverged = true;
        state.log_joint.push_back(lp);

        if (step.cwiseAbs().maxCoeff() < options.tol) {
            state.converged = true;
            break;
        }
    }
    state.etheta = e_step(state.beta, state.sigma2, boosts, hyper);
    return state;
}

EmState em_fit(const Dataset& data, const Eigen::VectorXd& boosts, const Hyperparameters& hyper,
               const EmOptions& options, std::optional<EmState> start) {
    return em_fit(data, design_for_tolerance(data.X, options.rank_tol), boosts, hyper, options, std::move(start));
}

double max_residual(const Dataset& data, const Eigen::VectorXd& beta) {
    return (data.y - fitted_probabilities(data, beta)).cwiseAbs().maxCoeff();
}

bool should_stop(const EmState& state, const Dataset& data) { return max_residual(data, state.beta) > 0.5; }

double ppl(const EmState& state, const Dataset& data) {
    const Eigen::VectorXd yhat = fitted_probabilities(data, state.beta);
    return ((data.y - yhat).array().square() + yhat.array() * (1.0 - yhat.array())).sum();
}

FilterResult filter_round(const EmState& state, const Dataset& data, double fraction) {
    const auto p = static_cast<std::size_t>(data.p());
    if (p < 2) throw DomainError("filter_round: at least two markers must remain");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("filter_round: fraction must lie in (0,1)");
    if (state.etheta.size() != data.X.cols()) throw ConfigError("filter_round: <theta> length mismatch");

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return state.etheta[static_cast<Eigen::Index>(a) + 1] < state.etheta[static_cast<Eigen::Index>(b) + 1];
    });
    const auto drop = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(p)));

    FilterResult out;
    out.removed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(drop));
    std::sort(out.removed.begin(), out.removed.end());
    out.kept.assign(order.begin() + static_cast<std::ptrdiff_t>(drop), order.end());
    std::sort(out.kept.begin(), out.kept.end());
    out.data = data.select_markers(out.kept);
    return out;
}

std::string to_string(FilterStop reason) {
    switch (reason) {
    case FilterStop::MaxRounds: return "max_rounds";
    case FilterStop::Degraded: return "degraded";
    case FilterStop::Floor: return "floor";
    }
    return "unknown";
}

FilterTrace em_filter_pipeline(const Dataset& data, const BoostVector& boosts, const Hyperparameters& hyper,
                               const FilterConfig& config) {
    if (boosts.size() != static_cast<std::size_t>(data.p()))
        throw ConfigError("em_filter_pipeline: boosts are not aligned with the markers");
    if (!(config.fraction > 0.0 && config.fraction < 1.0))
        throw ConfigError("em_filter_pipeline: fraction must lie in (0,1)");

    const std::size_t floor =
        config.min_snps.value_or(std::max<std::size_t>(10, static_cast<std::size_t>(data.n()) / 10));

    FilterTrace trace;
    std::vector<std::size_t> current(static_cast<std::size_t>(data.p()));
    std::iota(current.begin(), current.end(), std::size_t{0});
    trace.survivors = current;
    if (config.max_rounds <= 0) return trace;

    Dataset working = data;
    Eigen::VectorXd working_boosts = boosts.values;
    std::optional<EmState> warm;

    for (int r = 0; r < config.max_rounds; ++r) {
        const TruncatedDesign design = design_for_tolerance(working.X, config.em.rank_tol);
        FilterRound round;
        round.fitted = current;
        round.rank = design.rank();
        round.frobenius_mse = design.frobenius_mse;
        round.state = em_fit(working, design, working_boosts, hyper, config.em, warm);
        round.ppl = ppl(round.state, working);
        round.max_residual = max_residual(working, round.state.beta);
        round.degraded = round.max_residual > 0.5;

        if (round.degraded && config.stop_on_degrade) {
            trace.reason = FilterStop::Degraded;
            if (trace.rounds.empty()) {
                trace.survivors = current;
                trace.survivor_state = round.state;
            } else {
                trace.survivors = trace.rounds.back().fitted;
                trace.survivor_state = trace.rounds.back().state;
            }
            trace.rounds.push_back(std::move(round));
            return trace;
        }

        const std::size_t p = current.size();
        const auto drop = static_cast<std::size_t>(std::floor(config.fraction * static_cast<double>(p)));
        if (p < 2 || drop == 0 || p - drop < floor) {
            trace.reason = FilterStop::Floor;
            trace.survivors = current;
            trace.survivor_state = round.state;
            trace.rounds.push_back(std::move(round));
            return trace;
        }

        FilterResult filtered = filter_round(round.state, working, config.fraction);
        for (std::size_t k : filtered.kept) round.retained.push_back(current[k]);
        warm = restrict_state(round.state, filtered.kept);

        Eigen::VectorXd next_boosts(static_cast<Eigen::Index>(filtered.kept.size()));
        for (std::size_t k = 0; k < filtered.kept.size(); ++k)
            next_boosts[static_cast<Eigen::Index>(k)] = working_boosts[static_cast<Eigen::Index>(filtered.kept[k])];

        current = round.retained;
        working = std::move(filtered.data);
        working_boosts = std::move(next_boosts);
        trace.rounds.push_back(std::move(round));
    }
    trace.reason = FilterStop::MaxRounds;
    trace.survivors = current;
    return trace;
}

Eigen::VectorXd filter_scores(const FilterTrace& trace, std::size_t marker_count) {
    Eigen::VectorXd rounds = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(marker_count));
    Eigen::VectorXd last = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(marker_count));
    for (const auto& round : trace.rounds)
        for (std::size_t k = 0; k < round.fitted.size(); ++k) {
            const auto j = static_cast<Eigen::Index>(round.fitted[k]);
            if (j >= rounds.size()) throw DomainError("filter_scores: marker index out of range");
            rounds[j] += 1.0;
            last[j] = round.state.etheta[static_cast<Eigen::Index>(k) + 1];
        }
    return 2.0 * rounds + last;
}

std::string filter_trace_tsv(const FilterTrace& trace, const Dataset& data, std::size_t top_k) {
    std::ostringstream out;
    out << "round\tfitted\tretained\tppl\tmax_residual\tdegraded\trank\tfrobenius_mse\ttop_etheta\n";
    for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
        const auto& round = trace.rounds[r];
        std::vector<std::size_t> order(round.fitted.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return round.state.etheta[static_cast<Eigen::Index>(a) + 1] >
                   round.state.etheta[static_cast<Eigen::Index>(b) + 1];
        });
        std::string top;
        for (std::size_t t = 0; t < std::min(top_k, order.size()); ++t) {
            if (t) top += ';';
            top += data.snps.at(round.fitted[order[t]]).id + '=' +
                   format_real(round.state.etheta[static_cast<Eigen::Index>(order[t]) + 1]);
        }
        out << r + 1 << '\t' << round.fitted.size() << '\t'
            << (round.retained.empty() ? round.fitted.size() : round.retained.size()) << '\t'
            << format_real(round.ppl) << '\t' << format_real(round.max_residual) << '\t'
            << (round.degraded ? 1 : 0) << '\t' << round.rank << '\t' << format_real(round.frobenius_mse) << '\t'
            << top << '\n';
    }
    return out.str();
}

} // namespace sboost
