#pragma once

#include "sboost/dataset.hpp"
#include "sboost/genome.hpp"
#include "sboost/linalg.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace sboost {

/// Prior constants of the spike-and-slab model for one fitting stage.
struct Hyperparameters {
    double kappa = 1000.0; ///< slab / spike variance ratio, > 1
    double nu = 5.0;       ///< inverse-gamma shape of sigma^2
    double lambda = 0.06;  ///< inverse-gamma scale of sigma^2
    double xi0 = -4.0;     ///< baseline prior log-odds of association
    double xi1 = 2.0;      ///< log-odds added by a full gene boost, >= 0
    double phi = 1.5e4;    ///< gene-weight range in base pairs
    double s = 3.0;        ///< minimum number of spike standard deviations

    void validate() const;
};

struct EmState {
    Eigen::VectorXd beta;   ///< p+1 entries, index 0 is the intercept
    double sigma2 = 0.0;
    Eigen::VectorXd etheta; ///< <theta_j>, entry 0 pinned to 1
    int iterations = 0;
    bool converged = false;
    bool diverged = false;  ///< the ascent trace dropped after stabilizing
    std::vector<double> log_joint; ///< objective after each iteration, entry 0 at the start
};

struct EmOptions {
    int max_iter = 200;
    double tol = 1e-6;        ///< on max |beta_new - beta_old|
    double rank_tol = 0.01;   ///< truncation tolerance; <= 0 keeps the full rank
    int max_halvings = 30;    ///< backtracking steps when a beta update would not ascend
};

/// E-step: <theta_j> for j >= 1 from the closed-form log-odds; <theta_0> = 1.
Eigen::VectorXd e_step(const Eigen::VectorXd& beta, double sigma2, const Eigen::VectorXd& boosts,
                       const Hyperparameters& hyper);

/// Conditional maximizer of sigma^2 (inverse-gamma mode).
double cm_sigma(const Eigen::VectorXd& beta, const Eigen::VectorXd& etheta, const Hyperparameters& hyper);

/// Diagonal of the expected prior covariance sigma^2 / (<theta>/kappa + 1 - <theta>).
Eigen::VectorXd em_prior_covariance(const Eigen::VectorXd& etheta, double sigma2, double kappa);

/// One IRLS step for beta against the expected prior, with X^T W X replaced
/// by S^T S from the truncated design. The likelihood terms use data.X exactly.
Eigen::VectorXd cm_beta(const TruncatedDesign& design, const Dataset& data, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& etheta, double sigma2, const Hyperparameters& hyper);

/// Sum_i y_i eta_i - log(1 + exp(eta_i)).
double log_likelihood(const Dataset& data, const Eigen::VectorXd& beta);

/// Log joint with theta replaced by <theta> (up to constants).
double expected_log_joint(const Dataset& data, const Eigen::VectorXd& etheta, const Eigen::VectorXd& beta,
                          double sigma2, const Hyperparameters& hyper);

/// Log posterior of (beta, sigma^2) with theta summed out under its boosted
/// prior. ECM never decreases it.
double log_posterior(const Dataset& data, const Eigen::VectorXd& beta, double sigma2,
                     const Eigen::VectorXd& boosts, const Hyperparameters& hyper);

/// Starting point: beta = 0 and sigma^2 at the prior mode.
EmState em_initial_state(const Dataset& data, const Hyperparameters& hyper);

/// Alternates e_step, cm_sigma and cm_beta until max |delta beta| < tol or max_iter.
EmState em_fit(const Dataset& data, const TruncatedDesign& design, const Eigen::VectorXd& boosts,
               const Hyperparameters& hyper, const EmOptions& options = {},
               std::optional<EmState> start = std::nullopt);

/// As above, truncating data.X at options.rank_tol first.
EmState em_fit(const Dataset& data, const Eigen::VectorXd& boosts, const Hyperparameters& hyper,
               const EmOptions& options = {}, std::optional<EmState> start = std::nullopt);

/// Fitted probabilities logit^{-1}(X beta).
Eigen::VectorXd fitted_probabilities(const Dataset& data, const Eigen::VectorXd& beta);

double max_residual(const Dataset& data, const Eigen::VectorXd& beta);

/// True iff some individual has |y_i - yhat_i| > 0.5.
bool should_stop(const EmState& state, const Dataset& data);

/// Squared-error predictive loss sum (y - yhat)^2 + yhat (1 - yhat).
double ppl(const EmState& state, const Dataset& data);

struct FilterResult {
    Dataset data;                   ///< reduced dataset
    std::vector<std::size_t> kept;  ///< surviving marker indices into the input dataset
    std::vector<std::size_t> removed;
};

/// Drops floor(fraction * p) markers with the lowest <theta_j>; ties remove the
/// lower index first. The intercept is never removed.
FilterResult filter_round(const EmState& state, const Dataset& data, double fraction = 0.25);

struct FilterConfig {
    double fraction = 0.25;
    int max_rounds = 20;
    /// Filtering never goes below this many markers; unset means max(10, n/10).
    std::optional<std::size_t> min_snps;
    bool stop_on_degrade = true;
    std::size_t top_k = 10; ///< entries listed per round in the TSV trace
    EmOptions em;
};

enum class FilterStop { MaxRounds, Degraded, Floor };

std::string to_string(FilterStop reason);

struct FilterRound {
    std::vector<std::size_t> fitted;   ///< original marker indices fitted this round
    EmState state;
    double ppl = 0.0;
    double max_residual = 0.0;
    bool degraded = false;
    std::vector<std::size_t> retained; ///< original indices kept by this round's filter
    Eigen::Index rank = 0;
    double frobenius_mse = 0.0;
};

struct FilterTrace {
    std::vector<FilterRound> rounds;
    std::vector<std::size_t> survivors; ///< original marker indices handed to the sampler
    std::optional<EmState> survivor_state; ///< EM fit on exactly the survivors, if any
    FilterStop reason = FilterStop::MaxRounds;
};

/// Repeated em_fit / filter_round on shrinking marker sets. When a fit
/// degrades, the survivors revert to the previous round's fitted set.
FilterTrace em_filter_pipeline(const Dataset& data, const BoostVector& boosts, const Hyperparameters& hyper,
                               const FilterConfig& config = {});

/// Ranking score per original marker: 2 * (rounds the marker was fitted in)
/// plus its last <theta_j>, so markers that survive longer always rank higher.
Eigen::VectorXd filter_scores(const FilterTrace& trace, std::size_t marker_count);

/// Per-round TSV: round, fitted, retained, ppl, max_residual, degraded, top_etheta.
std::string filter_trace_tsv(const FilterTrace& trace, const Dataset& data, std::size_t top_k = 10);

} // namespace sboost
