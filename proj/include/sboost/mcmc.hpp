#pragma once

#include "sboost/dataset.hpp"
#include "sboost/em.hpp"
#include "sboost/linalg.hpp"
#include "sboost/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sboost {

struct GibbsState {
    Eigen::VectorXd beta;  ///< p+1 entries
    Eigen::VectorXd theta; ///< p+1 entries in {0,1}, theta[0] = 1
    double sigma2 = 1.0;
    Eigen::VectorXd omega; ///< n Polya-Gamma latents
};

struct InverseGammaParams {
    double shape = 0.0;
    double scale = 0.0;
};

/// Conditional IG(nu + (p+1)/2, lambda + 1/2 sum beta_j^2 (theta_j/kappa + 1 - theta_j)).
InverseGammaParams sigma2_conditional(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta,
                                      const Hyperparameters& hyper);

double sample_sigma2(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta, const Hyperparameters& hyper,
                     Rng& rng);

/// Independent Bernoulli(<theta_j>) draws; theta[0] is forced to 1.
Eigen::VectorXd sample_theta(const Eigen::VectorXd& beta, double sigma2, const Eigen::VectorXd& boosts,
                             const Hyperparameters& hyper, Rng& rng);

/// omega_i ~ PG(1, x_i^T beta), each from its own counter-based stream keyed by
/// (stream_key, i); the result does not depend on `threads`.
Eigen::VectorXd sample_omega(const Dataset& data, const Eigen::VectorXd& beta, std::uint64_t stream_key,
                             int threads = 1);
Eigen::VectorXd sample_omega(const Eigen::VectorXd& eta, std::uint64_t stream_key, int threads = 1);

/// Gibbs prior covariance diagonal sigma^2 (theta_j kappa + 1 - theta_j).
Eigen::VectorXd gibbs_prior_covariance(const Eigen::VectorXd& theta, double sigma2, double kappa);

/// beta ~ N(V^{-1} X^T (y - 1/2), V^{-1}), V = X^T Omega X + Sigma^{-1}, with X
/// replaced by its rank-l reconstruction throughout.
Eigen::VectorXd sample_beta(const Eigen::VectorXd& omega, const Eigen::VectorXd& theta, double sigma2,
                            const Dataset& data, const TruncatedDesign& design, const Hyperparameters& hyper,
                            Rng& rng);

struct GibbsOptions {
    int iters = 10000;
    std::optional<int> burnin; ///< default: 20% of iters
    std::uint64_t seed = 1;
    double rank_tol = 0.01;    ///< <= 0 keeps the full rank
    bool record_draws = true;
    int threads = 1;

    int resolved_burnin() const { return burnin.value_or(iters / 5); }
};

struct ChainSummary {
    Eigen::VectorXd pi_hat; ///< p+1 entries, pi_hat[0] = 1
    int retained = 0;
    int burnin = 0;
    std::uint64_t seed = 0;
    Eigen::Index rank = 0;
    double frobenius_mse = 0.0; ///< truncation residual behind the beta draws
};

struct DrawRecord {
    int iteration = 0;
    double sigma2 = 0.0;
    std::string theta_hex;
    Eigen::VectorXd beta;
};

struct GibbsResult {
    ChainSummary summary;
    std::vector<DrawRecord> draws; ///< post burn-in, when recorded
    GibbsState final_state;
};

/// One chain cycling sigma^2 -> theta -> omega -> beta. The linear predictor
/// behind omega uses the same rank-l design as the beta draw.
class GibbsSampler {
public:
    GibbsSampler(Dataset data, Eigen::VectorXd boosts, Hyperparameters hyper, const GibbsOptions& options,
                 std::optional<GibbsState> start = std::nullopt);

    void step();

    const GibbsState& state() const { return state_; }
    int iteration() const { return iteration_; }
    const TruncatedDesign& design() const { return design_; }

    /// Replaces the phenotype (design unchanged); used by joint-distribution tests.
    void set_phenotype(const Eigen::VectorXd& y);
    void set_state(GibbsState state);

private:
    Dataset data_;
    Eigen::VectorXd boosts_;
    Hyperparameters hyper_;
    GibbsOptions options_;
    TruncatedDesign design_;
    Rng rng_;
    std::uint64_t omega_key_;
    GibbsState state_;
    int iteration_ = 0;
};

/// Initial state from the prior mode: beta = 0, sigma^2 = lambda / (nu + 1), theta = e_0.
GibbsState gibbs_initial_state(const Dataset& data, const Hyperparameters& hyper);

GibbsResult gibbs_run(const Dataset& data, const Eigen::VectorXd& boosts, const Hyperparameters& hyper,
                      const GibbsOptions& options, std::optional<GibbsState> start = std::nullopt);

/// Marker indicators (entries 1..p) as hex, marker j at bit j-1, most significant digit first.
std::string theta_hex(const Eigen::VectorXd& theta);

/// Columnar draw log: iteration, sigma2, theta_hex, beta_0..beta_p.
std::string draws_tsv(const std::vector<DrawRecord>& draws);

} // namespace sboost
