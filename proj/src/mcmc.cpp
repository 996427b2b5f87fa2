#include "sboost/mcmc.hpp"

#include "sboost/error.hpp"
#include "sboost/polya_gamma.hpp"
#include "sboost/tsv.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <thread>

namespace sboost {

InverseGammaParams sigma2_conditional(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta,
                                      const Hyperparameters& hyper) {
    if (theta.size() != beta.size()) throw ConfigError("sigma2_conditional: theta and beta lengths differ");
    const Eigen::ArrayXd w = theta.array() / hyper.kappa + 1.0 - theta.array();
    return {hyper.nu + 0.5 * static_cast<double>(beta.size()),
            hyper.lambda + 0.5 * (beta.array().square() * w).sum()};
}

double sample_sigma2(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta, const Hyperparameters& hyper,
                     Rng& rng) {
    const auto ig = sigma2_conditional(theta, beta, hyper);
    std::gamma_distribution<double> gamma(ig.shape, 1.0 / ig.scale);
    return 1.0 / gamma(rng);
}

Eigen::VectorXd sample_theta(const Eigen::VectorXd& beta, double sigma2, const Eigen::VectorXd& boosts,
                             const Hyperparameters& hyper, Rng& rng) {
    const Eigen::VectorXd prob = e_step(beta, sigma2, boosts, hyper);
    Eigen::VectorXd theta(prob.size());
    theta[0] = 1.0;
    for (Eigen::Index j = 1; j < prob.size(); ++j) theta[j] = uniform_open(rng) < prob[j] ? 1.0 : 0.0;
    return theta;
}

Eigen::VectorXd sample_omega(const Dataset& data, const Eigen::VectorXd& beta, std::uint64_t stream_key,
                             int threads) {
    return sample_omega(Eigen::VectorXd(data.X * beta), stream_key, threads);
}

Eigen::VectorXd sample_omega(const Eigen::VectorXd& eta, std::uint64_t stream_key, int threads) {
    Eigen::VectorXd omega(eta.size());
    auto work = [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index i = lo; i < hi; ++i) {
            SplitMix64 stream(mix_key(stream_key, static_cast<std::uint64_t>(i)));
            omega[i] = sample_pg(eta[i], stream);
        }
    };
    const Eigen::Index n = eta.size();
    const auto workers = static_cast<Eigen::Index>(std::max(1, threads));
    if (workers == 1 || n < 64) {
        work(0, n);
        return omega;
    }
    std::vector<std::jthread> pool;
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (Eigen::Index lo = 0; lo < n; lo += chunk) pool.emplace_back(work, lo, std::min(n, lo + chunk));
    pool.clear();
    return omega;
}

Eigen::VectorXd gibbs_prior_covariance(const Eigen::VectorXd& theta, double sigma2, double kappa) {
    return (sigma2 * (theta.array() * kappa + 1.0 - theta.array())).matrix();
}

Eigen::VectorXd sample_beta(const Eigen::VectorXd& omega, const Eigen::VectorXd& theta, double sigma2,
                            const Dataset& data, const TruncatedDesign& design, const Hyperparameters& hyper,
                            Rng& rng) {
    if ((omega.array() <= 0.0).any()) throw DomainError("sample_beta: omega must be positive");
    const Eigen::VectorXd sigma = gibbs_prior_covariance(theta, sigma2, hyper.kappa);
    const Eigen::MatrixXd S = weighted_cholesky(design, omega);
    const WoodburySystem system(S, sigma);

    const Eigen::VectorXd kappa_y = data.y.array() - 0.5;
    const Eigen::VectorXd score = design.V * design.d.cwiseProduct(design.U.transpose() * kappa_y);
    const Eigen::VectorXd mean = system.solve(Eigen::MatrixXd(score));

    std::normal_distribution<double> normal;
    Eigen::VectorXd u(sigma.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = std::sqrt(sigma[j]) * normal(rng);
    Eigen::VectorXd delta(S.rows());
    for (Eigen::Index k = 0; k < delta.size(); ++k) delta[k] = normal(rng);
    return mean + system.correlate(u, delta);
}

GibbsState gibbs_initial_state(const Dataset& data, const Hyperparameters& hyper) {
    GibbsState s;
    s.beta = Eigen::VectorXd::Zero(data.X.cols());
    s.theta = Eigen::VectorXd::Zero(data.X.cols());
    s.theta[0] = 1.0;
    s.sigma2 = hyper.lambda / (hyper.nu + 1.0);
    s.omega = Eigen::VectorXd::Constant(data.n(), 0.25);
    return s;
}

GibbsSampler::GibbsSampler(Dataset data, Eigen::VectorXd boosts, Hyperparameters hyper, const GibbsOptions& options,
                           std::optional<GibbsState> start)
    : data_(std::move(data)),
      boosts_(std::move(boosts)),
      hyper_(hyper),
      options_(options),
      design_(design_for_tolerance(data_.X, options.rank_tol)),
      rng_(derive_seed(options.seed, "chain")),
      omega_key_(derive_seed(options.seed, "omega")),
      state_(start ? std::move(*start) : gibbs_initial_state(data_, hyper_)) {
    hyper_.validate();
    if (boosts_.size() != data_.p()) throw ConfigError("gibbs: boosts are not aligned with the markers");
    if (state_.beta.size() != data_.X.cols() || state_.theta.size() != data_.X.cols())
        throw ConfigError("gibbs: starting state has the wrong dimension");
    if (state_.omega.size() != data_.n()) state_.omega = Eigen::VectorXd::Constant(data_.n(), 0.25);
    state_.theta[0] = 1.0;
}

void GibbsSampler::step() {
    ++iteration_;
    state_.sigma2 = sample_sigma2(state_.theta, state_.beta, hyper_, rng_);
    state_.theta = sample_theta(state_.beta, state_.sigma2, boosts_, hyper_, rng_);
    const Eigen::VectorXd eta = design_.U * design_.d.cwiseProduct(design_.V.transpose() * state_.beta);
    state_.omega = sample_omega(eta, mix_key(omega_key_, static_cast<std::uint64_t>(iteration_)), options_.threads);
    state_.beta = sample_beta(state_.omega, state_.theta, state_.sigma2, data_, design_, hyper_, rng_);
}

void GibbsSampler::set_phenotype(const Eigen::VectorXd& y) {
    if (y.size() != data_.n()) throw ConfigError("gibbs: phenotype length mismatch");
    data_.y = y;
}

void GibbsSampler::set_state(GibbsState state) {
    if (state.beta.size() != data_.X.cols() || state.theta.size() != data_.X.cols())
        throw ConfigError("gibbs: state has the wrong dimension");
    state_ = std::move(state);
}

GibbsResult gibbs_run(const Dataset& data, const Eigen::VectorXd& boosts, const Hyperparameters& hyper,
                      const GibbsOptions& options, std::optional<GibbsState> start) {
    const int burnin = options.resolved_burnin();
    if (burnin < 0 || options.iters <= burnin)
        throw ConfigError("gibbs_run: iterations must exceed burn-in (iters=" + std::to_string(options.iters) +
                          ", burnin=" + std::to_string(burnin) + ")");

    GibbsSampler sampler(data, boosts, hyper, options, std::move(start));
    GibbsResult result;
    result.summary.burnin = burnin;
    result.summary.seed = options.seed;
    result.summary.rank = sampler.design().rank();
    result.summary.frobenius_mse = sampler.design().frobenius_mse;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(data.X.cols());

    for (int it = 1; it <= options.iters; ++it) {
        sampler.step();
        if (it <= burnin) continue;
        const auto& s = sampler.state();
        counts += s.theta;
        ++result.summary.retained;
        if (options.record_draws) result.draws.push_back({it, s.sigma2, theta_hex(s.theta), s.beta});
    }
    result.summary.pi_hat = counts / static_cast<double>(result.summary.retained);
    result.summary.pi_hat[0] = 1.0;
    result.final_state = sampler.state();
    return result;
}

std::string theta_hex(const Eigen::VectorXd& theta) {
    const Eigen::Index p = theta.size() - 1;
    const Eigen::Index digits = std::max<Eigen::Index>(1, (p + 3) / 4);
    std::string out(static_cast<std::size_t>(digits), '0');
    static constexpr char kHex[] = "0123456789abcdef";
    for (Eigen::Index d = 0; d < digits; ++d) {
        int nibble = 0;
        for (int b = 0; b < 4; ++b) {
            const Eigen::Index marker = 4 * d + b + 1;
            if (marker <= p && theta[marker] != 0.0) nibble |= 1 << b;
        }
        out[static_cast<std::size_t>(digits - 1 - d)] = kHex[nibble];
    }
    return out;
}

std::string draws_tsv(const std::vector<DrawRecord>& draws) {
    std::ostringstream out;
    out << "iteration\tsigma2\ttheta_hex";
    const Eigen::Index width = draws.empty() ? 0 : draws.front().beta.size();
    for (Eigen::Index j = 0; j < width; ++j) out << "\tbeta_" << j;
    out << '\n';
    for (const auto& d : draws) {
        out << d.iteration << '\t' << format_real(d.sigma2) << '\t' << d.theta_hex;
        for (Eigen::Index j = 0; j < d.beta.size(); ++j) out << '\t' << format_real(d.beta[j]);
        out << '\n';
    }
    return out.str();
}

} // namespace sboost
