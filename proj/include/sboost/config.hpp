#pragma once

#include "sboost/em.hpp"
#include "sboost/mcmc.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sboost {

struct RunConfig {
    std::string genotypes;
    std::string genes;      ///< optional; without genes every boost is 0
    std::string relevances; ///< optional; missing genes default to 1
    std::string out_dir = "sboost-out";
    std::uint64_t seed = 1;

    double maf_min = 0.05;
    double hwe_alpha = 1e-6;

    std::string phi_mode = "fit"; ///< "fit" per region or "fixed"
    double phi = 1.5e4;           ///< used when phi_mode = fixed
    long long region_gap = 30000;

    Hyperparameters em;
    Hyperparameters gibbs;
    FilterConfig filter;

    int gibbs_iters = 5000;
    int gibbs_burnin = -1; ///< negative: 20% of the iterations
    int gibbs_threads = 1;
    bool record_draws = true;

    double report_gamma = 1.0;
    std::vector<double> gammas; ///< EMBFDR grid; empty means the default grid

    /// Throws ConfigError on out-of-range values and, if requested, missing input files.
    void validate(bool check_paths = true) const;
    GibbsOptions gibbs_options() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>", RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Sets one key, e.g. set_config_value(cfg, "em.kappa", "100").
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Every key in canonical order with its resolved value.
std::string config_to_text(const RunConfig& config);

std::vector<std::string> config_keys();

} // namespace sboost
