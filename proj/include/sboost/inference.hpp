#pragma once

#include "sboost/dataset.hpp"
#include "sboost/em.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace sboost {

/// Gain gamma > 0 of a true positive relative to a true negative.
struct GainConfig {
    double gamma = 1.0;

    /// Selection threshold 1 / (1 + gamma).
    double threshold() const { return 1.0 / (1.0 + gamma); }
    static GainConfig from_threshold(double threshold);
    void validate() const;
};

/// Position-wise centroid: marker j selected iff pi_j >= 1/(1+gamma).
/// `pi` holds marker probabilities only (no intercept).
std::vector<bool> centroid(const Eigen::VectorXd& pi, double gamma);

/// Expected false discovery proportion sum sel_j (1 - pi_j) / sum sel_j.
/// Empty selections have no defined value and yield nullopt.
std::optional<double> bfdr(const Eigen::VectorXd& pi, const std::vector<bool>& selection);

struct EmbfdrPoint {
    double gamma = 0.0;
    double threshold = 0.0;
    std::optional<double> embfdr; ///< nullopt when nothing is selected
    std::size_t retained = 0;
};

/// Centroid on <theta> followed by bfdr with <theta>, for every gamma.
std::vector<EmbfdrPoint> embfdr_curve(const Eigen::VectorXd& etheta, const std::vector<double>& gammas);

/// Gammas whose thresholds are evenly spaced in logit between 0.02 and 0.5,
/// ordered by increasing gamma.
std::vector<double> default_gamma_grid(int points = 10);

/// Largest xi0 (for the given gamma) that leaves a non-negative xi1 bound:
/// 1/2 log kappa - log gamma - (s^2/2)(1 - 1/kappa).
double xi0_upper_bound(double kappa, double gamma, double s);

/// Upper bound on xi1 so every marker needs at least s spike standard
/// deviations to be selected. Throws ConfigError when negative.
double xi1_bound(double kappa, double gamma, double s, double xi0);

/// xi1_bound at kappa = s^2, its minimum over kappa.
double xi1_bound_stringent(double gamma, double s, double xi0);

struct BetaThreshold {
    double s_squared = 0.0;
    double lower = 0.0; ///< -sigma s_j
    double upper = 0.0; ///< +sigma s_j
    bool always_selected = false; ///< s_j^2 < 0: the threshold collapses
};

/// Per-marker selection bounds +-sigma s_j on beta_j.
std::vector<BetaThreshold> beta_thresholds(double sigma2, const Hyperparameters& hyper,
                                           const Eigen::VectorXd& boosts, double gamma);

struct KappaScanRow {
    double kappa = 0.0;
    EmbfdrPoint point;
};

/// em_fit once per kappa (in parallel), then embfdr_curve over the gammas.
std::vector<KappaScanRow> kappa_scan(const Dataset& data, const Eigen::VectorXd& boosts,
                                     const Hyperparameters& hyper_base, const std::vector<double>& kappas,
                                     const std::vector<double>& gammas, const EmOptions& options = {});

std::string kappa_scan_tsv(const std::vector<KappaScanRow>& rows);
std::string embfdr_tsv(const std::vector<EmbfdrPoint>& curve);

struct SelectionReport {
    std::vector<std::string> ids;
    Eigen::VectorXd probability;  ///< pi_hat or <theta>, markers only
    std::vector<bool> selected;
    double gamma = 1.0;
    std::optional<double> fdr;    ///< BFDR or EMBFDR of the selection
    std::string metric = "bfdr";
    std::vector<BetaThreshold> thresholds; ///< optional, aligned with ids
};

SelectionReport make_selection_report(std::vector<std::string> ids, const Eigen::VectorXd& probability,
                                      double gamma, std::string metric = "bfdr");

/// TSV keyed by SNP id; the metric value is repeated in a trailing comment line.
std::string selection_report_tsv(const SelectionReport& report);

} // namespace sboost
