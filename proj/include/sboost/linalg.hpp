#pragma once

#include <Eigen/Dense>

namespace sboost {

/// Thin SVD of a design matrix with the sign convention applied.
struct SvdFactors {
    Eigen::MatrixXd U;           ///< n x r
    Eigen::VectorXd singular;    ///< r values, non-increasing
    Eigen::MatrixXd V;           ///< (p+1) x r
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;

    /// ||X - U_l D_l V_l^T||_F^2 / (n (p+1)) from the discarded singular values.
    double truncation_error(Eigen::Index l) const;
};

/// Rank-l factors X ~ U_l D_l V_l^T. Immutable after construction.
struct TruncatedDesign {
    Eigen::MatrixXd U;        ///< n x l, orthonormal columns
    Eigen::VectorXd d;        ///< l singular values, positive and non-increasing
    Eigen::MatrixXd V;        ///< (p+1) x l, orthonormal columns
    double frobenius_mse = 0; ///< ||X - U D V^T||_F^2 / (n (p+1)), the per-entry squared error

    Eigen::Index rank() const { return d.size(); }
    Eigen::Index rows() const { return U.rows(); }
    Eigen::Index cols() const { return V.rows(); }
    Eigen::MatrixXd reconstruct() const;
};

/// Full thin SVD. The first nonzero entry of every right singular vector is
/// made positive so factorizations are deterministic.
SvdFactors thin_svd(const Eigen::MatrixXd& X);

/// Smallest l whose truncation error is below tol.
Eigen::Index select_rank(const SvdFactors& svd, double tol = 0.01);
Eigen::Index select_rank(const Eigen::MatrixXd& X, double tol = 0.01);

TruncatedDesign truncate_design(const SvdFactors& svd, Eigen::Index l);
TruncatedDesign truncate_design(const Eigen::MatrixXd& X, Eigen::Index l);

/// select_rank followed by truncate_design, sharing one SVD.
TruncatedDesign truncate_to_tolerance(const Eigen::MatrixXd& X, double tol = 0.01);

/// truncate_to_tolerance for tol > 0; otherwise the full numerical rank
/// (singular values above 1e-12 of the largest).
TruncatedDesign design_for_tolerance(const Eigen::MatrixXd& X, double tol);

/// Returns (S^T S + Sigma^{-1})^{-1} rhs through the l x l system
/// I_l + S Sigma S^T. `sigma` holds the diagonal of Sigma (all > 0).
Eigen::MatrixXd woodbury_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma,
                               const Eigen::MatrixXd& rhs);
Eigen::VectorXd woodbury_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma,
                               const Eigen::VectorXd& rhs);

/// Cholesky of I_l + S Sigma S^T, reusable for several right-hand sides and
/// for drawing from N(0, (S^T S + Sigma^{-1})^{-1}).
class WoodburySystem {
public:
    WoodburySystem(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma);

    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
    /// Maps independent draws u ~ N(0, Sigma), delta ~ N(0, I_l) to a draw
    /// with covariance (S^T S + Sigma^{-1})^{-1}.
    Eigen::VectorXd correlate(const Eigen::VectorXd& u, const Eigen::VectorXd& delta) const;

    double jitter() const { return jitter_; }

private:
    Eigen::MatrixXd S_;
    Eigen::VectorXd sigma_;
    Eigen::LLT<Eigen::MatrixXd> inner_;
    double jitter_ = 0.0;
};

/// S = C_w V_l^T where C_w is the upper Cholesky factor of D_l U_l^T W U_l D_l,
/// so S^T S approximates X^T W X. `weights` is the diagonal of W (>= 0).
Eigen::MatrixXd weighted_cholesky(const TruncatedDesign& design, const Eigen::VectorXd& weights);

} // namespace sboost
