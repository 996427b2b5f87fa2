#include "sboost/linalg.hpp"

#include "sboost/error.hpp"

#include <cmath>
#include <sstream>

namespace sboost {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterLimit = 1e-6;
constexpr double kMinRcond = 1e-14;

void check_sigma(const Eigen::VectorXd& sigma) {
    for (Eigen::Index j = 0; j < sigma.size(); ++j)
        if (!(sigma[j] > 0.0) || !std::isfinite(sigma[j]))
            throw DomainError("woodbury: prior covariance entries must be positive and finite");
}

} // namespace

double SvdFactors::truncation_error(Eigen::Index l) const {
    double tail = 0.0;
    for (Eigen::Index i = singular.size() - 1; i >= l; --i) tail += singular[i] * singular[i];
    return tail / (static_cast<double>(rows) * static_cast<double>(cols));
}

Eigen::MatrixXd TruncatedDesign::reconstruct() const {
    return U * d.asDiagonal() * V.transpose();
}

SvdFactors thin_svd(const Eigen::MatrixXd& X) {
    if (X.size() == 0) throw DomainError("thin_svd: empty matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactors out;
    out.U = svd.matrixU();
    out.singular = svd.singularValues();
    out.V = svd.matrixV();
    out.rows = X.rows();
    out.cols = X.cols();
    for (Eigen::Index k = 0; k < out.V.cols(); ++k) {
        const double scale = out.V.col(k).cwiseAbs().maxCoeff();
        for (Eigen::Index j = 0; j < out.V.rows(); ++j) {
            if (std::abs(out.V(j, k)) <= 1e-12 * scale) continue;
            if (out.V(j, k) < 0.0) {
                out.V.col(k) *= -1.0;
                out.U.col(k) *= -1.0;
            }
            break;
        }
    }
    return out;
}

Eigen::Index select_rank(const SvdFactors& svd, double tol) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("select_rank: tol must be positive and finite");
    const Eigen::Index r = svd.singular.size();
    for (Eigen::Index l = 1; l < r; ++l)
        if (svd.truncation_error(l) < tol) return l;
    return r;
}

Eigen::Index select_rank(const Eigen::MatrixXd& X, double tol) { return select_rank(thin_svd(X), tol); }

TruncatedDesign truncate_design(const SvdFactors& svd, Eigen::Index l) {
    if (l < 1 || l > svd.singular.size())
        throw DomainError("truncate_design: rank " + std::to_string(l) + " outside [1, " +
                          std::to_string(svd.singular.size()) + "]");
    if (!(svd.singular[l - 1] > 0.0))
        throw DomainError("truncate_design: rank " + std::to_string(l) +
                          " exceeds the numerical rank of the design");
    TruncatedDesign out;
    out.U = svd.U.leftCols(l);
    out.d = svd.singular.head(l);
    out.V = svd.V.leftCols(l);
    out.frobenius_mse = svd.truncation_error(l);
    return out;
}

TruncatedDesign truncate_design(const Eigen::MatrixXd& X, Eigen::Index l) {
    return truncate_design(thin_svd(X), l);
}

TruncatedDesign truncate_to_tolerance(const Eigen::MatrixXd& X, double tol) {
    const auto svd = thin_svd(X);
    Eigen::Index l = select_rank(svd, tol);
    // Exactly-zero trailing singular values carry no information.
    while (l > 1 && !(svd.singular[l - 1] > 0.0)) --l;
    return truncate_design(svd, l);
}

TruncatedDesign design_for_tolerance(const Eigen::MatrixXd& X, double tol) {
    if (tol > 0.0) return truncate_to_tolerance(X, tol);
    const auto svd = thin_svd(X);
    Eigen::Index l = svd.singular.size();
    while (l > 1 && !(svd.singular[l - 1] > 1e-12 * svd.singular[0])) --l;
    return truncate_design(svd, l);
}

WoodburySystem::WoodburySystem(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma)
    : S_(S), sigma_(sigma) {
    if (S.cols() != sigma.size())
        throw ConfigError("woodbury: S has " + std::to_string(S.cols()) + " columns but Sigma has " +
                          std::to_string(sigma.size()) + " entries");
    check_sigma(sigma);

    const Eigen::Index l = S.rows();
    Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(l, l);
    inner.noalias() += S * sigma.asDiagonal() * S.transpose();
    const double scale = l ? std::max(1.0, inner.diagonal().maxCoeff()) : 1.0;

    inner_.compute(inner);
    for (double j = kJitterStart; inner_.info() != Eigen::Success || inner_.rcond() < kMinRcond; j *= 10.0) {
        if (j > kJitterLimit * (1.0 + 1e-9)) {
            std::ostringstream msg;
            msg << "woodbury: I_l + S Sigma S^T is numerically singular (l=" << l
                << ", max diagonal=" << scale << ", rcond=" << inner_.rcond() << ")";
            throw NumericalError(msg.str());
        }
        jitter_ = j * scale;
        inner_.compute(inner + jitter_ * Eigen::MatrixXd::Identity(l, l));
    }
}

Eigen::MatrixXd WoodburySystem::solve(const Eigen::MatrixXd& rhs) const {
    if (rhs.rows() != sigma_.size()) throw ConfigError("woodbury: right-hand side has the wrong length");
    const Eigen::MatrixXd sr = sigma_.asDiagonal() * rhs;
    if (S_.rows() == 0) return sr;
    const Eigen::MatrixXd inner = inner_.solve(S_ * sr);
    return sr - sigma_.asDiagonal() * (S_.transpose() * inner);
}

Eigen::VectorXd WoodburySystem::correlate(const Eigen::VectorXd& u, const Eigen::VectorXd& delta) const {
    if (S_.rows() == 0) return u;
    const Eigen::VectorXd v = S_ * u + delta;
    const Eigen::VectorXd w = inner_.solve(-v);
    return u + sigma_.asDiagonal() * (S_.transpose() * w);
}

Eigen::MatrixXd woodbury_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma,
                               const Eigen::MatrixXd& rhs) {
    return WoodburySystem(S, sigma).solve(rhs);
}

Eigen::VectorXd woodbury_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma,
                               const Eigen::VectorXd& rhs) {
    return WoodburySystem(S, sigma).solve(rhs);
}

Eigen::MatrixXd weighted_cholesky(const TruncatedDesign& design, const Eigen::VectorXd& weights) {
    if (weights.size() != design.rows())
        throw ConfigError("weighted_cholesky: one weight per row required");
    if ((weights.array() < 0.0).any() || !weights.allFinite())
        throw DomainError("weighted_cholesky: weights must be finite and non-negative");

    const Eigen::Index l = design.rank();
    const Eigen::MatrixXd B = design.U * design.d.asDiagonal();
    Eigen::MatrixXd gram = B.transpose() * weights.asDiagonal() * B;
    gram = 0.5 * (gram + gram.transpose());

    const double scale = l ? gram.diagonal().maxCoeff() : 0.0;
    if (!(scale > 0.0)) return Eigen::MatrixXd::Zero(l, design.cols());

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    for (double j = kJitterStart; llt.info() != Eigen::Success; j *= 10.0) {
        if (j > kJitterLimit * (1.0 + 1e-9))
            throw NumericalError("weighted_cholesky: weighted Gram matrix is not positive definite "
                                 "within jitter tolerance (l=" + std::to_string(l) + ")");
        llt.compute(gram + j * scale * Eigen::MatrixXd::Identity(l, l));
    }
    const Eigen::MatrixXd upper = llt.matrixU();
    return upper * design.V.transpose();
}

} // namespace sboost
