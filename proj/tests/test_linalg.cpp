#include "doctest.h"

#include "sboost/error.hpp"
#include "sboost/linalg.hpp"
#include "sboost/rng.hpp"

#include <cmath>
#include <random>

using namespace sboost;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

Eigen::VectorXd random_positive(Eigen::Index k, Rng& rng) {
    std::uniform_real_distribution<double> u(0.05, 5.0);
    Eigen::VectorXd v(k);
    for (Eigen::Index i = 0; i < k; ++i) v[i] = u(rng);
    return v;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / std::max(1e-300, b.norm());
}

// Dense oracle: invert S^T S + Sigma^{-1} directly.
Eigen::MatrixXd dense_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma, const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd A = S.transpose() * S;
    A.diagonal() += sigma.cwiseInverse();
    return A.inverse() * rhs;
}

} // namespace

TEST_CASE("select_rank finds exact low rank") {
    Rng rng(1);
    const Eigen::MatrixXd X = random_matrix(12, 2, rng) * random_matrix(2, 9, rng);
    CHECK(select_rank(X, 1e-8) == 2);
    CHECK(select_rank(X, 1e-3) <= 2);
}

TEST_CASE("select_rank on equal singular values follows the tail sums") {
    // 6x6 scaled orthogonal matrix: every singular value equals 3.
    Rng rng(2);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(6, 6, rng));
    const Eigen::MatrixXd X = 3.0 * Eigen::MatrixXd(qr.householderQ());
    // Tail mass after keeping l is 9 (6 - l), over 36 entries.
    for (double tol : {1.1, 0.8, 0.6, 0.3, 0.1}) {
        Eigen::Index expect = 6;
        for (Eigen::Index l = 1; l < 6; ++l)
            if (9.0 * (6.0 - l) / 36.0 < tol) {
                expect = l;
                break;
            }
        CHECK(select_rank(X, tol) == expect);
    }
}

TEST_CASE("select_rank edge tolerances") {
    Rng rng(3);
    const Eigen::MatrixXd X = random_matrix(7, 5, rng);
    CHECK(select_rank(X, 1e-12) == 5);
    CHECK_THROWS_AS(select_rank(X, std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(select_rank(X, 0.0), DomainError);
    Eigen::Index previous = 100;
    for (double tol : {1e-6, 1e-3, 1e-2, 1e-1, 1.0}) {
        const auto l = select_rank(X, tol);
        CHECK(l <= previous);
        previous = l;
    }
}

TEST_CASE("truncate_design of a rank-one matrix") {
    Eigen::VectorXd u(3), v(4);
    u << 1, 2, 2;
    v << 1, -1, 1, -1;
    u.normalize();
    v.normalize();
    const Eigen::MatrixXd X = 3.0 * u * v.transpose();
    const auto t = truncate_design(X, 1);
    CHECK(t.d[0] == doctest::Approx(3.0));
    CHECK(std::abs(std::abs(t.U.col(0).dot(u)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(t.V.col(0).dot(v)) - 1.0) < 1e-12);
    CHECK(t.V(0, 0) > 0.0);
    CHECK(t.frobenius_mse < 1e-14);
}

TEST_CASE("truncate_design invariants and an independent SVD oracle") {
    Rng rng(4);
    const Eigen::MatrixXd X = random_matrix(5, 8, rng);
    const auto t = truncate_design(X, 3);
    CHECK((t.U.transpose() * t.U - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);
    CHECK((t.V.transpose() * t.V - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);
    CHECK(t.d[0] >= t.d[1]);
    CHECK(t.d[1] >= t.d[2]);
    CHECK(t.d[2] > 0.0);

    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(X);
    const auto s = oracle.singularValues();
    const double expect = (s[3] * s[3] + s[4] * s[4]) / (5.0 * 8.0);
    CHECK(std::abs(t.frobenius_mse - expect) < 1e-10);
    CHECK(std::abs((X - t.reconstruct()).squaredNorm() / 40.0 - expect) < 1e-10);

    const auto full = truncate_design(X, 5);
    CHECK(full.frobenius_mse < 1e-14);
    CHECK_THROWS_AS(truncate_design(X, 0), DomainError);
    CHECK_THROWS_AS(truncate_design(X, 6), DomainError);
}

TEST_CASE("truncate_design is Eckart-Young optimal against other rank-l factorizations") {
    Rng rng(5);
    const Eigen::MatrixXd X = random_matrix(9, 7, rng);
    const auto t = truncate_design(X, 3);
    const double best = (X - t.reconstruct()).norm();
    for (int k = 0; k < 20; ++k) {
        // Project onto a random 3-dimensional column space: optimal for that space, not globally.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(9, 3, rng));
        const Eigen::MatrixXd Q = Eigen::MatrixXd(qr.householderQ()).leftCols(3);
        CHECK(best <= (X - Q * (Q.transpose() * X)).norm() + 1e-12);
    }
}

TEST_CASE("sign convention is deterministic") {
    Rng rng(6);
    const Eigen::MatrixXd X = random_matrix(6, 4, rng);
    const auto a = thin_svd(X), b = thin_svd(X);
    CHECK((a.V - b.V).norm() == 0.0);
    for (Eigen::Index k = 0; k < a.V.cols(); ++k) {
        Eigen::Index j = 0;
        while (std::abs(a.V(j, k)) < 1e-12) ++j;
        CHECK(a.V(j, k) > 0.0);
    }
}

TEST_CASE("woodbury collapses to Sigma when S is zero") {
    Rng rng(7);
    const Eigen::VectorXd sigma = random_positive(6, rng);
    const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2, 6);
    const Eigen::VectorXd rhs = random_matrix(6, 1, rng);
    CHECK((woodbury_solve(S, sigma, rhs) - sigma.cwiseProduct(rhs)).norm() < 1e-14);
}

TEST_CASE("woodbury rank one matches Sherman-Morrison") {
    Rng rng(8);
    for (int k = 0; k < 20; ++k) {
        const Eigen::VectorXd s = random_matrix(7, 1, rng);
        const Eigen::VectorXd sigma = random_positive(7, rng);
        const Eigen::VectorXd b = random_matrix(7, 1, rng);
        // (Sigma^{-1} + s s^T)^{-1} b = Sigma b - Sigma s (s^T Sigma b) / (1 + s^T Sigma s)
        const Eigen::VectorXd sb = sigma.cwiseProduct(b), ss = sigma.cwiseProduct(s);
        const Eigen::VectorXd expect = sb - ss * (s.dot(sb) / (1.0 + s.dot(ss)));
        const Eigen::VectorXd got = woodbury_solve(Eigen::MatrixXd(s.transpose()), sigma, b);
        CHECK(relative_error(got, expect) < 1e-10);
    }
}

TEST_CASE("woodbury matches dense inversion on random instances") {
    Rng rng(9);
    std::uniform_int_distribution<int> lsize(1, 8), psize(2, 40);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = psize(rng), l = std::min(lsize(rng), p);
        const Eigen::MatrixXd S = random_matrix(l, p, rng);
        const Eigen::VectorXd sigma = random_positive(p, rng);
        const Eigen::MatrixXd rhs = random_matrix(p, 3, rng);
        CHECK(relative_error(woodbury_solve(S, sigma, rhs), dense_solve(S, sigma, rhs)) < 1e-8);
    }
    const Eigen::MatrixXd S = random_matrix(4, 10, rng);
    const Eigen::VectorXd sigma = random_positive(10, rng);
    const Eigen::VectorXd rhs = random_matrix(10, 1, rng);
    CHECK(relative_error(woodbury_solve(S, sigma, rhs), dense_solve(S, sigma, rhs)) < 1e-8);
}

TEST_CASE("woodbury rejects bad inputs") {
    const Eigen::MatrixXd S = Eigen::MatrixXd::Ones(1, 3);
    Eigen::VectorXd sigma(3);
    sigma << 1, 0, 1;
    CHECK_THROWS_AS(WoodburySystem(S, sigma), DomainError);
    CHECK_THROWS_AS(WoodburySystem(S, Eigen::VectorXd::Ones(2)), ConfigError);
    sigma << 1, std::nan(""), 1;
    CHECK_THROWS_AS(WoodburySystem(S, sigma), DomainError);
}

TEST_CASE("correlate produces the posterior covariance") {
    // The map (u, delta) -> u + Sigma S^T w is linear, so its covariance is
    // A Sigma A^T + B B^T with A, B read off by feeding unit vectors.
    Rng rng(10);
    const Eigen::MatrixXd S = random_matrix(3, 6, rng);
    const Eigen::VectorXd sigma = random_positive(6, rng);
    const WoodburySystem sys(S, sigma);
    Eigen::MatrixXd A(6, 6), B(6, 3);
    for (int j = 0; j < 6; ++j) A.col(j) = sys.correlate(Eigen::VectorXd::Unit(6, j), Eigen::VectorXd::Zero(3));
    for (int k = 0; k < 3; ++k) B.col(k) = sys.correlate(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Unit(3, k));
    const Eigen::MatrixXd cov = A * sigma.asDiagonal() * A.transpose() + B * B.transpose();
    Eigen::MatrixXd precision = S.transpose() * S;
    precision.diagonal() += sigma.cwiseInverse();
    CHECK(relative_error(cov, precision.inverse()) < 1e-10);
}

TEST_CASE("weighted_cholesky reproduces weighted Gram matrices") {
    Rng rng(11);
    const Eigen::MatrixXd X = random_matrix(10, 6, rng);
    const auto full = truncate_design(X, 6);

    const Eigen::MatrixXd S1 = weighted_cholesky(full, Eigen::VectorXd::Ones(10));
    CHECK(relative_error(S1.transpose() * S1, full.V * full.d.cwiseAbs2().asDiagonal() * full.V.transpose()) < 1e-8);
    CHECK(relative_error(S1.transpose() * S1, X.transpose() * X) < 1e-8);

    CHECK(weighted_cholesky(full, Eigen::VectorXd::Zero(10)).isZero());

    Eigen::VectorXd w = random_positive(10, rng) / 5.0;
    const Eigen::MatrixXd S2 = weighted_cholesky(full, w);
    CHECK(relative_error(S2.transpose() * S2, X.transpose() * w.asDiagonal() * X) < 1e-8);
    // Upper triangular factor: S V = C_w.
    const Eigen::MatrixXd C = S2 * full.V;
    CHECK(C.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() < 1e-10);

    const auto trunc = truncate_design(X, 3);
    const Eigen::MatrixXd S3 = weighted_cholesky(trunc, w);
    const Eigen::MatrixXd Xt = trunc.reconstruct();
    CHECK(relative_error(S3.transpose() * S3, Xt.transpose() * w.asDiagonal() * Xt) < 1e-8);
    // Truncated Gram error is bounded by the discarded part of X.
    const double bound = 2.0 * w.maxCoeff() * X.norm() * (X - Xt).norm() + w.maxCoeff() * (X - Xt).squaredNorm();
    CHECK((S3.transpose() * S3 - X.transpose() * w.asDiagonal() * X).norm() <= bound);

    w[0] = -1.0;
    CHECK_THROWS_AS(weighted_cholesky(full, w), DomainError);
}

TEST_CASE("design_for_tolerance keeps the numerical rank when tol <= 0") {
    Rng rng(12);
    const Eigen::MatrixXd X = random_matrix(8, 3, rng) * random_matrix(3, 6, rng);
    CHECK(design_for_tolerance(X, 0.0).rank() == 3);
    CHECK(design_for_tolerance(X, 1e-9).rank() == 3);
}
