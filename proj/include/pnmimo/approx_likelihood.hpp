#pragma once

#include <cmath>

#include <Eigen/Cholesky>

#include "errors.hpp"
#include "types.hpp"

namespace pnmimo {

/// Linearized phase-noise model around a candidate x.
///
/// With small phases, Lambda_R^H y - H Lambda_T x ~= (y - Hx) - j[H D_x, D_y] theta,
/// whose real stacking is A theta + b. W = I + 2 gamma A Q A^T is the
/// covariance of that self-interference plus AWGN (in units of 1/(2 gamma)).
struct WhitenedSystem {
    RMat a_mat;       // 2 n_r x (n_t + n_r)
    RVec b_vec;       // 2 n_r
    RMat w_mat;       // 2 n_r x 2 n_r, SPD
    RMat chol_lower;  // w_mat = L L^T

    /// b^T W^{-1} b through one triangular solve.
    double quadratic_form(const RVec& v) const {
        return chol_lower.triangularView<Eigen::Lower>().solve(v).squaredNorm();
    }

    double log_det() const { return 2.0 * chol_lower.diagonal().array().log().sum(); }

    /// Apply W^{-1/2} := L^{-1}, which satisfies (L^{-1})^T L^{-1} = W^{-1}.
    RMat whiten(const RMat& m) const { return chol_lower.triangularView<Eigen::Lower>().solve(m); }
    RVec whiten(const RVec& v) const { return chol_lower.triangularView<Eigen::Lower>().solve(v); }
};

struct LinearizedTerms {
    RMat a_mat;
    RVec b_vec;
};

inline LinearizedTerms build_ab(const CMat& h, const CVec& x, const CVec& y) {
    const Eigen::Index n_t = h.cols();
    const Eigen::Index n_r = h.rows();
    if (x.size() != n_t || y.size() != n_r) throw DimensionMismatch("build_ab: dimension mismatch");

    const CMat hdx = h * x.asDiagonal();
    LinearizedTerms t;
    t.a_mat = RMat::Zero(2 * n_r, n_t + n_r);
    t.a_mat.topLeftCorner(n_r, n_t) = hdx.imag();
    t.a_mat.bottomLeftCorner(n_r, n_t) = -hdx.real();
    for (Eigen::Index k = 0; k < n_r; ++k) {
        t.a_mat(k, n_t + k) = y[k].imag();
        t.a_mat(n_r + k, n_t + k) = -y[k].real();
    }
    const CVec resid = y - h * x;
    t.b_vec.resize(2 * n_r);
    t.b_vec.head(n_r) = resid.real();
    t.b_vec.tail(n_r) = resid.imag();
    return t;
}

struct CovarianceFactor {
    RMat w_mat;
    RMat chol_lower;
};

inline CovarianceFactor build_w(const RMat& a_mat, const RMat& q_theta, double gamma) {
    if (!(gamma > 0.0)) throw DimensionMismatch("build_w: gamma must be positive");
    if (q_theta.rows() != a_mat.cols() || q_theta.cols() != a_mat.cols())
        throw DimensionMismatch("build_w: covariance does not match A");
    CovarianceFactor f;
    RMat w = 2.0 * gamma * (a_mat * q_theta * a_mat.transpose());
    w = 0.5 * (w + w.transpose());
    w.diagonal().array() += 1.0;
    Eigen::LLT<RMat> llt(w);
    if (llt.info() != Eigen::Success) throw NumericalError("build_w: Cholesky factorization failed");
    f.chol_lower = llt.matrixL();
    f.w_mat = std::move(w);
    return f;
}

inline WhitenedSystem whitened_system(const CMat& h, const CVec& x, const CVec& y, double gamma,
                                      const RMat& q_theta) {
    auto [a, b] = build_ab(h, x, y);
    auto [w, l] = build_w(a, q_theta, gamma);
    return {std::move(a), std::move(b), std::move(w), std::move(l)};
}

/// Approximate log-likelihood -gamma b^T W^{-1} b - 0.5 ln det W, built from
/// the Cholesky factor (no explicit inverse).
inline double approx_loglik(const CVec& x, const CVec& y, const CMat& h, double gamma, const RMat& q_theta) {
    const WhitenedSystem s = whitened_system(h, x, y, gamma, q_theta);
    return -gamma * s.quadratic_form(s.b_vec) - 0.5 * s.log_det();
}

} // namespace pnmimo
