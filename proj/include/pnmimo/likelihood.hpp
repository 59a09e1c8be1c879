#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "channel.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "types.hpp"

namespace pnmimo {

enum class EstimateMethod { monte_carlo, quadrature };

/// Estimate of the exact log-likelihood ln E_theta[exp(-gamma ||y - H_theta x||^2)].
/// Quadrature estimates report std_error 0 and the node count in `samples`.
struct LikelihoodEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    EstimateMethod method = EstimateMethod::monte_carlo;
};

/// r(theta) = ||y - Lambda_R H Lambda_T x||^2 with the per-column products H_l x_l cached.
class PhaseResidual {
public:
    PhaseResidual(const CMat& h, const CVec& x, const CVec& y) : y_(y) {
        if (x.size() != h.cols() || y.size() != h.rows()) throw DimensionMismatch("likelihood: dimension mismatch");
        c_ = h * x.asDiagonal();
        n_t_ = h.cols();
        n_r_ = h.rows();
        rot_.resize(n_r_);
    }

    Eigen::Index n_t() const { return n_t_; }
    Eigen::Index n_r() const { return n_r_; }

    double operator()(const RVec& theta) const {
        rot_.setZero();
        for (Eigen::Index l = 0; l < n_t_; ++l) rot_ += c_.col(l) * std::polar(1.0, theta[l]);
        double r = 0.0;
        for (Eigen::Index k = 0; k < n_r_; ++k) r += std::norm(y_[k] - rot_[k] * std::polar(1.0, theta[n_t_ + k]));
        return r;
    }

    /// r, its gradient and Hessian in theta.
    ///
    /// Uses the equal-norm form d = Lambda_R^H y - H Lambda_T x:
    /// dd/dtheta_t,l = -j c_l e^{j theta_t,l}, dd/dtheta_r,k = -j y_k e^{-j theta_r,k} e_k, and the
    /// only second derivatives are the diagonal ones (+c_l e^{j.}, -y_k e^{-j.} e_k).
    LogIntegrandEval derivatives(const RVec& theta) const {
        const Eigen::Index dim = n_t_ + n_r_;
        CMat jac = CMat::Zero(n_r_, dim);
        CVec d(n_r_);
        for (Eigen::Index k = 0; k < n_r_; ++k) d[k] = y_[k] * std::polar(1.0, -theta[n_t_ + k]);
        const CVec y_rot = d;
        for (Eigen::Index l = 0; l < n_t_; ++l) {
            const CVec cl = c_.col(l) * std::polar(1.0, theta[l]);
            d -= cl;
            jac.col(l) = cplx(0.0, -1.0) * cl;
        }
        for (Eigen::Index k = 0; k < n_r_; ++k) jac(k, n_t_ + k) = cplx(0.0, -1.0) * y_rot[k];

        LogIntegrandEval e;
        e.value = d.squaredNorm();
        e.grad = 2.0 * (jac.adjoint() * d).real();
        e.hess = 2.0 * (jac.adjoint() * jac).real();
        for (Eigen::Index l = 0; l < n_t_; ++l) {
            const CVec cl = c_.col(l) * std::polar(1.0, theta[l]);
            e.hess(l, l) += 2.0 * std::real(d.dot(cl));
        }
        for (Eigen::Index k = 0; k < n_r_; ++k)
            e.hess(n_t_ + k, n_t_ + k) += 2.0 * std::real(std::conj(d[k]) * (-y_rot[k]));
        return e;
    }

private:
    CVec y_;
    CMat c_;
    Eigen::Index n_t_ = 0;
    Eigen::Index n_r_ = 0;
    mutable CVec rot_;
};

/// Streaming log-mean-exp with the running maximum as shift, so one term is always exp(0).
class LogMeanExp {
public:
    void add(double a) {
        if (a > shift_) {
            const double f = std::exp(shift_ - a);
            s1_ *= f;
            s2_ *= f * f;
            shift_ = a;
        }
        const double e = std::exp(a - shift_);
        s1_ += e;
        s2_ += e * e;
        ++n_;
    }

    std::int64_t count() const { return n_; }
    double shift() const { return shift_; }
    double s1() const { return s1_; }
    double s2() const { return s2_; }

    double log_mean() const {
        if (n_ == 0 || !std::isfinite(shift_)) return -std::numeric_limits<double>::infinity();
        return shift_ + std::log(s1_ / static_cast<double>(n_));
    }

    /// Sample variance of e^a over mean^2.
    double relative_variance() const {
        if (n_ < 2 || !std::isfinite(shift_)) return std::numeric_limits<double>::infinity();
        const double n = static_cast<double>(n_);
        return std::max(0.0, (n * s2_ / (s1_ * s1_) - 1.0) * n / (n - 1.0));
    }

    /// Delta method: sd(ln mean) ~ sd(e^a) / (sqrt(n) mean).
    double std_error() const {
        const double rv = relative_variance();
        return std::isfinite(rv) ? std::sqrt(rv / static_cast<double>(n_)) : rv;
    }

private:
    double shift_ = -std::numeric_limits<double>::infinity();
    double s1_ = 0.0;
    double s2_ = 0.0;
    std::int64_t n_ = 0;
};

/// Monte-Carlo log-likelihood, phases drawn from `model` (any family).
template <class Rng>
LikelihoodEstimate mc_loglik(const CVec& x, const CVec& y, const CMat& h, double gamma, const PhaseNoiseModel& model,
                             std::int64_t s, Rng& rng) {
    if (s < 2) throw DimensionMismatch("mc_loglik: need s >= 2");
    if (model.dim() != h.cols() + h.rows()) throw DimensionMismatch("mc_loglik: phase model does not match H");
    const PhaseResidual res(h, x, y);
    LogMeanExp acc;
    RVec theta(model.dim());
    for (std::int64_t i = 0; i < s; ++i) {
        model.sample_into(rng, theta);
        acc.add(-gamma * res(theta));
    }
    return {acc.log_mean(), acc.std_error(), s, EstimateMethod::monte_carlo};
}

/// Monte-Carlo log-likelihood with theta ~ N(0, q_theta).
template <class Rng>
LikelihoodEstimate mc_loglik(const CVec& x, const CVec& y, const CMat& h, double gamma, const RMat& q_theta,
                             std::int64_t s, Rng& rng) {
    const auto model = PhaseNoiseModel::gaussian_cov(static_cast<int>(h.cols()), static_cast<int>(h.rows()), q_theta);
    return mc_loglik(x, y, h, gamma, model, s, rng);
}

/// Paired estimate of f(x_a) - f(x_b): both log-means use the same phase draws.
class PairedLogLikelihood {
public:
    PairedLogLikelihood(const CMat& h, const CVec& x_a, const CVec& x_b, const CVec& y, double gamma)
        : ra_(h, x_a, y), rb_(h, x_b, y), gamma_(gamma) {}

    template <class Rng>
    void extend(const PhaseNoiseModel& model, std::int64_t count, Rng& rng) {
        RVec theta(model.dim());
        for (std::int64_t i = 0; i < count; ++i) {
            model.sample_into(rng, theta);
            add(-gamma_ * ra_(theta), -gamma_ * rb_(theta));
        }
    }

    std::int64_t count() const { return a_.count(); }
    double difference() const { return a_.log_mean() - b_.log_mean(); }

    /// Delta method with the cross term of the common samples.
    double std_error() const {
        const std::int64_t n = a_.count();
        if (n < 2 || !std::isfinite(a_.shift()) || !std::isfinite(b_.shift()))
            return std::numeric_limits<double>::infinity();
        const double nd = static_cast<double>(n);
        const double cross = (nd * sab_ / (a_.s1() * b_.s1()) - 1.0) * nd / (nd - 1.0);
        const double v = a_.relative_variance() + b_.relative_variance() - 2.0 * cross;
        return std::sqrt(std::max(0.0, v) / nd);
    }

private:
    void add(double a, double b) {
        const double old_a = a_.shift();
        const double old_b = b_.shift();
        const bool first = a_.count() == 0;
        a_.add(a);
        b_.add(b);
        // one combined factor keeps the update symmetric in (a, b)
        if (!first) sab_ *= std::exp((old_a - a_.shift()) + (old_b - b_.shift()));
        sab_ += std::exp((a - a_.shift()) + (b - b_.shift()));
    }

    PhaseResidual ra_, rb_;
    double gamma_;
    LogMeanExp a_, b_;
    double sab_ = 0.0;
};

inline constexpr int kDefaultQuadNodes = 64;

/// ln g: log E[exp(-gamma |y - x e^{j Phi}|^2)], Phi ~ N(0, sigma_sum_sq).
inline double log_one_dim_likelihood(cplx x, cplx y, double gamma, double sigma_sum_sq,
                                     int nodes = kDefaultQuadNodes) {
    if (sigma_sum_sq < 0.0) throw DimensionMismatch("one_dim_likelihood: variance must be >= 0");
    if (sigma_sum_sq == 0.0 || x == cplx(0.0)) return -gamma * std::norm(y - x);
    const double sd = std::sqrt(sigma_sum_sq);
    const cplx c = std::conj(y) * x;
    const double base = std::norm(y) + std::norm(x);
    auto phi = [&](const RVec& u, bool want) {
        const cplx rot = c * std::polar(1.0, sd * u[0]);
        LogIntegrandEval e;
        e.value = -gamma * (base - 2.0 * rot.real());
        if (want) {
            e.grad = RVec::Constant(1, -gamma * 2.0 * rot.imag() * sd);
            e.hess = RMat::Constant(1, 1, -gamma * 2.0 * rot.real() * sd * sd);
        }
        return e;
    };
    // the nearest peak of the periodic term is within pi / sd, and phi <= 0 bounds |u| by sqrt(-2 phi(0))
    const double reach = std::min(kPi / sd + 1.0, std::sqrt(2.0 * gamma) * std::abs(y - x) + 1.0);
    return log_gaussian_expectation(phi, 1, nodes, reach);
}

inline double one_dim_likelihood(cplx x, cplx y, double gamma, double sigma_sum_sq,
                                 int nodes = kDefaultQuadNodes) {
    return std::exp(log_one_dim_likelihood(x, y, gamma, sigma_sum_sq, nodes));
}

/// v = g(2 gamma) / g(gamma)^2; s Var(F_s) -> v - 1 in the scalar model.
inline double variance_constant(cplx x, cplx y, double gamma, double sigma_sum_sq, int nodes = kDefaultQuadNodes) {
    return std::exp(log_one_dim_likelihood(x, y, 2.0 * gamma, sigma_sum_sq, nodes) -
                    2.0 * log_one_dim_likelihood(x, y, gamma, sigma_sum_sq, nodes));
}

inline constexpr int kMaxQuadDim = 3;

/// Tensor Gauss-Hermite evaluation of the exact log-likelihood (n_t + n_r <= 3).
/// The integral runs over the range of q_theta; in SISO the two phases only
/// enter through their sum, which leaves a one-dimensional rule.
inline LikelihoodEstimate quad_loglik(const CVec& x, const CVec& y, const CMat& h, double gamma, const RMat& q_theta,
                                      int nodes = kDefaultQuadNodes) {
    const Eigen::Index dim = h.cols() + h.rows();
    if (dim > kMaxQuadDim) throw DimensionTooLarge("quad_loglik: n_t + n_r exceeds 3");
    if (q_theta.rows() != dim || q_theta.cols() != dim) throw DimensionMismatch("quad_loglik: covariance size");
    if (!(gamma > 0.0)) throw DimensionMismatch("quad_loglik: gamma must be positive");
    const PhaseResidual res(h, x, y);

    RMat f;
    if (h.cols() == 1 && h.rows() == 1) {
        const double var = q_theta(0, 0) + q_theta(1, 1) + 2.0 * q_theta(0, 1);
        f = var > 0.0 ? RMat(RMat::Zero(2, 1)) : RMat(RMat::Zero(2, 0));
        if (var > 0.0) f(0, 0) = std::sqrt(var);
    } else {
        f = PhaseNoiseModel::psd_factor(0.5 * (q_theta + q_theta.transpose()));
    }
    const int rank = static_cast<int>(f.cols());

    LikelihoodEstimate out;
    out.method = EstimateMethod::quadrature;
    out.std_error = 0.0;
    if (rank == 0) {
        out.value = -gamma * res(RVec::Zero(dim));
        out.samples = 1;
        return out;
    }
    auto phi = [&](const RVec& u, bool want) {
        const RVec theta = f * u;
        LogIntegrandEval e;
        if (!want) {
            e.value = -gamma * res(theta);
            return e;
        }
        const LogIntegrandEval r = res.derivatives(theta);
        e.value = -gamma * r.value;
        e.grad = -gamma * (f.transpose() * r.grad);
        e.hess = -gamma * (f.transpose() * r.hess * f);
        return e;
    };
    double reach = std::sqrt(2.0 * gamma * res(RVec::Zero(dim))) + 1.0;
    if (h.cols() == 1 && h.rows() == 1) reach = std::min(reach, kPi / f(0, 0) + 1.0);
    out.value = log_gaussian_expectation(phi, rank, nodes, reach);
    out.samples = static_cast<std::int64_t>(std::pow(nodes, rank));
    return out;
}

} // namespace pnmimo
