#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "types.hpp"

namespace pnmimo {

/// Gauss-Hermite rule for the weight exp(-t^2): sum w_i f(t_i) ~ int f(t) e^{-t^2} dt.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> log_weights;
};

namespace detail {

inline GaussHermiteRule compute_gauss_hermite(int n) {
    // Golub-Welsch for starting values, then Newton on the orthonormal
    // Hermite recurrence to polish nodes and get weights 2 / p_n'(t)^2.
    RMat jac = RMat::Zero(n, n);
    for (int i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(i / 2.0);
    Eigen::SelfAdjointEigenSolver<RMat> eig(jac, Eigen::EigenvaluesOnly);
    const double pim4 = std::pow(kPi, -0.25);

    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    rule.log_weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = eig.eigenvalues()[i];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = t * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double step = p1 / pp;
            t -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(t))) break;
        }
        rule.nodes[i] = t;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.log_weights[i] = std::log(2.0) - 2.0 * std::log(std::abs(pp));
    }
    return rule;
}

} // namespace detail

/// Cached n-point rule; safe to call from several threads.
inline const GaussHermiteRule& gauss_hermite(int n) {
    if (n < 1) throw DimensionMismatch("gauss_hermite: need at least one node");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(detail::compute_gauss_hermite(n));
    return *slot;
}

/// Log-integrand with value, gradient and Hessian at a point.
struct LogIntegrandEval {
    double value = 0.0;
    RVec grad;
    RMat hess;
};

inline double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double a : v) mx = std::max(mx, a);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double a : v) s += std::exp(a - mx);
    return mx + std::log(s);
}

/// log E[exp(phi(u))] for u ~ N(0, I_dim) by tensor Gauss-Hermite on nodes
/// centred at the mode of phi(u) - |u|^2/2 and scaled by its curvature.
/// phi(u, want_derivatives) returns a LogIntegrandEval; grad and hess are
/// only read when asked for.
///
/// The recentring keeps the rule accurate when exp(phi) is much narrower than
/// the prior (high SNR). The mode search starts from the best point of a
/// coarse grid and uses damped Newton steps; when the curvature there is not
/// negative definite the plain prior-centred rule is used. The grid spans
/// +-half_width; callers that know where the global mode can lie widen it.
template <class Phi>
double log_gaussian_expectation(Phi&& phi, int dim, int nodes_per_dim, double half_width = 6.0) {
    if (dim == 0) return phi(RVec(RVec::Zero(0)), false).value;
    const GaussHermiteRule& rule = gauss_hermite(nodes_per_dim);

    auto objective = [&](const RVec& u) { return phi(u, false).value - 0.5 * u.squaredNorm(); };

    // Coarse grid, spacing at most 0.25 / 0.5 / 1 in one / two / three dimensions.
    half_width = std::max(half_width, 6.0);
    const double spacing = dim == 1 ? 0.25 : (dim == 2 ? 0.5 : 1.0);
    const int cap = dim == 1 ? 20001 : (dim == 2 ? 401 : 81);
    const int per_dim = std::min(cap, 1 + 2 * static_cast<int>(std::ceil(half_width / spacing)));
    RVec best_u = RVec::Zero(dim);
    double best_val = objective(best_u);
    {
        std::vector<int> idx(dim, 0);
        RVec u(dim);
        while (true) {
            for (int d = 0; d < dim; ++d) u[d] = half_width * (-1.0 + 2.0 * idx[d] / (per_dim - 1));
            const double v = objective(u);
            if (v > best_val) {
                best_val = v;
                best_u = u;
            }
            int pos = dim - 1;
            while (pos >= 0 && ++idx[pos] == per_dim) idx[pos--] = 0;
            if (pos < 0) break;
        }
    }

    RVec mu = best_u;
    double mu_val = best_val;
    for (int it = 0; it < 200; ++it) {
        const LogIntegrandEval e = phi(mu, true);
        const RVec g = e.grad - mu;
        RMat prec = -e.hess;
        prec.diagonal().array() += 1.0;
        Eigen::LLT<RMat> llt(prec);
        RVec step = llt.info() == Eigen::Success ? RVec(llt.solve(g)) : RVec(0.1 * g);
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const RVec cand = mu + t * step;
            const double v = objective(cand);
            if (v >= mu_val) {
                moved = v > mu_val;
                mu = cand;
                mu_val = v;
                break;
            }
            t *= 0.5;
        }
        if (!moved || (t * step).norm() < 1e-13 * (1.0 + mu.norm())) break;
    }

    const LogIntegrandEval at_mode = phi(mu, true);
    RMat prec = -at_mode.hess;
    prec.diagonal().array() += 1.0;
    RMat chol_cov;  // lower factor of the proposal covariance
    double half_log_det_cov = 0.0;
    Eigen::LLT<RMat> llt(prec);
    if (llt.info() == Eigen::Success) {
        const RMat lp = llt.matrixL();
        // cov = prec^{-1}; factor = L_p^{-T}
        chol_cov = lp.transpose().triangularView<Eigen::Upper>().solve(RMat::Identity(dim, dim));
        half_log_det_cov = -lp.diagonal().array().log().sum();
    } else {
        mu = RVec::Zero(dim);
        chol_cov = RMat::Identity(dim, dim);
    }

    // u = mu + sqrt(2) C t; weight ratio N(u;0,I)/N(u;mu,C) folded into the log terms.
    std::vector<double> terms;
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(nodes_per_dim);
    terms.reserve(total);
    std::vector<int> idx(dim, 0);
    RVec t(dim);
    const double log_norm = -0.5 * dim * std::log(kPi);
    while (true) {
        double lw = log_norm;
        for (int d = 0; d < dim; ++d) {
            t[d] = rule.nodes[idx[d]];
            lw += rule.log_weights[idx[d]];
        }
        const RVec u = mu + std::sqrt(2.0) * (chol_cov * t);
        terms.push_back(lw + phi(u, false).value - 0.5 * u.squaredNorm() + t.squaredNorm() + half_log_det_cov);
        int pos = dim - 1;
        while (pos >= 0 && ++idx[pos] == nodes_per_dim) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return log_sum_exp(terms);
}

} // namespace pnmimo
