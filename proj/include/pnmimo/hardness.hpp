#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "channel.hpp"
#include "constellation.hpp"
#include "errors.hpp"
#include "likelihood.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace pnmimo {

/// E[R^2] for R^2 = ||Y - H X||^2 with i.i.d. Rayleigh H, unit-energy uniform X,
/// i.i.d. Gaussian phases and AWGN of variance 1/gamma.
inline double expected_radius(int n_t, int n_r, double gamma, double sigma_t, double sigma_r) {
    if (n_t < 1 || n_r < 1 || !(gamma > 0.0)) throw DimensionMismatch("expected_radius: bad arguments");
    const double s = sigma_t * sigma_t + sigma_r * sigma_r;
    return 2.0 * n_t * n_r * (1.0 - std::exp(-s / 2.0)) + n_r / gamma;
}

struct RadiusStats {
    double e_r2 = 0.0;
    double var_v2 = 0.0;   // Var ||V||^2, phase-noise part
    double var_r2 = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;
    double w3 = 0.0;
    double pbar2 = 1.0;    // E|X|^4
    double sigma2 = 0.0;   // (sigma_t^2 + sigma_r^2) / 2
};

/// Mean and variance of R^2 with V = (Lambda_R H Lambda_T - H) X.
///
/// Per receive antenna and transmit pair the terms are
///   w1 = 2 P (1 - 2e^{-s} + e^{-2s} cosh 2s) - (1 - e^{-s})^2,
///   w2 = 2 (1 - 2e^{-s} + e^{-2s} cosh s_r) - (1 - e^{-s})^2,
///   w3 = P (1 - 2e^{-s} + e^{-2s} cosh s_t) - (1 - e^{-s})^2,
/// with s = sigma^2, s_t = sigma_t^2, s_r = sigma_r^2, P = E|X|^4. The AWGN
/// part ||Z||^2 is a sum of n_r exponentials of mean 1/gamma, hence variance
/// n_r / gamma^2.
inline RadiusStats radius_variance(int n_t, int n_r, double gamma, double sigma_t, double sigma_r, double pbar2) {
    if (pbar2 < 1.0 - 1e-12) throw DimensionMismatch("radius_variance: E|X|^4 must be >= 1");
    RadiusStats r;
    r.pbar2 = pbar2;
    const double st = sigma_t * sigma_t;
    const double sr = sigma_r * sigma_r;
    const double s = (st + sr) / 2.0;
    r.sigma2 = s;
    const double m = 1.0 - std::exp(-s);
    const double base = 1.0 - 2.0 * std::exp(-s);
    const double e2 = std::exp(-2.0 * s);
    r.w1 = 2.0 * pbar2 * (base + e2 * std::cosh(2.0 * s)) - m * m;
    r.w2 = 2.0 * (base + e2 * std::cosh(sr)) - m * m;
    r.w3 = pbar2 * (base + e2 * std::cosh(st)) - m * m;
    // cancellation can leave tiny negatives at sigma ~ 0
    r.w1 = std::max(0.0, r.w1);
    r.w2 = std::max(0.0, r.w2);
    r.w3 = std::max(0.0, r.w3);
    r.var_v2 = 4.0 * n_t * n_r * (r.w1 + r.w2 * (n_t - 1) + r.w3 * (n_r - 1));
    r.e_r2 = expected_radius(n_t, n_r, gamma, sigma_t, sigma_r);
    const double e_v2 = 2.0 * n_t * n_r * m;
    r.var_r2 = r.var_v2 + n_r / (gamma * gamma) + 2.0 / gamma * e_v2;
    return r;
}

inline RadiusStats radius_variance(int n_t, int n_r, double gamma, double sigma_t, double sigma_r,
                                   const Constellation& k) {
    return radius_variance(n_t, n_r, gamma, sigma_t, sigma_r, k.fourth_moment());
}

/// Draws of R^2 = ||Y - H X||^2 from the model behind expected_radius.
template <class Rng>
std::vector<double> simulate_radius(int n_t, int n_r, double gamma, double sigma_t, double sigma_r,
                                    const Constellation& k, std::int64_t draws, Rng& rng) {
    const auto pn = PhaseNoiseModel::gaussian_iid(n_t, n_r, sigma_t, sigma_r);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(draws));
    CVec x(n_t);
    RVec theta(n_t + n_r);
    for (std::int64_t i = 0; i < draws; ++i) {
        const ChannelInstance ch = sample_rayleigh(n_t, n_r, rng);
        for (int l = 0; l < n_t; ++l) x[l] = k.point(uniform_index(rng, k.order()));
        pn.sample_into(rng, theta);
        CVec v = rotate_and_mix(ch.h, x, theta) - ch.h * x;
        for (int j = 0; j < n_r; ++j) v[j] += complex_normal(rng, 1.0 / gamma);
        out.push_back(v.squaredNorm());
    }
    return out;
}

struct SampleSummary {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    std::int64_t n = 0;
};

inline SampleSummary summarize(const std::vector<double>& v) {
    SampleSummary s;
    s.n = static_cast<std::int64_t>(v.size());
    if (v.empty()) return s;
    double m = 0.0;
    for (double a : v) m += a;
    m /= static_cast<double>(v.size());
    double q = 0.0;
    for (double a : v) q += (a - m) * (a - m);
    s.mean = m;
    s.variance = v.size() > 1 ? q / static_cast<double>(v.size() - 1) : 0.0;
    return s;
}

/// Fraction of draws inside [(1 - eta) c, (1 + eta) c].
inline double coverage_fraction(const std::vector<double>& v, double centre, double eta) {
    if (v.empty()) return 0.0;
    std::int64_t in = 0;
    for (double a : v) in += (a >= (1.0 - eta) * centre && a <= (1.0 + eta) * centre) ? 1 : 0;
    return static_cast<double>(in) / static_cast<double>(v.size());
}

struct PhaseDistanceResult {
    double value = std::numeric_limits<double>::infinity();
    RVec theta;                              // [theta_t; theta_r] at the best point
    std::vector<std::vector<double>> traces; // objective after each iteration, per restart
};

namespace detail {

// Receive phases at their optimum for fixed transmit phases: align
// e^{-j theta_r,k} y_k with u_k = (H Lambda_T x)_k.
inline double align_receive(const CVec& u, const CVec& y, RVec& theta_r) {
    double r = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        theta_r[k] = std::arg(y[k]) - std::arg(u[k]);
        const double d = std::abs(y[k]) - std::abs(u[k]);
        r += d * d;
    }
    return r;
}

inline double phase_residual(const CMat& c, const CVec& y, const RVec& tt, const RVec& tr) {
    double r = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        cplx u = 0.0;
        for (Eigen::Index l = 0; l < c.cols(); ++l) u += c(k, l) * std::polar(1.0, tt[l]);
        r += std::norm(y[k] * std::polar(1.0, -tr[k]) - u);
    }
    return r;
}

// One Levenberg-Marquardt step on all phases; applied only if it lowers the
// objective (then receive phases are re-aligned). Returns the new value.
inline double lm_step(const CMat& c, const CVec& y, RVec& tt, RVec& tr, double cur, double& lambda) {
    const Eigen::Index n_t = c.cols();
    const Eigen::Index n_r = c.rows();
    CVec d(n_r);
    CMat jac = CMat::Zero(n_r, n_t + n_r);
    for (Eigen::Index k = 0; k < n_r; ++k) {
        d[k] = y[k] * std::polar(1.0, -tr[k]);
        jac(k, n_t + k) = cplx(0.0, -1.0) * d[k];
    }
    for (Eigen::Index l = 0; l < n_t; ++l) {
        const CVec cl = c.col(l) * std::polar(1.0, tt[l]);
        d -= cl;
        jac.col(l) = cplx(0.0, -1.0) * cl;
    }
    RMat jr(2 * n_r, n_t + n_r);
    jr << jac.real(), jac.imag();
    RVec dr(2 * n_r);
    dr << d.real(), d.imag();
    const RMat jtj = jr.transpose() * jr;
    const RVec g = jr.transpose() * dr;
    for (int attempt = 0; attempt < 8; ++attempt) {
        RMat a = jtj;
        a.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
        const RVec step = -a.ldlt().solve(g);
        const RVec tt_new = tt + step.head(n_t);
        const RVec tr_new = tr + step.tail(n_r);
        const double v = phase_residual(c, y, tt_new, tr_new);
        if (v < cur) {
            tt = tt_new;
            tr = tr_new;
            lambda = std::max(1e-12, lambda / 10.0);
            CVec u = CVec::Zero(n_r);
            for (Eigen::Index l = 0; l < n_t; ++l) u += c.col(l) * std::polar(1.0, tt[l]);
            RVec tr_al(n_r);
            const double al = align_receive(u, y, tr_al);
            if (al < v) {
                tr = tr_al;
                return al;
            }
            return v;
        }
        lambda *= 10.0;
    }
    return cur;
}

} // namespace detail

/// m(x, y, H) = min over theta of ||y - Lambda_R H Lambda_T x||^2 (an upper estimate).
///
/// Alternates the closed-form receive update with a sweep of exact
/// single-coordinate transmit updates, theta_t,l = arg(c_l^H r_l) where r_l is
/// the residual without column l. Each update is a minimization, so every
/// restart descends monotonically. Each sweep is followed by one damped
/// Gauss-Newton step on all phases, kept only when it lowers the objective;
/// it gives fast local convergence where the sweeps crawl. The first restart
/// starts at theta = 0, the rest at uniform random transmit phases from a
/// fixed internal seed.
inline PhaseDistanceResult min_phase_distance_detail(const CVec& x, const CVec& y, const CMat& h, int iters = 200,
                                                     int restarts = 20, bool keep_traces = false) {
    if (iters < 1 || restarts < 1) throw DimensionMismatch("min_phase_distance: iters and restarts must be >= 1");
    const Eigen::Index n_t = h.cols();
    const Eigen::Index n_r = h.rows();
    if (x.size() != n_t || y.size() != n_r) throw DimensionMismatch("min_phase_distance: dimension mismatch");

    const CMat c = h * x.asDiagonal();
    CounterRng rng(0x5eed0f3a9e11c0deULL);
    PhaseDistanceResult best;
    RVec theta_t(n_t), theta_r(n_r);

    auto objective = [&](const RVec& tt, RVec& tr) {
        CVec u = CVec::Zero(n_r);
        for (Eigen::Index l = 0; l < n_t; ++l) u += c.col(l) * std::polar(1.0, tt[l]);
        return detail::align_receive(u, y, tr);
    };

    for (int rs = 0; rs < restarts; ++rs) {
        for (Eigen::Index l = 0; l < n_t; ++l) theta_t[l] = rs == 0 ? 0.0 : uniform_real(rng, -kPi, kPi);
        double cur = objective(theta_t, theta_r);
        double lambda = 1e-3;
        std::vector<double> trace;
        if (keep_traces) trace.push_back(cur);

        for (int it = 0; it < iters && cur > 0.0; ++it) {
            // d = Lambda_R^H y - sum_l c_l e^{j theta_t,l}
            CVec d(n_r);
            for (Eigen::Index k = 0; k < n_r; ++k) d[k] = y[k] * std::polar(1.0, -theta_r[k]);
            for (Eigen::Index l = 0; l < n_t; ++l) d -= c.col(l) * std::polar(1.0, theta_t[l]);
            // exact minimization over each transmit phase in turn
            for (Eigen::Index l = 0; l < n_t; ++l) {
                const CVec cl = c.col(l) * std::polar(1.0, theta_t[l]);
                const CVec rl = d + cl;
                const cplx p = c.col(l).dot(rl);
                if (p == cplx(0.0)) continue;
                theta_t[l] = std::arg(p);
                d = rl - c.col(l) * std::polar(1.0, theta_t[l]);
            }
            double next = objective(theta_t, theta_r);
            next = std::min(next, detail::lm_step(c, y, theta_t, theta_r, next, lambda));
            const bool stalled = cur - next <= 1e-15 * cur;
            cur = std::min(cur, next);
            if (keep_traces) trace.push_back(cur);
            if (stalled) break;
        }
        if (cur < best.value) {
            best.value = cur;
            best.theta.resize(n_t + n_r);
            best.theta << theta_t, theta_r;
        }
        if (keep_traces) best.traces.push_back(std::move(trace));
    }
    return best;
}

inline double min_phase_distance(const CVec& x, const CVec& y, const CMat& h, int iters = 200, int restarts = 20) {
    return min_phase_distance_detail(x, y, h, iters, restarts).value;
}

struct HighSnrRow {
    double gamma = 0.0;
    double neg_f_over_gamma = 0.0;
    double m = 0.0;
    double gap = 0.0;  // -f/gamma - m
};

/// -f/gamma along increasing gamma next to m(x, y, H). Uses the quadrature
/// likelihood, so n_t + n_r <= 3.
inline std::vector<HighSnrRow> high_snr_ratio_check(const CVec& x, const CVec& y, const CMat& h, const RMat& q_theta,
                                                    const std::vector<double>& gamma_list) {
    const double m = min_phase_distance(x, y, h);
    std::vector<HighSnrRow> out;
    for (double g : gamma_list) {
        HighSnrRow row;
        row.gamma = g;
        row.m = m;
        row.neg_f_over_gamma = -quad_loglik(x, y, h, g, q_theta).value / g;
        row.gap = row.neg_f_over_gamma - m;
        out.push_back(row);
    }
    return out;
}

inline std::vector<HighSnrRow> high_snr_ratio_check(const CVec& x, const CVec& y, const CMat& h,
                                                    const PhaseNoiseModel& model,
                                                    const std::vector<double>& gamma_list) {
    if (!model.is_gaussian()) throw UnsupportedModel("high_snr_ratio_check: Gaussian phase noise only");
    return high_snr_ratio_check(x, y, h, model.q_theta(), gamma_list);
}

} // namespace pnmimo
