#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "errors.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace pnmimo {

/// B = (1/T) int_0^T e^{j Theta(t)} dt for a Wiener phase Theta(0) = 0 with
/// increments N(0, beta dt), trapezoid rule on n_steps intervals.
template <class Rng>
cplx simulate_filtered_gain(double beta, double t_sym, int n_steps, Rng& rng) {
    if (n_steps < 2) throw DimensionMismatch("simulate_filtered_gain: need n_steps >= 2");
    if (beta < 0.0 || !(t_sym > 0.0)) throw DimensionMismatch("simulate_filtered_gain: bad beta or T");
    const double sd = std::sqrt(beta * t_sym / n_steps);
    double theta = 0.0;
    cplx acc = 0.5;  // e^{j0} / 2
    for (int i = 1; i < n_steps; ++i) {
        theta += sd * standard_normal(rng);
        acc += std::polar(1.0, theta);
    }
    theta += sd * standard_normal(rng);
    acc += 0.5 * std::polar(1.0, theta);
    return acc / static_cast<double>(n_steps);
}

struct WienerStats {
    double s_param = 0.0;
    double var_phi = 0.0;  // rad^2
    double var_g = 0.0;
    double ratio = 0.0;    // var_g / var_phi^2
};

/// Small-S moments of the filtered gain: Var(Phi) ~ S/3, Var(G) ~ S^2/180.
inline WienerStats wiener_moments(double s_param) {
    if (s_param < 0.0) throw DimensionMismatch("wiener_moments: S must be >= 0");
    WienerStats w;
    w.s_param = s_param;
    w.var_phi = s_param / 3.0;
    w.var_g = s_param * s_param / 180.0;
    w.ratio = s_param > 0.0 ? 1.0 / 20.0 : 0.0;
    return w;
}

/// S giving a filtered phase standard deviation of `std_rad`.
inline double s_for_phase_std(double std_rad) { return 3.0 * std_rad * std_rad; }

inline constexpr double kMaxWienerS = 0.5;
inline constexpr int kDefaultWienerSteps = 1024;

struct WienerValidation {
    WienerStats closed_form;
    double var_phi_emp = 0.0;
    double var_g_emp = 0.0;
    double ratio_emp = 0.0;
    double mean_phi = 0.0;
    double mean_phi_se = 0.0;
    double var_phi_rel_err = 0.0;
    double var_g_rel_err = 0.0;
    double max_abs_b = 0.0;
    std::int64_t samples = 0;
    std::int64_t wraps = 0;  // draws with |Phi| > pi/2
};

/// Empirical Var(Phi), Var(G) of simulated B(1, S) against the closed forms.
/// Phi is the principal argument of B, G its modulus.
template <class Rng>
WienerValidation validate_moments(double s_param, std::int64_t n_samples, int n_steps, Rng& rng) {
    if (s_param < 0.0 || s_param > kMaxWienerS) throw UnsupportedModel("validate_moments: S outside [0, 0.5]");
    if (n_samples < 2) throw DimensionMismatch("validate_moments: need at least 2 samples");
    WienerValidation v;
    v.closed_form = wiener_moments(s_param);
    v.samples = n_samples;
    // Welford for both moments
    double mp = 0.0, qp = 0.0, mg = 0.0, qg = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const cplx b = simulate_filtered_gain(s_param, 1.0, n_steps, rng);
        const double phi = std::arg(b);
        const double g = std::abs(b);
        v.max_abs_b = std::max(v.max_abs_b, g);
        if (std::abs(phi) > kPi / 2.0) ++v.wraps;
        const double n = static_cast<double>(i + 1);
        const double dp = phi - mp;
        mp += dp / n;
        qp += dp * (phi - mp);
        const double dg = g - mg;
        mg += dg / n;
        qg += dg * (g - mg);
    }
    const double nm1 = static_cast<double>(n_samples - 1);
    v.var_phi_emp = qp / nm1;
    v.var_g_emp = qg / nm1;
    v.ratio_emp = v.var_phi_emp > 0.0 ? v.var_g_emp / (v.var_phi_emp * v.var_phi_emp) : 0.0;
    v.mean_phi = mp;
    v.mean_phi_se = std::sqrt(v.var_phi_emp / static_cast<double>(n_samples));
    if (v.closed_form.var_phi > 0.0) v.var_phi_rel_err = v.var_phi_emp / v.closed_form.var_phi - 1.0;
    if (v.closed_form.var_g > 0.0) v.var_g_rel_err = v.var_g_emp / v.closed_form.var_g - 1.0;
    return v;
}

} // namespace pnmimo
