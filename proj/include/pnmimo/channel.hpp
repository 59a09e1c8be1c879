#pragma once

#include <cmath>
#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace pnmimo {

enum class ChannelModel { rayleigh, los_mimo, identity, fixed };

inline std::string to_string(ChannelModel m) {
    switch (m) {
    case ChannelModel::rayleigh: return "rayleigh";
    case ChannelModel::los_mimo: return "los_mimo";
    case ChannelModel::identity: return "identity";
    case ChannelModel::fixed: return "fixed";
    }
    return "?";
}

struct ChannelInstance {
    CMat h;
    ChannelModel model_tag = ChannelModel::fixed;
    std::optional<double> spacing_fraction;

    Eigen::Index n_t() const { return h.cols(); }
    Eigen::Index n_r() const { return h.rows(); }
};

/// Ratio of extreme singular values.
inline double condition_number(const CMat& h) {
    Eigen::JacobiSVD<CMat> svd(h);
    const auto& s = svd.singularValues();
    return s(0) / s(s.size() - 1);
}

template <class Rng>
ChannelInstance sample_rayleigh(int n_t, int n_r, Rng& rng) {
    if (n_t < 1 || n_r < 1) throw DimensionMismatch("sample_rayleigh: dimensions must be positive");
    ChannelInstance ch;
    ch.model_tag = ChannelModel::rayleigh;
    ch.h.resize(n_r, n_t);
    for (int l = 0; l < n_t; ++l)
        for (int k = 0; k < n_r; ++k) ch.h(k, l) = complex_normal(rng, 1.0);
    return ch;
}

inline ChannelInstance make_identity(int n) {
    ChannelInstance ch;
    ch.model_tag = ChannelModel::identity;
    ch.h = CMat::Identity(n, n);
    return ch;
}

/// 4x4 dual-polarized line-of-sight link between two-element arrays.
///
/// With spacing d = f * d_opt the far-field path difference between the
/// cross links gives a phase pi*f^2/2, so f = 1 makes the 2x2 array response
/// [[1, e^{-j pi/2}], [e^{-j pi/2}, 1]] orthogonal. Both polarizations see
/// the same array response: H = G kron I_2. Entries have unit modulus.
inline ChannelInstance make_los_mimo(double spacing_fraction) {
    if (!(spacing_fraction > 0.0) || spacing_fraction > 1.0)
        throw InvalidSpacing("LoS spacing fraction must lie in (0, 1]");
    const double phase = kPi * spacing_fraction * spacing_fraction / 2.0;
    const cplx cross = std::polar(1.0, -phase);
    CMat g(2, 2);
    g << 1.0, cross, cross, 1.0;
    ChannelInstance ch;
    ch.model_tag = ChannelModel::los_mimo;
    ch.spacing_fraction = spacing_fraction;
    ch.h = CMat::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int p = 0; p < 2; ++p) ch.h(2 * a + p, 2 * b + p) = g(a, b);
    return ch;
}

enum class PhaseNoiseFamily { none, gaussian_iid, gaussian_cov, uniform_iid };

inline std::string to_string(PhaseNoiseFamily f) {
    switch (f) {
    case PhaseNoiseFamily::none: return "none";
    case PhaseNoiseFamily::gaussian_iid: return "gaussian_iid";
    case PhaseNoiseFamily::gaussian_cov: return "gaussian_cov";
    case PhaseNoiseFamily::uniform_iid: return "uniform_iid";
    }
    return "?";
}

/// Distribution of the phase vector [theta_t (n_t); theta_r (n_r)], radians.
///
/// q_theta is the covariance of that vector. Uniform noise is parameterized
/// by its standard deviation (support +-sqrt(3)*sigma), so q_theta holds the
/// matched variances and detectors see a variance-equivalent model.
class PhaseNoiseModel {
public:
    PhaseNoiseModel() = default;

    static PhaseNoiseModel none(int n_t, int n_r) {
        PhaseNoiseModel m;
        m.family_ = PhaseNoiseFamily::none;
        m.n_t_ = n_t;
        m.n_r_ = n_r;
        m.q_ = RMat::Zero(n_t + n_r, n_t + n_r);
        m.factor_ = RMat::Zero(n_t + n_r, 0);
        return m;
    }

    static PhaseNoiseModel gaussian_iid(int n_t, int n_r, double sigma_t, double sigma_r) {
        PhaseNoiseModel m = diagonal(n_t, n_r, sigma_t, sigma_r);
        m.family_ = PhaseNoiseFamily::gaussian_iid;
        return m;
    }

    static PhaseNoiseModel uniform_iid(int n_t, int n_r, double sigma_t, double sigma_r) {
        PhaseNoiseModel m = diagonal(n_t, n_r, sigma_t, sigma_r);
        m.family_ = PhaseNoiseFamily::uniform_iid;
        return m;
    }

    static PhaseNoiseModel gaussian_cov(int n_t, int n_r, const RMat& q) {
        if (q.rows() != n_t + n_r || q.cols() != n_t + n_r)
            throw DimensionMismatch("phase-noise covariance must be (n_t+n_r) square");
        if ((q - q.transpose()).norm() > 1e-10 * std::max(1.0, q.norm()))
            throw UnsupportedModel("phase-noise covariance must be symmetric");
        PhaseNoiseModel m;
        m.family_ = PhaseNoiseFamily::gaussian_cov;
        m.n_t_ = n_t;
        m.n_r_ = n_r;
        m.q_ = 0.5 * (q + q.transpose());
        m.factor_ = psd_factor(m.q_);
        return m;
    }

    PhaseNoiseFamily family() const noexcept { return family_; }
    int n_t() const noexcept { return n_t_; }
    int n_r() const noexcept { return n_r_; }
    int dim() const noexcept { return n_t_ + n_r_; }
    double sigma_t() const noexcept { return sigma_t_; }
    double sigma_r() const noexcept { return sigma_r_; }
    const RMat& q_theta() const noexcept { return q_; }

    bool is_gaussian() const noexcept {
        return family_ == PhaseNoiseFamily::none || family_ == PhaseNoiseFamily::gaussian_iid ||
               family_ == PhaseNoiseFamily::gaussian_cov;
    }

    /// theta = factor * u with u ~ N(0, I_rank) reproduces q_theta; the
    /// zero-variance directions are dropped.
    const RMat& gaussian_factor() const noexcept { return factor_; }

    template <class Rng>
    RVec sample(Rng& rng) const {
        RVec theta(dim());
        sample_into(rng, theta);
        return theta;
    }

    /// Draw into a preallocated vector of size dim().
    template <class Rng>
    void sample_into(Rng& rng, RVec& theta) const {
        theta.setZero();
        switch (family_) {
        case PhaseNoiseFamily::none: break;
        case PhaseNoiseFamily::gaussian_iid:
            for (int i = 0; i < dim(); ++i) {
                const double s = i < n_t_ ? sigma_t_ : sigma_r_;
                const double u = standard_normal(rng);
                theta[i] = s * u;
            }
            break;
        case PhaseNoiseFamily::gaussian_cov: {
            for (Eigen::Index c = 0; c < factor_.cols(); ++c) {
                const double u = standard_normal(rng);
                theta += factor_.col(c) * u;
            }
            break;
        }
        case PhaseNoiseFamily::uniform_iid:
            for (int i = 0; i < dim(); ++i) {
                const double half = std::sqrt(3.0) * (i < n_t_ ? sigma_t_ : sigma_r_);
                theta[i] = half > 0.0 ? uniform_real(rng, -half, half) : 0.0;
            }
            break;
        }
    }

    /// Symmetric square-root factor of a PSD matrix restricted to its range.
    static RMat psd_factor(const RMat& q) {
        Eigen::SelfAdjointEigenSolver<RMat> eig(q);
        const RVec& lam = eig.eigenvalues();
        const double top = lam.size() > 0 ? std::max(lam.maxCoeff(), 0.0) : 0.0;
        if (lam.size() > 0 && lam.minCoeff() < -1e-10 * std::max(1.0, top))
            throw UnsupportedModel("phase-noise covariance is not positive semidefinite");
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            if (lam[i] > 1e-14 * top && lam[i] > 0.0) keep.push_back(i);
        RMat f(q.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c)
            f.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]) * std::sqrt(lam[keep[c]]);
        return f;
    }

private:
    static PhaseNoiseModel diagonal(int n_t, int n_r, double sigma_t, double sigma_r) {
        if (sigma_t < 0.0 || sigma_r < 0.0) throw UnsupportedModel("phase-noise deviation must be >= 0");
        PhaseNoiseModel m;
        m.n_t_ = n_t;
        m.n_r_ = n_r;
        m.sigma_t_ = sigma_t;
        m.sigma_r_ = sigma_r;
        RVec d(n_t + n_r);
        d.head(n_t).setConstant(sigma_t * sigma_t);
        d.tail(n_r).setConstant(sigma_r * sigma_r);
        m.q_ = d.asDiagonal();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d[i] > 0.0) keep.push_back(i);
        m.factor_ = RMat::Zero(n_t + n_r, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c)
            m.factor_(keep[c], static_cast<Eigen::Index>(c)) = std::sqrt(d[keep[c]]);
        return m;
    }

    PhaseNoiseFamily family_ = PhaseNoiseFamily::none;
    int n_t_ = 0;
    int n_r_ = 0;
    double sigma_t_ = 0.0;
    double sigma_r_ = 0.0;
    RMat q_;
    RMat factor_;
};

template <class Rng>
RVec sample_phase_noise(const PhaseNoiseModel& model, Rng& rng) {
    return model.sample(rng);
}

/// y = Lambda_R H Lambda_T x (no additive noise).
inline CVec rotate_and_mix(const CMat& h, const CVec& x, const RVec& theta) {
    const Eigen::Index n_t = h.cols();
    const Eigen::Index n_r = h.rows();
    if (x.size() != n_t || theta.size() != n_t + n_r)
        throw DimensionMismatch("rotate_and_mix: dimension mismatch");
    CVec tx(n_t);
    for (Eigen::Index l = 0; l < n_t; ++l) tx[l] = x[l] * std::polar(1.0, theta[l]);
    CVec y = h * tx;
    for (Eigen::Index k = 0; k < n_r; ++k) y[k] *= std::polar(1.0, theta[n_t + k]);
    return y;
}

struct Observation {
    CVec y;
    double gamma = 1.0;
    CVec x_true;
    RVec theta_true;
    CVec z;

    /// Rebuild y from the recorded inputs; matches y bit for bit.
    CVec regenerate(const CMat& h) const { return rotate_and_mix(h, x_true, theta_true) + z; }
};

enum class NoiseMode { awgn, suppressed };

/// y = Lambda_R H Lambda_T x + z, z ~ CN(0, I/gamma).
template <class Rng>
Observation apply_channel(const ChannelInstance& ch, const CVec& x, const RVec& theta, double gamma, Rng& rng,
                          NoiseMode noise = NoiseMode::awgn) {
    if (!(gamma > 0.0)) throw DimensionMismatch("apply_channel: gamma must be positive");
    Observation obs;
    obs.gamma = gamma;
    obs.x_true = x;
    obs.theta_true = theta;
    obs.z = CVec::Zero(ch.n_r());
    if (noise == NoiseMode::awgn)
        for (Eigen::Index k = 0; k < ch.n_r(); ++k) obs.z[k] = complex_normal(rng, 1.0 / gamma);
    obs.y = rotate_and_mix(ch.h, x, theta) + obs.z;
    return obs;
}

} // namespace pnmimo
