#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "approx_likelihood.hpp"
#include "constellation.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "sphere_decoder.hpp"
#include "types.hpp"

namespace pnmimo {

enum class Method { lmmse, naive_ml, selection, siw, siw_iter, exhaustive_aml };

inline std::string to_string(Method m) {
    switch (m) {
    case Method::lmmse: return "lmmse";
    case Method::naive_ml: return "naive_ml";
    case Method::selection: return "selection";
    case Method::siw: return "siw";
    case Method::siw_iter: return "siw_iter";
    case Method::exhaustive_aml: return "exhaustive_aml";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
    for (Method m : {Method::lmmse, Method::naive_ml, Method::selection, Method::siw, Method::siw_iter,
                     Method::exhaustive_aml})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

/// Output of a detector. `score` is the approximate log-likelihood of x_hat
/// under the (gamma, Q) the detector was given; detectors that receive no
/// phase-noise covariance score with Q = 0, i.e. -gamma ||y - H x||^2, and
/// plain nnd() (no gamma either) reports -||y - H x||^2.
struct DetectionResult {
    CVec x_hat;
    Method method = Method::naive_ml;
    double score = 0.0;
    std::int64_t nnd_node_count = 0;
};

/// Decoder-side SNR: min(gamma, gamma_max). Channel noise is untouched.
inline double snr_ceiling(double gamma, double gamma_max) {
    if (!(gamma_max > 0.0)) throw DimensionMismatch("snr_ceiling: gamma_max must be positive");
    return std::min(gamma, gamma_max);
}

inline double snr_ceiling(double gamma, std::optional<double> gamma_max) {
    return gamma_max ? snr_ceiling(gamma, *gamma_max) : gamma;
}

/// Nearest-neighbor detection argmin ||y - Hx||^2 over X^{n_t}, solved as
/// the real problem over 2 n_t PAM coordinates.
inline DetectionResult nnd(const CVec& y, const CMat& h, const Constellation& k) {
    const RealNndResult r = real_nnd(to_real(y), real_channel(h), k.levels());
    DetectionResult out;
    out.x_hat = to_complex(r.x);
    out.method = Method::naive_ml;
    out.score = -(y - h * out.x_hat).squaredNorm();
    out.nnd_node_count = r.nodes;
    return out;
}

/// Unquantized LMMSE estimate H^H (I/gamma + H H^H)^{-1} y.
inline CVec lmmse_filter(const CVec& y, const CMat& h, double gamma) {
    if (y.size() != h.rows()) throw DimensionMismatch("lmmse: y and H disagree");
    CMat g = h * h.adjoint();
    g.diagonal().array() += 1.0 / gamma;
    Eigen::LLT<CMat> llt(g);
    if (llt.info() != Eigen::Success) throw NumericalError("lmmse: factorization failed");
    return h.adjoint() * llt.solve(y);
}

inline DetectionResult naive_lmmse(const CVec& y, const CMat& h, double gamma, const Constellation& k) {
    DetectionResult out;
    out.x_hat = quantize(lmmse_filter(y, h, gamma), k);
    out.method = Method::lmmse;
    out.score = -gamma * (y - h * out.x_hat).squaredNorm();
    return out;
}

/// Scores of every comparison SIW makes, in order.
struct SiwTrace {
    double lmmse_score = 0.0;
    double naive_ml_score = 0.0;
    std::vector<CVec> candidates;   // whitened-search outputs
    std::vector<double> candidate_scores;
    std::vector<CVec> list;         // iterative variant: candidate list
};

/// The two phase-noise-blind starting points, scored with the approximate likelihood.
struct InitialCandidates {
    DetectionResult lmmse;
    DetectionResult naive_ml;

    /// Algorithm's first comparison: LMMSE only if strictly better.
    const DetectionResult& best() const { return lmmse.score > naive_ml.score ? lmmse : naive_ml; }
};

inline InitialCandidates initial_candidates(const CVec& y, const CMat& h, double gamma, const RMat& q_theta,
                                            const Constellation& k) {
    InitialCandidates c;
    c.lmmse = naive_lmmse(y, h, gamma, k);
    c.lmmse.score = approx_loglik(c.lmmse.x_hat, y, h, gamma, q_theta);
    c.naive_ml = nnd(y, h, k);
    c.naive_ml.score = approx_loglik(c.naive_ml.x_hat, y, h, gamma, q_theta);
    return c;
}

/// Argmax of the approximate likelihood between the naive LMMSE and naive ML outputs.
inline DetectionResult selection_detect(const InitialCandidates& init) {
    DetectionResult out = init.best();
    out.method = Method::selection;
    out.nnd_node_count = init.naive_ml.nnd_node_count;
    return out;
}

/// Whiten with W built at `anchor` and solve the resulting real NND.
inline DetectionResult whitened_search(const CVec& y, const CMat& h, double gamma, const RMat& q_theta,
                                       const Constellation& k, const CVec& anchor) {
    const WhitenedSystem ws = whitened_system(h, anchor, y, gamma, q_theta);
    const RVec y_w = ws.whiten(to_real(y));
    const RMat h_w = ws.whiten(real_channel(h));
    const RealNndResult r = real_nnd(y_w, h_w, k.levels());
    DetectionResult out;
    out.x_hat = to_complex(r.x);
    out.score = approx_loglik(out.x_hat, y, h, gamma, q_theta);
    out.nnd_node_count = r.nodes;
    return out;
}

/// Self-interference whitening from precomputed starting points.
inline DetectionResult siw_from(const InitialCandidates& init, const CVec& y, const CMat& h, double gamma,
                                const RMat& q_theta, const Constellation& k, SiwTrace* trace = nullptr) {
    const DetectionResult& incumbent = init.best();
    const DetectionResult cand = whitened_search(y, h, gamma, q_theta, k, incumbent.x_hat);
    if (trace) {
        trace->lmmse_score = init.lmmse.score;
        trace->naive_ml_score = init.naive_ml.score;
        trace->candidates.push_back(cand.x_hat);
        trace->candidate_scores.push_back(cand.score);
    }
    DetectionResult out = cand.score > incumbent.score ? cand : incumbent;
    out.method = Method::siw;
    out.nnd_node_count = init.naive_ml.nnd_node_count + cand.nnd_node_count;
    return out;
}

inline DetectionResult siw_detect(const CVec& y, const CMat& h, double gamma, const RMat& q_theta,
                                  const Constellation& k, SiwTrace* trace = nullptr) {
    return siw_from(initial_candidates(y, h, gamma, q_theta, k), y, h, gamma, q_theta, k, trace);
}

/// SIW with a candidate list: re-whiten at the current best until the search
/// returns a point already in the list or max_iter searches have run.
inline DetectionResult siw_iterative_from(const InitialCandidates& init, const CVec& y, const CMat& h,
                                          double gamma, const RMat& q_theta, const Constellation& k,
                                          int max_iter, SiwTrace* trace = nullptr) {
    if (max_iter < 1) throw DimensionMismatch("siw_iterative: max_iter must be >= 1");
    std::vector<CVec> list{init.naive_ml.x_hat};
    if (!same_vector(init.lmmse.x_hat, init.naive_ml.x_hat)) list.push_back(init.lmmse.x_hat);
    DetectionResult best = init.best();
    std::int64_t nodes = init.naive_ml.nnd_node_count;
    if (trace) {
        trace->lmmse_score = init.lmmse.score;
        trace->naive_ml_score = init.naive_ml.score;
    }

    for (int it = 0; it < max_iter; ++it) {
        const DetectionResult cand = whitened_search(y, h, gamma, q_theta, k, best.x_hat);
        nodes += cand.nnd_node_count;
        if (trace) {
            trace->candidates.push_back(cand.x_hat);
            trace->candidate_scores.push_back(cand.score);
        }
        const bool seen = std::any_of(list.begin(), list.end(),
                                      [&](const CVec& v) { return same_vector(v, cand.x_hat); });
        if (seen) break;
        list.push_back(cand.x_hat);
        if (cand.score > best.score) best = cand;
    }
    if (trace) trace->list = list;
    best.method = Method::siw_iter;
    best.nnd_node_count = nodes;
    return best;
}

inline DetectionResult siw_iterative(const CVec& y, const CMat& h, double gamma, const RMat& q_theta,
                                     const Constellation& k, int max_iter, SiwTrace* trace = nullptr) {
    return siw_iterative_from(initial_candidates(y, h, gamma, q_theta, k), y, h, gamma, q_theta, k, max_iter,
                              trace);
}

inline constexpr double kMaxExhaustiveSpace = 1048576.0;  // 2^20

/// Size of X^{n_t}, as a double to avoid overflow.
inline double search_space_size(const Constellation& k, Eigen::Index n_t) {
    return std::pow(static_cast<double>(k.order()), static_cast<double>(n_t));
}

/// Visit every x in X^{n_t}, x_1 most significant, point order within a coordinate.
template <class Fn>
void for_each_vector(const Constellation& k, Eigen::Index n_t, Fn&& fn) {
    std::vector<int> idx(static_cast<std::size_t>(n_t), 0);
    CVec x(n_t);
    for (Eigen::Index i = 0; i < n_t; ++i) x[i] = k.point(0);
    while (true) {
        fn(static_cast<const CVec&>(x));
        Eigen::Index pos = n_t - 1;
        while (pos >= 0) {
            auto& v = idx[static_cast<std::size_t>(pos)];
            if (++v < k.order()) {
                x[pos] = k.point(v);
                break;
            }
            v = 0;
            x[pos] = k.point(0);
            --pos;
        }
        if (pos < 0) return;
    }
}

/// Exact argmax of the approximate likelihood over X^{n_t}; the first
/// maximizer in enumeration order wins ties.
inline DetectionResult exhaustive_aml(const CVec& y, const CMat& h, double gamma, const RMat& q_theta,
                                      const Constellation& k) {
    if (search_space_size(k, h.cols()) > kMaxExhaustiveSpace)
        throw SpaceTooLarge("exhaustive_aml: |X|^n_t exceeds 2^20");
    DetectionResult out;
    out.method = Method::exhaustive_aml;
    out.score = -std::numeric_limits<double>::infinity();
    for_each_vector(k, h.cols(), [&](const CVec& x) {
        const double s = approx_loglik(x, y, h, gamma, q_theta);
        if (s > out.score || out.x_hat.size() == 0) {
            out.score = s;
            out.x_hat = x;
        }
    });
    return out;
}

/// Run one method on shared starting points (exhaustive_aml ignores them).
inline DetectionResult detect(Method m, const InitialCandidates& init, const CVec& y, const CMat& h, double gamma,
                              const RMat& q_theta, const Constellation& k, int max_iter) {
    switch (m) {
    case Method::lmmse: return init.lmmse;
    case Method::naive_ml: return init.naive_ml;
    case Method::selection: return selection_detect(init);
    case Method::siw: return siw_from(init, y, h, gamma, q_theta, k);
    case Method::siw_iter: return siw_iterative_from(init, y, h, gamma, q_theta, k, max_iter);
    case Method::exhaustive_aml: return exhaustive_aml(y, h, gamma, q_theta, k);
    }
    throw DimensionMismatch("detect: unknown method");
}

} // namespace pnmimo
