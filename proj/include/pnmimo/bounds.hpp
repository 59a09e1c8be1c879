#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "approx_likelihood.hpp"
#include "detector.hpp"
#include "likelihood.hpp"
#include "scenario.hpp"
#include "statistics.hpp"

namespace pnmimo {

enum class MlDecision { no_error, error, undecided };

enum class LikelihoodPath { automatic, monte_carlo };

struct MlBoundOptions {
    std::int64_t s_start = 10000;
    std::int64_t s_max = 10000000;
    double z = 3.0;
    LikelihoodPath path = LikelihoodPath::automatic;
    int quad_nodes = kDefaultQuadNodes;
};

/// Sign of f(x_true) - f(x_ref) from paired phase draws, with s doubling from
/// s_start until the difference clears z combined standard errors.
struct PairedComparison {
    double difference = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    MlDecision decision = MlDecision::undecided;
};

template <class Rng>
PairedComparison compare_paired(const CMat& h, const CVec& x_true, const CVec& x_ref, const CVec& y, double gamma,
                                const PhaseNoiseModel& model, const MlBoundOptions& opt, Rng& rng) {
    PairedLogLikelihood pair(h, x_true, x_ref, y, gamma);
    PairedComparison out;
    std::int64_t target = std::max<std::int64_t>(2, opt.s_start);
    while (true) {
        pair.extend(model, target - pair.count(), rng);
        out.difference = pair.difference();
        out.std_error = pair.std_error();
        out.samples = pair.count();
        if (out.std_error == 0.0 || std::abs(out.difference) > opt.z * out.std_error) {
            out.decision = out.difference < 0.0 ? MlDecision::error : MlDecision::no_error;
            return out;
        }
        if (target >= opt.s_max) break;
        target = std::min(opt.s_max, 2 * target);
    }
    out.decision = MlDecision::undecided;
    return out;
}

/// One trial of the ML lower bound: an error is counted only when x_ref is
/// shown to be more likely than x_true under the true phase-noise model and
/// the true SNR.
template <class Rng>
MlDecision ml_bound_trial(const CMat& h, const CVec& y, const CVec& x_true, const CVec& x_ref, double gamma,
                          const PhaseNoiseModel& model, const MlBoundOptions& opt, Rng& rng) {
    if (same_vector(x_true, x_ref)) return MlDecision::no_error;
    const bool scalar = h.cols() + h.rows() <= 2 && model.is_gaussian();
    if (scalar && opt.path == LikelihoodPath::automatic) {
        const double ft = quad_loglik(x_true, y, h, gamma, model.q_theta(), opt.quad_nodes).value;
        const double fr = quad_loglik(x_ref, y, h, gamma, model.q_theta(), opt.quad_nodes).value;
        return ft < fr ? MlDecision::error : MlDecision::no_error;
    }
    return compare_paired(h, x_true, x_ref, y, gamma, model, opt, rng).decision;
}

enum class LPolicy { automatic, full, neighborhood, naive_ml_only };

inline std::string to_string(LPolicy p) {
    switch (p) {
    case LPolicy::automatic: return "automatic";
    case LPolicy::full: return "full";
    case LPolicy::neighborhood: return "neighborhood";
    case LPolicy::naive_ml_only: return "naive_ml_only";
    }
    return "?";
}

inline std::optional<LPolicy> parse_l_policy(const std::string& s) {
    for (LPolicy p : {LPolicy::automatic, LPolicy::full, LPolicy::neighborhood, LPolicy::naive_ml_only})
        if (to_string(p) == s) return p;
    return std::nullopt;
}

/// Indices of the `count` constellation points closest to point i (i excluded);
/// equal distances go to the lower index.
inline std::vector<int> nearest_neighbors(const Constellation& k, int i, int count = 4) {
    std::vector<int> idx(static_cast<std::size_t>(k.order()));
    std::iota(idx.begin(), idx.end(), 0);
    idx.erase(idx.begin() + i);
    const cplx p = k.point(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::norm(k.point(a) - p) < std::norm(k.point(b) - p); });
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(count)));
    return idx;
}

/// Detector outputs that join the neighborhood set.
struct AmlExtras {
    std::vector<CVec> points;
};

/// Candidate set L for a trial. `full` is not materialized (see aml_bound_trial).
inline std::vector<CVec> aml_candidate_set(LPolicy policy, const CVec& x_true, const Constellation& k,
                                           const InitialCandidates& init, const AmlExtras& extras) {
    std::vector<CVec> out;
    if (policy == LPolicy::naive_ml_only) {
        out.push_back(init.naive_ml.x_hat);
        return out;
    }
    for (Eigen::Index l = 0; l < x_true.size(); ++l) {
        const int i = k.index_of(x_true[l]);
        for (int nb : nearest_neighbors(k, i)) {
            CVec x = x_true;
            x[l] = k.point(nb);
            out.push_back(std::move(x));
        }
    }
    out.push_back(init.naive_ml.x_hat);
    out.push_back(init.lmmse.x_hat);
    for (const CVec& p : extras.points) out.push_back(p);
    return out;
}

inline LPolicy resolve_policy(LPolicy policy, const Constellation& k, Eigen::Index n_t) {
    if (policy != LPolicy::automatic) return policy;
    return search_space_size(k, n_t) <= kMaxExhaustiveSpace ? LPolicy::full : LPolicy::neighborhood;
}

/// One trial of the aML lower bound: error iff some x in L has a strictly
/// larger approximate likelihood than x_true.
inline bool aml_bound_trial(const CMat& h, const CVec& y, const CVec& x_true, double gamma, const RMat& q_theta,
                            const Constellation& k, LPolicy policy, const InitialCandidates& init,
                            const AmlExtras& extras = {}) {
    policy = resolve_policy(policy, k, h.cols());
    const double f_true = approx_loglik(x_true, y, h, gamma, q_theta);
    if (policy == LPolicy::full) {
        if (search_space_size(k, h.cols()) > kMaxExhaustiveSpace)
            throw SpaceTooLarge("aml bound: full candidate set exceeds 2^20");
        bool err = false;
        for_each_vector(k, h.cols(), [&](const CVec& x) {
            if (!err && approx_loglik(x, y, h, gamma, q_theta) > f_true) err = true;
        });
        return err;
    }
    for (const CVec& x : aml_candidate_set(policy, x_true, k, init, extras))
        if (approx_loglik(x, y, h, gamma, q_theta) > f_true) return true;
    return false;
}

/// ML lower bound over `trials` seeded draws of a scenario at one SNR.
inline BoundRecord ml_lower_bound(const Scenario& sc, double snr_db, std::int64_t trials, std::int64_t s_max,
                                  std::uint64_t master, std::uint64_t snr_idx = 0, Method reference = Method::siw_iter,
                                  LikelihoodPath path = LikelihoodPath::automatic) {
    const Constellation k(sc.qam_order);
    const auto fixed = fixed_channel(sc);
    MlBoundOptions opt;
    opt.s_max = s_max;
    opt.s_start = std::min(opt.s_start, s_max);
    opt.path = path;
    BoundRecord rec;
    rec.kind = BoundKind::ml_lb;
    for (std::int64_t i = 0; i < trials; ++i) {
        const auto ti = static_cast<std::uint64_t>(i);
        const Trial t = draw_trial(sc, k, snr_db, master, snr_idx, ti, fixed);
        const InitialCandidates init = trial_candidates(t, sc, k);
        const DetectionResult ref = detect(reference, init, t.y(), t.h, t.gamma_decoder, sc.pn.q_theta(), k,
                                           sc.max_iter);
        auto rng = trial_stream(master, snr_idx, ti, Purpose::bound);
        const MlDecision d = ml_bound_trial(t.h, t.y(), t.x_true(), ref.x_hat, t.gamma, sc.pn, opt, rng);
        ++rec.trials;
        rec.errors_counted += d == MlDecision::error ? 1 : 0;
        rec.undecided += d == MlDecision::undecided ? 1 : 0;
    }
    return rec;
}

/// aML lower bound over `trials` seeded draws of a scenario at one SNR.
inline BoundRecord aml_lower_bound(const Scenario& sc, double snr_db, std::int64_t trials, std::uint64_t master,
                                   LPolicy policy = LPolicy::automatic, std::uint64_t snr_idx = 0) {
    const Constellation k(sc.qam_order);
    const auto fixed = fixed_channel(sc);
    BoundRecord rec;
    rec.kind = BoundKind::aml_lb;
    const LPolicy resolved = resolve_policy(policy, k, sc.n_t);
    for (std::int64_t i = 0; i < trials; ++i) {
        const Trial t = draw_trial(sc, k, snr_db, master, snr_idx, static_cast<std::uint64_t>(i), fixed);
        const InitialCandidates init = trial_candidates(t, sc, k);
        AmlExtras extras;
        if (resolved == LPolicy::neighborhood) {
            const RMat& q = sc.pn.q_theta();
            extras.points.push_back(siw_from(init, t.y(), t.h, t.gamma_decoder, q, k).x_hat);
            extras.points.push_back(siw_iterative_from(init, t.y(), t.h, t.gamma_decoder, q, k, sc.max_iter).x_hat);
        }
        ++rec.trials;
        rec.errors_counted += aml_bound_trial(t.h, t.y(), t.x_true(), t.gamma_decoder, sc.pn.q_theta(), k, resolved,
                                              init, extras)
                                  ? 1
                                  : 0;
    }
    return rec;
}

} // namespace pnmimo
