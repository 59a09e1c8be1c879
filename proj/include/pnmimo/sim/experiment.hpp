#pragma once

#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "../bounds.hpp"
#include "../detector.hpp"
#include "../scenario.hpp"
#include "../statistics.hpp"
#include "config.hpp"

namespace pnmimo::sim {

/// What one trial looked like, for logging and paired-comparison checks.
struct TrialRecord {
    std::size_t snr_idx = 0;
    std::int64_t trial_idx = 0;
    std::uint64_t digest = 0;  // hash of (H, theta, z, x)
    std::vector<std::pair<Method, bool>> errors;
};

using TrialCallback = std::function<void(const TrialRecord&)>;

struct ExperimentResult {
    ExperimentConfig config;
    ErrorCounter counter;
    std::map<std::size_t, BoundRecord> ml_bounds;
    std::map<std::size_t, BoundRecord> aml_bounds;
};

namespace detail {

template <class Mat>
void hash_bytes(std::uint64_t& h, const Mat& m) {
    const auto* p = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t n = static_cast<std::size_t>(m.size()) * sizeof(typename Mat::Scalar);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

inline std::uint64_t trial_digest(const Trial& t) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_bytes(h, t.h);
    hash_bytes(h, t.obs.theta_true);
    hash_bytes(h, t.obs.z);
    hash_bytes(h, t.obs.x_true);
    return h;
}

struct Partial {
    ErrorCounter counter;
    std::map<std::size_t, BoundRecord> ml, aml;
};

inline void run_chunk(const ExperimentConfig& cfg, const Scenario& sc, const Constellation& k,
                      const std::optional<ChannelInstance>& fixed, std::size_t snr_idx, std::int64_t begin,
                      std::int64_t end, Partial& out, const TrialCallback& cb, std::mutex& cb_mu) {
    const double snr_db = cfg.snr_db_list[snr_idx];
    const RMat& q = sc.pn.q_theta();
    MlBoundOptions ml_opt;
    ml_opt.s_max = cfg.ml_lb_s_max;
    ml_opt.s_start = std::min(ml_opt.s_start, cfg.ml_lb_s_max);
    const LPolicy policy = resolve_policy(cfg.l_policy, k, cfg.n_t);
    BoundRecord& ml = out.ml[snr_idx];
    ml.kind = BoundKind::ml_lb;
    BoundRecord& aml = out.aml[snr_idx];
    aml.kind = BoundKind::aml_lb;

    for (std::int64_t i = begin; i < end; ++i) {
        const auto ti = static_cast<std::uint64_t>(i);
        const Trial t = draw_trial(sc, k, snr_db, cfg.master_seed, snr_idx, ti, fixed);
        const InitialCandidates init = trial_candidates(t, sc, k);
        std::map<Method, DetectionResult> results;
        auto run = [&](Method m) -> const DetectionResult& {
            auto it = results.find(m);
            if (it == results.end())
                it = results.emplace(m, detect(m, init, t.y(), t.h, t.gamma_decoder, q, k, cfg.max_iter)).first;
            return it->second;
        };

        TrialRecord rec;
        for (Method m : cfg.detectors) {
            const DetectionResult& r = run(m);
            const bool err = !same_vector(r.x_hat, t.x_true());
            out.counter.record(snr_idx, to_string(m), err, r.nnd_node_count);
            if (cb) rec.errors.emplace_back(m, err);
        }
        if (cfg.ml_lb) {
            const DetectionResult& ref = run(cfg.ml_lb_reference);
            auto rng = trial_stream(cfg.master_seed, snr_idx, ti, Purpose::bound);
            const MlDecision d = ml_bound_trial(t.h, t.y(), t.x_true(), ref.x_hat, t.gamma, sc.pn, ml_opt, rng);
            ++ml.trials;
            ml.errors_counted += d == MlDecision::error ? 1 : 0;
            ml.undecided += d == MlDecision::undecided ? 1 : 0;
        }
        if (cfg.aml_lb) {
            AmlExtras extras;
            if (policy == LPolicy::neighborhood) {
                extras.points.push_back(run(Method::siw).x_hat);
                extras.points.push_back(run(Method::siw_iter).x_hat);
            }
            ++aml.trials;
            aml.errors_counted +=
                aml_bound_trial(t.h, t.y(), t.x_true(), t.gamma_decoder, q, k, policy, init, extras) ? 1 : 0;
        }
        if (cb) {
            rec.snr_idx = snr_idx;
            rec.trial_idx = i;
            rec.digest = trial_digest(t);
            std::lock_guard<std::mutex> lock(cb_mu);
            cb(rec);
        }
    }
}

} // namespace detail

/// Run every (snr, trial) of a config. Trials of each SNR point are split
/// into contiguous chunks over `threads` workers; totals are integer sums,
/// so the result does not depend on the thread count. The callback, when
/// given, may be called from several threads (serialized) in any order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1, const TrialCallback& cb = {}) {
    validate(cfg);
    if (threads < 1) threads = 1;
    const Scenario sc = cfg.scenario_model();
    const Constellation k(cfg.qam_order);
    const auto fixed = fixed_channel(sc);

    ExperimentResult res;
    res.config = cfg;
    std::mutex cb_mu;
    for (std::size_t s = 0; s < cfg.snr_db_list.size(); ++s) {
        const int workers = static_cast<int>(std::min<std::int64_t>(threads, cfg.trials));
        std::vector<detail::Partial> parts(static_cast<std::size_t>(workers));
        std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
        auto work = [&](int w) {
            const std::int64_t b = cfg.trials * w / workers;
            const std::int64_t e = cfg.trials * (w + 1) / workers;
            try {
                detail::run_chunk(cfg, sc, k, fixed, s, b, e, parts[static_cast<std::size_t>(w)], cb, cb_mu);
            } catch (...) {
                errs[static_cast<std::size_t>(w)] = std::current_exception();
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& th : pool) th.join();
        }
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
        for (const auto& p : parts) {
            res.counter.merge(p.counter);
            if (cfg.ml_lb) res.ml_bounds[s] += p.ml.at(s);
            if (cfg.aml_lb) res.aml_bounds[s] += p.aml.at(s);
        }
        if (cfg.ml_lb) res.ml_bounds[s].kind = BoundKind::ml_lb;
        if (cfg.aml_lb) res.aml_bounds[s].kind = BoundKind::aml_lb;
    }
    return res;
}

} // namespace pnmimo::sim
